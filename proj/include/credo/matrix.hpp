#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace credo {

// Dense row-major matrix of doubles. Column vectors are n x 1 matrices.
// Every operation checks dimensions and throws DimensionError on mismatch.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);
    static Matrix column(std::initializer_list<double> entries);
    static Matrix column(const std::vector<double>& entries);
    static Matrix diag(const std::vector<double>& entries);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }
    bool is_column() const { return cols_ == 1; }
    bool is_scalar() const { return rows_ == 1 && cols_ == 1; }

    double& operator()(std::size_t i, std::size_t j);
    double operator()(std::size_t i, std::size_t j) const;

    // Column-vector element access.
    double& operator[](std::size_t i);
    double operator[](std::size_t i) const;

    double scalar() const;  // value of a 1x1 matrix

    Matrix transpose() const;
    Matrix operator+(const Matrix& other) const;
    Matrix operator-(const Matrix& other) const;
    Matrix operator-() const;
    Matrix operator*(const Matrix& other) const;  // matrix product
    Matrix operator*(double s) const;
    Matrix& operator+=(const Matrix& other);
    Matrix& operator-=(const Matrix& other);

    bool operator==(const Matrix& other) const;

    // Stacks `top` over `bottom` (column counts must agree).
    static Matrix vstack(const Matrix& top, const Matrix& bottom);
    // Places `left` beside `right` (row counts must agree).
    static Matrix hstack(const Matrix& left, const Matrix& right);

    double max_abs() const;
    double inf_norm() const;   // max absolute row sum
    double frobenius() const;
    bool all_finite() const;

    // Max |a(i,j) - b(i,j)|.
    static double max_abs_diff(const Matrix& a, const Matrix& b);

    bool is_symmetric(double tol) const;

    std::string describe() const;  // "3x2" style, for error messages

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline Matrix operator*(double s, const Matrix& m) { return m * s; }

}  // namespace credo
