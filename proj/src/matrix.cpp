#include "credo/matrix.hpp"

#include <cmath>
#include <cstdlib>

#include "credo/errors.hpp"

namespace credo {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& row : rows) {
        if (row.size() != cols_) {
            throw DimensionError("ragged matrix literal");
        }
        data_.insert(data_.end(), row.begin(), row.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::column(std::initializer_list<double> entries) {
    Matrix m(entries.size(), 1);
    std::size_t i = 0;
    for (double v : entries) m.data_[i++] = v;
    return m;
}

Matrix Matrix::column(const std::vector<double>& entries) {
    Matrix m(entries.size(), 1);
    m.data_ = entries;
    return m;
}

Matrix Matrix::diag(const std::vector<double>& entries) {
    Matrix m(entries.size(), entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) m(i, i) = entries[i];
    return m;
}

double& Matrix::operator()(std::size_t i, std::size_t j) {
    if (i >= rows_ || j >= cols_) {
        throw DimensionError("index (" + std::to_string(i) + "," + std::to_string(j) +
                             ") out of range for " + describe());
    }
    return data_[i * cols_ + j];
}

double Matrix::operator()(std::size_t i, std::size_t j) const {
    if (i >= rows_ || j >= cols_) {
        throw DimensionError("index (" + std::to_string(i) + "," + std::to_string(j) +
                             ") out of range for " + describe());
    }
    return data_[i * cols_ + j];
}

double& Matrix::operator[](std::size_t i) {
    if (cols_ != 1) throw DimensionError("operator[] on non-column " + describe());
    return (*this)(i, 0);
}

double Matrix::operator[](std::size_t i) const {
    if (cols_ != 1) throw DimensionError("operator[] on non-column " + describe());
    return (*this)(i, 0);
}

double Matrix::scalar() const {
    if (!is_scalar()) throw DimensionError("scalar() on " + describe());
    return data_[0];
}

Matrix Matrix::transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

Matrix Matrix::operator+(const Matrix& other) const {
    Matrix r = *this;
    r += other;
    return r;
}

Matrix Matrix::operator-(const Matrix& other) const {
    Matrix r = *this;
    r -= other;
    return r;
}

Matrix Matrix::operator-() const {
    Matrix r = *this;
    for (double& v : r.data_) v = -v;
    return r;
}

Matrix& Matrix::operator+=(const Matrix& other) {
    if (rows_ != other.rows_ || cols_ != other.cols_) {
        throw DimensionError("add " + describe() + " with " + other.describe());
    }
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
    if (rows_ != other.rows_ || cols_ != other.cols_) {
        throw DimensionError("subtract " + describe() + " with " + other.describe());
    }
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
    return *this;
}

Matrix Matrix::operator*(const Matrix& other) const {
    if (cols_ != other.rows_) {
        throw DimensionError("multiply " + describe() + " with " + other.describe());
    }
    Matrix r(rows_, other.cols_);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t k = 0; k < cols_; ++k) {
            const double aik = (*this)(i, k);
            for (std::size_t j = 0; j < other.cols_; ++j) {
                r(i, j) += aik * other(k, j);
            }
        }
    }
    return r;
}

Matrix Matrix::operator*(double s) const {
    Matrix r = *this;
    for (double& v : r.data_) v *= s;
    return r;
}

bool Matrix::operator==(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_ && data_ == other.data_;
}

Matrix Matrix::vstack(const Matrix& top, const Matrix& bottom) {
    if (top.cols_ != bottom.cols_) {
        throw DimensionError("vstack " + top.describe() + " over " + bottom.describe());
    }
    Matrix r(top.rows_ + bottom.rows_, top.cols_);
    for (std::size_t i = 0; i < top.rows_; ++i)
        for (std::size_t j = 0; j < top.cols_; ++j) r(i, j) = top(i, j);
    for (std::size_t i = 0; i < bottom.rows_; ++i)
        for (std::size_t j = 0; j < bottom.cols_; ++j) r(top.rows_ + i, j) = bottom(i, j);
    return r;
}

Matrix Matrix::hstack(const Matrix& left, const Matrix& right) {
    if (left.rows_ != right.rows_) {
        throw DimensionError("hstack " + left.describe() + " beside " + right.describe());
    }
    Matrix r(left.rows_, left.cols_ + right.cols_);
    for (std::size_t i = 0; i < left.rows_; ++i) {
        for (std::size_t j = 0; j < left.cols_; ++j) r(i, j) = left(i, j);
        for (std::size_t j = 0; j < right.cols_; ++j) r(i, left.cols_ + j) = right(i, j);
    }
    return r;
}

double Matrix::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

double Matrix::inf_norm() const {
    double m = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < cols_; ++j) s += std::abs((*this)(i, j));
        m = std::max(m, s);
    }
    return m;
}

double Matrix::frobenius() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
}

bool Matrix::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

double Matrix::max_abs_diff(const Matrix& a, const Matrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) {
        throw DimensionError("compare " + a.describe() + " with " + b.describe());
    }
    double m = 0.0;
    for (std::size_t k = 0; k < a.data_.size(); ++k) {
        m = std::max(m, std::abs(a.data_[k] - b.data_[k]));
    }
    return m;
}

bool Matrix::is_symmetric(double tol) const {
    if (rows_ != cols_) return false;
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = i + 1; j < cols_; ++j)
            if (std::abs((*this)(i, j) - (*this)(j, i)) > tol) return false;
    return true;
}

std::string Matrix::describe() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
}

}  // namespace credo
