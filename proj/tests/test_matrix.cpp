#include "doctest.h"

#include "credo/errors.hpp"
#include "credo/linalg.hpp"
#include "credo/matrix.hpp"
#include "credo/rng.hpp"

using namespace credo;

TEST_CASE("matrix arithmetic and shape checks") {
    Matrix a{{1, 2}, {3, 4}};
    Matrix b{{5, 6}, {7, 8}};
    CHECK((a + b)(0, 1) == 8);
    CHECK((a * b)(0, 0) == 19);
    CHECK((a * b)(1, 1) == 50);
    CHECK(a.transpose()(0, 1) == 3);
    CHECK_THROWS_AS(a + Matrix(3, 2), DimensionError);
    CHECK_THROWS_AS(a * Matrix(3, 3), DimensionError);

    Matrix v = Matrix::column({1.0, 2.0, 3.0});
    CHECK(v[2] == 3.0);
    CHECK(Matrix::vstack(v, v).rows() == 6);
    CHECK(Matrix::hstack(a, b).cols() == 4);
    CHECK(a.inf_norm() == 7.0);
}

TEST_CASE("lu solve and inverse") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 1 + trial % 5;
        Matrix a = rng.matrix(n, n);
        for (std::size_t i = 0; i < n; ++i) a(i, i) += 3.0;  // diagonally dominant
        const Matrix x = rng.matrix(n, 2);
        const Matrix b = a * x;
        CHECK(Matrix::max_abs_diff(solve(a, b), x) < 1e-9);
        CHECK(Matrix::max_abs_diff(a * inverse(a), Matrix::identity(n)) < 1e-9);
    }
    CHECK_THROWS_AS(solve(Matrix(2, 2), Matrix(2, 1)), SingularMatrixError);
}

TEST_CASE("cholesky and spd solve") {
    Matrix m{{4, 2}, {2, 3}};
    Matrix l;
    REQUIRE(cholesky(m, l));
    CHECK(Matrix::max_abs_diff(l * l.transpose(), m) < 1e-12);

    Rng rng(12);
    const Matrix g = rng.matrix(4, 4);
    const Matrix spd = g.transpose() * g + Matrix::identity(4) * 0.5;
    const Matrix rhs = rng.matrix(4, 3);
    CHECK(Matrix::max_abs_diff(spd * solve_spd(spd, rhs), rhs) < 1e-9);
}

TEST_CASE("symmetric eigensolver") {
    const Matrix d = Matrix::diag({3.0, -1.0, 2.0});
    const EigenSym e = eigen_symmetric(d);
    CHECK(e.values[0] == doctest::Approx(-1.0));
    CHECK(e.values[2] == doctest::Approx(3.0));

    Rng rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix g = rng.matrix(4, 4);
        const Matrix s = g + g.transpose();
        const EigenSym es = eigen_symmetric(s);
        for (std::size_t k = 0; k < 4; ++k) {
            Matrix v(4, 1);
            for (std::size_t i = 0; i < 4; ++i) v[i] = es.vectors(i, k);
            CHECK(Matrix::max_abs_diff(s * v, v * es.values[k]) < 1e-8);
        }
    }
}

TEST_CASE("positive definiteness") {
    CHECK(is_positive_definite(Matrix::identity(3)));
    CHECK_FALSE(is_positive_definite(Matrix::diag({1.0, -1.0})));
    CHECK_THROWS_AS(is_positive_definite(Matrix{{1, 2}, {0, 1}}), ValidationError);

    // random G'G + 1e-6 I is SPD; cross-check with an eigenvalue sign scan
    Rng rng(14);
    for (int trial = 0; trial < 25; ++trial) {
        const Matrix g = rng.matrix(3, 3);
        const Matrix m = g.transpose() * g + Matrix::identity(3) * 1e-6;
        const bool spd = is_positive_definite(m);
        CHECK(spd);
        const EigenSym es = eigen_symmetric(m);
        CHECK(es.values.front() > 0.0);
    }
}

TEST_CASE("pseudo inverse") {
    Rng rng(15);
    const Matrix tall = rng.matrix(5, 3);
    const Matrix pt = pinv(tall);
    CHECK(Matrix::max_abs_diff(pt * tall, Matrix::identity(3)) < 1e-9);
    const Matrix wide = rng.matrix(2, 4);
    const Matrix pw = pinv(wide);
    CHECK(Matrix::max_abs_diff(wide * pw, Matrix::identity(2)) < 1e-9);

    Matrix deficient(1, 3);  // wide rank-0
    CHECK_THROWS_AS(pinv(deficient), SingularMatrixError);
}

TEST_CASE("spectral radius estimate") {
    CHECK(spectral_radius(Matrix::diag({0.5, 0.2, 0.1})) == doctest::Approx(0.5).epsilon(1e-9));
    // rotation scaled by 0.9 has complex eigenvalues of modulus 0.9
    const double c = std::cos(0.7), s = std::sin(0.7);
    Matrix rot{{0.9 * c, -0.9 * s}, {0.9 * s, 0.9 * c}};
    CHECK(spectral_radius(rot) == doctest::Approx(0.9).epsilon(1e-9));
    CHECK(spectral_radius(Matrix::identity(3)) == doctest::Approx(1.0).epsilon(1e-9));
    // nilpotent
    Matrix nil{{0, 1}, {0, 0}};
    CHECK(spectral_radius(nil) < 1e-6);
}

TEST_CASE("ellipsoid boundary sampler lands on the boundary") {
    Rng rng(16);
    const Matrix g = rng.matrix(3, 3);
    const Matrix p = g.transpose() * g + Matrix::identity(3);
    Matrix l;
    REQUIRE(cholesky(p, l));
    for (int i = 0; i < 200; ++i) {
        const Matrix x = sample_ellipsoid_boundary(rng, l);
        CHECK((x.transpose() * p * x).scalar() == doctest::Approx(1.0).epsilon(1e-9));
    }
    for (int i = 0; i < 200; ++i) {
        const Matrix x = sample_ellipsoid_interior(rng, l);
        CHECK((x.transpose() * p * x).scalar() <= 1.0 + 1e-12);
    }
}
