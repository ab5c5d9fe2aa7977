#include "randnn/linalg.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace randnn;
using linalg::RidgeProblem;

TEST_CASE("ridge primal: identity designs") {
    Matrix h = Matrix::Identity(2, 2);
    Matrix y(2, 1);
    y << 1.0, 2.0;

    Matrix b0 = linalg::ridge_solve_primal({h, y, 0.0});
    CHECK(b0(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(b0(1, 0) == doctest::Approx(2.0).epsilon(1e-12));

    Matrix b1 = linalg::ridge_solve_primal({h, y, 1.0});
    CHECK(b1(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(b1(1, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ridge primal matches the gradient-descent minimizer") {
    Matrix h = oracles::random_matrix(8, 3, 41);
    Matrix y = oracles::random_matrix(8, 1, 42);
    Matrix ours = linalg::ridge_solve_primal({h, y, 0.1});
    Matrix oracle = oracles::gd_ridge(h, y, 0.1);
    CHECK((ours - oracle).norm() <= 1e-6 * std::max(1.0, oracle.norm()));
}

TEST_CASE("ridge primal: rank-deficient design at lambda 0 is rejected") {
    Matrix h(4, 3);
    h << 1, 0, 1,
         0, 1, 1,
         1, 1, 2,
         2, 0, 2;  // col2 = col0 + col1
    Matrix y = Matrix::Ones(4, 1);
    CHECK_THROWS_AS(linalg::ridge_solve_primal({h, y, 0.0}), std::runtime_error);
}

TEST_CASE("ridge dual") {
    Matrix h = Matrix::Identity(2, 2);
    Matrix y(2, 1);
    y << 1.0, 2.0;
    Matrix b = linalg::ridge_solve_dual({h, y, 1.0});
    CHECK(b(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(b(1, 0) == doctest::Approx(1.0).epsilon(1e-12));

    SUBCASE("wide design agrees with the primal form") {
        Matrix hw = oracles::random_matrix(4, 50, 7);
        Matrix yw = oracles::random_matrix(4, 2, 8);
        Matrix primal = linalg::ridge_solve_primal({hw, yw, 0.5});
        Matrix dual = linalg::ridge_solve_dual({hw, yw, 0.5});
        CHECK((primal - dual).norm() <= 1e-8 * std::max(1.0, primal.norm()));
    }
    SUBCASE("zero targets give zero weights") {
        Matrix hw = oracles::random_matrix(5, 9, 9);
        Matrix b0 = linalg::ridge_solve_dual({hw, Matrix::Zero(5, 1), 0.3});
        CHECK(b0.norm() == 0.0);
    }
    SUBCASE("lambda 0 is rejected") {
        CHECK_THROWS_AS(linalg::ridge_solve_dual({h, y, 0.0}), std::invalid_argument);
    }
}

TEST_CASE("ridge_solve dispatches on the design shape") {
    Matrix y100 = oracles::random_matrix(100, 1, 2);
    Matrix tall = oracles::random_matrix(100, 10, 1);
    // tall: primal path, identical output
    CHECK((linalg::ridge_solve({tall, y100, 0.1}) - linalg::ridge_solve_primal({tall, y100, 0.1}))
              .cwiseAbs()
              .maxCoeff() == 0.0);

    Matrix wide = oracles::random_matrix(10, 100, 3);
    Matrix y10 = oracles::random_matrix(10, 1, 4);
    CHECK((linalg::ridge_solve({wide, y10, 0.1}) - linalg::ridge_solve_dual({wide, y10, 0.1}))
              .cwiseAbs()
              .maxCoeff() == 0.0);

    SUBCASE("square problems agree across both paths") {
        Matrix sq = oracles::random_matrix(20, 20, 5);
        Matrix ysq = oracles::random_matrix(20, 1, 6);
        Matrix p = linalg::ridge_solve_primal({sq, ysq, 0.2});
        Matrix d = linalg::ridge_solve_dual({sq, ysq, 0.2});
        CHECK((p - d).norm() <= 1e-8 * std::max(1.0, p.norm()));
    }
}

TEST_CASE("ridge: shape and finiteness validation") {
    Matrix h = Matrix::Ones(3, 2);
    CHECK_THROWS_AS(linalg::ridge_solve({h, Matrix::Ones(4, 1), 0.1}), std::invalid_argument);
    CHECK_THROWS_AS(linalg::ridge_solve({h, Matrix::Ones(3, 1), -1.0}), std::invalid_argument);
    Matrix bad = h;
    bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(linalg::ridge_solve({bad, Matrix::Ones(3, 1), 0.1}), std::invalid_argument);
}

TEST_CASE("spectral_radius: diagonal and ring cases") {
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 0.3;
    d(1, 1) = -0.9;
    CHECK(linalg::spectral_radius(d) == doctest::Approx(0.9).epsilon(1e-12));

    // N-unit ring with weight w: circulant shift, eigenvalues are w times the
    // roots of unity, so the radius is |w|
    const int n = 7;
    const double w = -0.45;
    Matrix ring = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) ring((i + 1) % n, i) = w;
    CHECK(linalg::spectral_radius(ring) == doctest::Approx(0.45).epsilon(1e-9));

    CHECK_THROWS_AS(linalg::spectral_radius(Matrix::Zero(2, 3)), std::invalid_argument);
}

TEST_CASE("spectral_radius matches the Gelfand-limit oracle") {
    Matrix w = oracles::random_matrix(50, 50, 11);
    const double ours = linalg::spectral_radius(w);
    const double oracle = oracles::gelfand_radius(w);
    CHECK(ours == doctest::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("spectral_radius: power-iteration fast path and Schur fallback agree") {
    // positive entries: strong dominant real eigenvalue, the fast path converges
    Matrix pos = oracles::random_matrix(300, 300, 13, 0.0, 1.0);
    CHECK(linalg::spectral_radius(pos) == doctest::Approx(oracles::gelfand_radius(pos)).epsilon(1e-8));

    // large ring: complex-conjugate dominant pair defeats power iteration
    const int n = 300;
    Matrix ring = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) ring((i + 1) % n, i) = 0.7;
    CHECK(linalg::spectral_radius(ring) == doctest::Approx(0.7).epsilon(1e-9));
}

TEST_CASE("spectral_norm") {
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 0.3;
    d(1, 1) = -0.9;
    CHECK(linalg::spectral_norm(d) == doctest::Approx(0.9).epsilon(1e-12));

    Matrix q = 0.7 * oracles::random_orthogonal(12, 17);
    CHECK(linalg::spectral_norm(q) == doctest::Approx(0.7).epsilon(1e-10));

    Matrix w = oracles::random_matrix(30, 30, 19);
    CHECK(linalg::spectral_norm(w) == doctest::Approx(oracles::jacobi_spectral_norm(w)).epsilon(1e-10));
}

TEST_CASE("property: radius never exceeds norm") {
    for (std::uint32_t seed = 0; seed < 20; ++seed) {
        Matrix w = oracles::random_matrix(15, 15, 100 + seed, -2.0, 2.0);
        CHECK(linalg::spectral_radius(w) <= linalg::spectral_norm(w) * (1.0 + 1e-12));
    }
}

TEST_CASE("property: primal and dual agree for lambda > 0") {
    for (std::uint32_t seed = 0; seed < 10; ++seed) {
        const int n = 5 + static_cast<int>(seed % 4) * 7;
        const int b = 3 + static_cast<int>(seed % 5) * 9;
        Matrix h = oracles::random_matrix(n, b, 200 + seed);
        Matrix y = oracles::random_matrix(n, 2, 300 + seed);
        Matrix p = linalg::ridge_solve_primal({h, y, 0.05});
        Matrix d = linalg::ridge_solve_dual({h, y, 0.05});
        CHECK((p - d).norm() <= 1e-8 * std::max(1.0, p.norm()));
    }
}

TEST_CASE("property: normal-equations residual stays below 1e-8 relative") {
    for (std::uint32_t seed = 0; seed < 10; ++seed) {
        Matrix h = oracles::random_matrix(40, 12, 400 + seed);
        Matrix y = oracles::random_matrix(40, 1, 500 + seed);
        const double lambda = seed % 2 ? 1e-3 : 1.0;
        Matrix beta = linalg::ridge_solve_primal({h, y, lambda});
        Matrix lhs = (h.transpose() * h + lambda * Matrix::Identity(12, 12)) * beta;
        Matrix rhs = h.transpose() * y;
        CHECK((lhs - rhs).norm() <= 1e-8 * std::max(1.0, rhs.norm()));
    }
}

TEST_CASE("property: solution norm decreases monotonically in lambda") {
    Matrix h = oracles::random_matrix(30, 8, 600);
    Matrix y = oracles::random_matrix(30, 1, 601);
    double prev = std::numeric_limits<double>::infinity();
    for (double lambda : {1e-4, 1e-2, 1.0, 1e2, 1e4}) {
        const double norm = linalg::ridge_solve_primal({h, y, lambda}).norm();
        CHECK(norm <= prev * (1.0 + 1e-12));
        prev = norm;
    }
    CHECK(prev <= 1e-3);  // beta -> 0 as lambda -> infinity
}
