#include "randnn/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>
#include <string>

namespace randnn::linalg {

namespace {

void validate(const RidgeProblem& p) {
    if (p.design.rows() != p.targets.rows()) {
        throw std::invalid_argument("ridge: design has " + std::to_string(p.design.rows()) +
                                    " rows but targets have " + std::to_string(p.targets.rows()));
    }
    if (p.lambda < 0.0) throw std::invalid_argument("ridge: lambda must be nonnegative");
    if (!p.design.allFinite() || !p.targets.allFinite()) {
        throw std::invalid_argument("ridge: non-finite entries in problem data");
    }
}

// Solve A x = rhs for SPD A, with one refinement pass when the residual is loose.
Matrix spd_solve(const Matrix& a, const Matrix& rhs) {
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() != Eigen::Success) {
        Eigen::LDLT<Matrix> ldlt(a);
        if (ldlt.info() != Eigen::Success) {
            throw std::runtime_error("ridge: factorization of the regularized system failed");
        }
        Matrix x = ldlt.solve(rhs);
        x += ldlt.solve(rhs - a * x);
        return x;
    }
    Matrix x = llt.solve(rhs);
    Matrix r = rhs - a * x;
    if (r.norm() > 1e-10 * rhs.norm()) x += llt.solve(r);
    return x;
}

}  // namespace

Matrix ridge_solve_primal(const RidgeProblem& p) {
    validate(p);
    const auto b = p.design.cols();
    Matrix rhs = p.design.transpose() * p.targets;
    if (p.lambda == 0.0) {
        Eigen::ColPivHouseholderQR<Matrix> qr(p.design);
        if (qr.rank() < b) {
            throw std::runtime_error("ridge: rank-deficient design with lambda == 0; use lambda > 0");
        }
        Matrix beta = qr.solve(p.targets);
        beta += qr.solve(p.targets - p.design * beta);
        return beta;
    }
    Matrix a = p.design.transpose() * p.design;
    a.diagonal().array() += p.lambda;
    return spd_solve(a, rhs);
}

Matrix ridge_solve_dual(const RidgeProblem& p) {
    validate(p);
    if (p.lambda <= 0.0) {
        throw std::invalid_argument("ridge (dual): lambda must be positive, the Gram matrix may be singular");
    }
    Matrix c = p.design * p.design.transpose();
    c.diagonal().array() += p.lambda;
    return p.design.transpose() * spd_solve(c, p.targets);
}

Matrix ridge_solve(const RidgeProblem& p) {
    validate(p);
    if (p.design.cols() <= p.design.rows()) return ridge_solve_primal(p);
    return ridge_solve_dual(p);
}

namespace {

// Largest eigenvalue modulus from the real Schur form: 1x1 blocks carry real
// eigenvalues, 2x2 blocks carry complex pairs with |lambda|^2 = det(block).
double schur_radius(const Matrix& w) {
    const Eigen::Index n = w.rows();
    if (n == 1) return std::abs(w(0, 0));
    Eigen::RealSchur<Matrix> schur(w, /*computeU=*/false);
    if (schur.info() != Eigen::Success) {
        throw std::runtime_error("spectral_radius: Schur decomposition did not converge");
    }
    const Matrix& t = schur.matrixT();
    double rho = 0.0;
    Eigen::Index i = 0;
    while (i < n) {
        if (i + 1 < n && t(i + 1, i) != 0.0) {
            const double det = t(i, i) * t(i + 1, i + 1) - t(i, i + 1) * t(i + 1, i);
            rho = std::max(rho, std::sqrt(std::max(det, 0.0)));
            i += 2;
        } else {
            rho = std::max(rho, std::abs(t(i, i)));
            i += 1;
        }
    }
    return rho;
}

// Power iteration fast path. Returns a negative value when it fails to
// converge to a dominant real eigenvalue (complex-conjugate pairs, ties);
// callers then fall back to the exact Schur route.
double power_radius(const Matrix& w, const SolverOptions& opts) {
    const Eigen::Index n = w.rows();
    std::mt19937 rng(0x5eed5u);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = u(rng);
    v.normalize();

    const double scale = std::max(w.norm(), 1e-300);
    double lambda_prev = 0.0;
    int stable = 0;
    for (int it = 0; it < opts.power_max_iter; ++it) {
        Vector wv = w * v;
        const double lambda = v.dot(wv);
        const double wv_norm = wv.norm();
        if (wv_norm < 1e-300) return 0.0;  // reached the null space: W is nilpotent-like
        const double resid = (wv - lambda * v).norm();
        if (resid <= opts.power_tol * scale && std::abs(lambda - lambda_prev) <= 1e-13 * scale) {
            if (++stable >= 8) return std::abs(lambda);
        } else {
            stable = 0;
        }
        lambda_prev = lambda;
        v = wv / wv_norm;
    }
    return -1.0;
}

}  // namespace

double spectral_radius(const Matrix& w, const SolverOptions& opts) {
    if (w.rows() != w.cols()) {
        throw std::invalid_argument("spectral_radius: matrix must be square, got " +
                                    std::to_string(w.rows()) + "x" + std::to_string(w.cols()));
    }
    if (!w.allFinite()) throw std::invalid_argument("spectral_radius: non-finite entries");
    if (w.rows() == 0) return 0.0;
    if (w.rows() >= opts.power_min_dim) {
        const double fast = power_radius(w, opts);
        if (fast >= 0.0) return fast;
    }
    return schur_radius(w);
}

double spectral_norm(const Matrix& w) {
    if (!w.allFinite()) throw std::invalid_argument("spectral_norm: non-finite entries");
    if (w.rows() == 0 || w.cols() == 0) return 0.0;
    Eigen::BDCSVD<Matrix> svd(w);
    return svd.singularValues()(0);
}

}  // namespace randnn::linalg
