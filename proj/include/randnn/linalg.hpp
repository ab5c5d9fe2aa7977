#pragma once

#include "randnn/types.hpp"

namespace randnn::linalg {

/// l2-regularized least squares: minimize ||design*beta - targets||^2 + lambda*||beta||^2.
struct RidgeProblem {
    Matrix design;   // N x B
    Matrix targets;  // N x O
    double lambda = 0.0;
};

struct SolverOptions {
    /// Residual tolerance for accepting the power-iteration estimate.
    double power_tol = 1e-10;
    int power_max_iter = 5000;
    /// Below this dimension the Schur route is cheap enough to use directly.
    int power_min_dim = 256;
};

/// beta = (H^T H + lambda I)^-1 H^T y. lambda == 0 requires full column rank.
Matrix ridge_solve_primal(const RidgeProblem& p);

/// beta = H^T (H H^T + lambda I)^-1 y. Requires lambda > 0.
Matrix ridge_solve_dual(const RidgeProblem& p);

/// Dispatches to the primal form when B <= N, otherwise to the dual form.
Matrix ridge_solve(const RidgeProblem& p);

/// Largest eigenvalue modulus of a square matrix.
double spectral_radius(const Matrix& w, const SolverOptions& opts = {});

/// Largest singular value.
double spectral_norm(const Matrix& w);

}  // namespace randnn::linalg
