#include "randnn/rvfl.hpp"

#include "randnn/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>
#include <string>

namespace randnn::rvfl {

namespace {

void check_input_dim(int expected, const Matrix& X, const char* what) {
    if (X.cols() != expected) {
        throw std::invalid_argument(std::string(what) + ": input has " + std::to_string(X.cols()) +
                                    " columns, expected " + std::to_string(expected));
    }
}

// log(1 + exp(z)) without overflow
double softplus(double z) {
    if (z > 0.0) return z + std::log1p(std::exp(-z));
    return std::log1p(std::exp(z));
}

}  // namespace

RVFLParams init_rvfl(int input_dim, int hidden_dim, const Dist& dist, std::uint32_t seed,
                     bool direct_links, bool bias_feature) {
    if (input_dim <= 0 || hidden_dim <= 0) {
        throw std::invalid_argument("init_rvfl: dimensions must be positive");
    }
    RVFLParams p;
    p.input_dim = input_dim;
    p.hidden_dim = hidden_dim;
    p.include_direct_links = direct_links;
    p.include_bias_feature = bias_feature;
    p.dist = dist;
    p.seed = seed;
    std::mt19937 rng(seed);
    p.W.resize(input_dim, hidden_dim);
    for (int j = 0; j < hidden_dim; ++j)
        for (int i = 0; i < input_dim; ++i) p.W(i, j) = dist.sample(rng);
    p.b.resize(hidden_dim);
    for (int j = 0; j < hidden_dim; ++j) p.b(j) = dist.sample(rng);
    return p;
}

Matrix expand(const RVFLParams& p, const Matrix& X) {
    check_input_dim(p.input_dim, X, "expand");
    const Eigen::Index n = X.rows();
    const Eigen::Index width = p.hidden_dim + (p.include_bias_feature ? 1 : 0) +
                               (p.include_direct_links ? p.input_dim : 0);
    Matrix out(n, width);
    Eigen::Index col = 0;
    if (p.include_bias_feature) {
        out.col(col++).setOnes();
    }
    if (p.include_direct_links) {
        out.middleCols(col, p.input_dim) = X;
        col += p.input_dim;
    }
    Matrix z = X * p.W;
    z.rowwise() += p.b.transpose();
    out.middleCols(col, p.hidden_dim) = activate(Activation::Sigmoid, z);
    return out;
}

Readout train_ridge(const Matrix& H, const Matrix& y, double lambda) {
    Readout r;
    r.beta = linalg::ridge_solve({H, y, lambda});
    r.lambda = lambda;
    r.loss = LossKind::Squared;
    return r;
}

Readout train_logistic(const Matrix& H, const Matrix& y, double lambda, int max_iter, double tol) {
    if (y.cols() != 1) throw std::invalid_argument("train_logistic: expected a single target column");
    if (H.rows() != y.rows()) throw std::invalid_argument("train_logistic: row mismatch");
    if (lambda < 0.0) throw std::invalid_argument("train_logistic: lambda must be nonnegative");
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
        if (y(i, 0) != 0.0 && y(i, 0) != 1.0) {
            throw std::invalid_argument("train_logistic: labels must be 0 or 1, got " +
                                        std::to_string(y(i, 0)) + " at row " + std::to_string(i));
        }
    }

    const Eigen::Index b = H.cols();
    Vector beta = Vector::Zero(b);

    auto objective = [&](const Vector& w) {
        Vector z = H * w;
        double obj = 0.0;
        for (Eigen::Index i = 0; i < z.size(); ++i) {
            // -y log p - (1-y) log(1-p) = softplus(z) - y z
            obj += softplus(z(i)) - y(i, 0) * z(i);
        }
        return obj + lambda * w.squaredNorm();
    };

    Readout r;
    r.lambda = lambda;
    r.loss = LossKind::Logistic;
    r.converged = false;

    double obj = objective(beta);
    double step = 1.0;
    int it = 0;
    for (; it < max_iter; ++it) {
        Vector p = activate(Activation::Sigmoid, Vector(H * beta));
        Vector grad = H.transpose() * (p - y.col(0)) + 2.0 * lambda * beta;
        const double gnorm = grad.norm();
        if (gnorm <= tol) {
            r.converged = true;
            break;
        }
        // Armijo backtracking; the starting step is allowed to grow back.
        step = std::min(step * 2.0, 1e4);
        double next_obj;
        Vector cand;
        while (true) {
            cand = beta - step * grad;
            next_obj = objective(cand);
            if (next_obj <= obj - 0.25 * step * gnorm * gnorm) break;
            step *= 0.5;
            if (step < 1e-18) {  // stalled: no descent direction left at this precision
                cand = beta;
                next_obj = obj;
                break;
            }
        }
        if (step < 1e-18) break;
        beta = cand;
        obj = next_obj;
    }
    r.beta = beta;
    r.iterations = it;
    return r;
}

Readout train_l1(const Matrix& H, const Matrix& y, double lambda, int max_iter, double tol) {
    if (H.rows() != y.rows()) throw std::invalid_argument("train_l1: row mismatch");
    if (!(lambda > 0.0)) throw std::invalid_argument("train_l1: lambda must be positive");

    const Eigen::Index b = H.cols();
    Matrix gram = H.transpose() * H;
    Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
    const double lip = 2.0 * std::max(es.eigenvalues().maxCoeff(), 1e-300);
    const double step = 1.0 / lip;
    const double thresh = lambda * step;

    Matrix beta = Matrix::Zero(b, y.cols());
    Matrix hty = H.transpose() * y;

    auto objective = [&](const Matrix& w) {
        return (H * w - y).squaredNorm() + lambda * w.cwiseAbs().sum();
    };

    Readout r;
    r.lambda = lambda;
    r.loss = LossKind::L1;
    r.converged = false;

    double obj = objective(beta);
    int it = 0;
    for (; it < max_iter; ++it) {
        Matrix grad = 2.0 * (gram * beta - hty);
        Matrix v = beta - step * grad;
        // soft threshold
        Matrix next = (v.array().abs() - thresh).max(0.0) * v.array().sign();
        const double next_obj = objective(next);
        const double decrease = obj - next_obj;
        beta = next;
        obj = next_obj;
        if (decrease >= 0.0 && decrease <= tol) {
            r.converged = true;
            ++it;
            break;
        }
    }
    r.beta = beta;
    r.iterations = it;
    r.sparsity = static_cast<int>((beta.array() == 0.0).count());
    return r;
}

double semi_random_gate(double z, int exponent) {
    if (exponent < 1) throw std::invalid_argument("semi_random_gate: exponent must be >= 1");
    if (z <= 0.0) return 0.0;
    return std::pow(z, exponent);
}

SemiRandomParams init_semi_random(int input_dim, int num_blocks, int exponent,
                                  const Dist& dist, std::uint32_t seed) {
    if (input_dim <= 0 || num_blocks <= 0) {
        throw std::invalid_argument("init_semi_random: dimensions must be positive");
    }
    if (exponent < 1) throw std::invalid_argument("init_semi_random: exponent must be >= 1");
    SemiRandomParams sp;
    sp.exponent = exponent;
    sp.R.resize(input_dim, num_blocks);
    std::mt19937 rng(seed);
    for (int j = 0; j < num_blocks; ++j)
        for (int i = 0; i < input_dim; ++i) sp.R(i, j) = dist.sample(rng);
    return sp;
}

Matrix semi_random_expand(const SemiRandomParams& sp, const Matrix& X) {
    if (sp.exponent < 1) throw std::invalid_argument("semi_random_expand: exponent must be >= 1");
    check_input_dim(static_cast<int>(sp.R.rows()), X, "semi_random_expand");
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    const Eigen::Index blocks = sp.R.cols();
    Matrix gates = X * sp.R;  // n x blocks
    Matrix out(n, blocks * d);
    for (Eigen::Index j = 0; j < blocks; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            out.row(i).segment(j * d, d) = semi_random_gate(gates(i, j), sp.exponent) * X.row(i);
        }
    }
    return out;
}

std::vector<Matrix> stack_autoencoders(const Matrix& X, const std::vector<int>& layer_dims,
                                       double lambda, const Dist& dist, std::uint32_t seed,
                                       const AutoencoderOptions& opts) {
    if (layer_dims.empty()) throw std::invalid_argument("stack_autoencoders: layer_dims is empty");
    if (X.rows() == 0 || X.cols() == 0) throw std::invalid_argument("stack_autoencoders: empty data");

    std::vector<Matrix> adopted;
    adopted.reserve(layer_dims.size());
    Matrix cur = X;
    for (std::size_t l = 0; l < layer_dims.size(); ++l) {
        RVFLParams p = init_rvfl(static_cast<int>(cur.cols()), layer_dims[l], dist,
                                 seed + static_cast<std::uint32_t>(l));
        Matrix fit_input = cur;
        if (opts.noise_sigma > 0.0) {
            std::mt19937 noise_rng(seed + 7919u * static_cast<std::uint32_t>(l + 1));
            std::normal_distribution<double> noise(0.0, opts.noise_sigma);
            for (Eigen::Index j = 0; j < fit_input.cols(); ++j)
                for (Eigen::Index i = 0; i < fit_input.rows(); ++i) fit_input(i, j) += noise(noise_rng);
        }
        Matrix z = fit_input * p.W;
        z.rowwise() += p.b.transpose();
        Matrix h = activate(opts.activation, z);

        Matrix beta;
        if (opts.sparse_readout) {
            beta = train_l1(h, cur, lambda, opts.l1_max_iter, opts.l1_tol).beta;
        } else {
            beta = linalg::ridge_solve({h, cur, lambda});
        }
        adopted.push_back(beta.transpose());
        cur = activate(opts.activation, Matrix(cur * adopted.back()));
    }
    return adopted;
}

Matrix autoencoder_forward(const Matrix& X, const std::vector<Matrix>& weights, Activation act) {
    Matrix cur = X;
    for (const Matrix& w : weights) {
        if (cur.cols() != w.rows()) {
            throw std::invalid_argument("autoencoder_forward: dimension mismatch at adopted layer");
        }
        cur = activate(act, Matrix(cur * w));
    }
    return cur;
}

}  // namespace randnn::rvfl
