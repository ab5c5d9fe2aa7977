#pragma once

#include "randnn/types.hpp"

#include <cstdint>
#include <vector>

namespace randnn::rvfl {

/// Fixed random input-to-hidden map of an RVFL network.
/// Reconstructible from (dims, dist, seed).
struct RVFLParams {
    int input_dim = 0;
    int hidden_dim = 0;
    Matrix W;  // input_dim x hidden_dim, one column per hidden unit
    Vector b;  // hidden_dim random biases
    bool include_direct_links = false;
    bool include_bias_feature = false;
    Dist dist;
    std::uint32_t seed = 0;
};

enum class LossKind { Squared, Logistic, L1 };

/// Trained linear output weights plus fit metadata.
struct Readout {
    Matrix beta;  // feature_dim x output_dim
    double lambda = 0.0;
    LossKind loss = LossKind::Squared;
    bool converged = true;
    int iterations = 0;
    int sparsity = 0;  // exact zero entries in beta (l1 fits)
};

/// Gated linear features: block i of the expansion is sigma_s(r_i^T x) * x.
struct SemiRandomParams {
    Matrix R;          // input_dim x num_blocks, random gate directions
    int exponent = 1;  // s >= 1; sigma_s(z) = z^s * step(z)
};

RVFLParams init_rvfl(int input_dim, int hidden_dim, const Dist& dist, std::uint32_t seed,
                     bool direct_links = false, bool bias_feature = false);

/// Feature matrix for a batch: [1 | X | sigmoid(X W + b)] with the first two
/// blocks present only when the corresponding flag is set.
Matrix expand(const RVFLParams& p, const Matrix& X);

Readout train_ridge(const Matrix& H, const Matrix& y, double lambda);

/// Binary cross-entropy + lambda*||beta||^2, minimized by full-batch gradient
/// descent with backtracking line search. y must be a single 0/1 column.
Readout train_logistic(const Matrix& H, const Matrix& y, double lambda,
                       int max_iter = 500, double tol = 1e-8);

/// ||H beta - y||^2 + lambda*||beta||_1 via proximal gradient (fixed step).
Readout train_l1(const Matrix& H, const Matrix& y, double lambda,
                 int max_iter = 5000, double tol = 1e-10);

double semi_random_gate(double z, int exponent);
SemiRandomParams init_semi_random(int input_dim, int num_blocks, int exponent,
                                  const Dist& dist, std::uint32_t seed);

/// N x (B*D) expansion; block i holds sigma_s(r_i^T x) * x per sample.
Matrix semi_random_expand(const SemiRandomParams& sp, const Matrix& X);

struct AutoencoderOptions {
    Activation activation = Activation::Tanh;
    double noise_sigma = 0.0;    // gaussian corruption of the fit input; targets stay clean
    bool sparse_readout = false; // l1 readout instead of ridge
    int l1_max_iter = 5000;
    double l1_tol = 1e-10;
};

/// Per layer: random map, readout trained to reconstruct the layer input,
/// transpose of that readout adopted as the forward weight matrix.
/// Returns the adopted matrices in order.
std::vector<Matrix> stack_autoencoders(const Matrix& X, const std::vector<int>& layer_dims,
                                       double lambda, const Dist& dist, std::uint32_t seed,
                                       const AutoencoderOptions& opts = {});

/// Forward pass through adopted weights: X_{l+1} = act(X_l A_l).
Matrix autoencoder_forward(const Matrix& X, const std::vector<Matrix>& weights,
                           Activation act = Activation::Tanh);

}  // namespace randnn::rvfl
