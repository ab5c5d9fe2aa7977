#pragma once

#include "randnn/reservoir.hpp"
#include "randnn/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace randnn::config {

/// Fully resolved experiment description. Every CLI run prints this back so a
/// result can be reproduced from the log alone. Unknown keys are rejected.
struct ExperimentConfig {
    // model selection
    std::string model = "esn";  // rvfl | deep_rvfl | esn | deepesn | tree | graph

    // input width; 0 means "infer from the dataset"
    int input_dim = 0;

    // feed-forward architecture
    int hidden_dim = 100;
    bool direct_links = false;
    bool bias_feature = true;

    // reservoir architecture
    std::vector<int> layer_dims = {100};
    reservoir::Topology topology = reservoir::Topology::dense();
    std::string scaling_mode = "rho";  // rho | norm
    double rho = 0.9;
    std::vector<double> per_layer_rho;  // empty: broadcast `rho`
    double input_scaling = 1.0;
    double inter_layer_scaling = 1.0;
    bool reservoir_bias = false;
    std::string ring_sign = "positive";  // positive | alternating

    // weights
    Dist dist = Dist::uniform(-1.0, 1.0);
    std::uint32_t seed = 0;
    bool store_weights = true;

    // readout
    std::vector<double> lambda_grid = {1e-6, 1e-4, 1e-2, 1.0};
    std::string loss = "squared";  // squared | logistic | l1
    std::string readout_mode = "all_layers";
    int max_iter = 2000;
    double tol = 1e-8;

    // task
    int washout = -1;  // negative: default rule min(100, T/10)
    std::vector<double> split = {0.6, 0.2, 0.2};
    bool fail_on_unstable = false;

    // diagnostics
    int mc_delays = 40;
    int mc_T = 4000;
    bool mc_linear = false;
    int esp_trials = 5;
    double esp_tol = 1e-6;
    int lyapunov_exponents = 3;
    double perturb_delta = 1.0;
    double perturb_threshold = 1e-10;
    int max_depth = 8;
    double depth_epsilon = 0.01;

    // structures
    std::string pool = "mean";  // root | mean | sum
    bool degree_normalization = false;
    double graph_tol = 1e-9;
    int graph_max_iter = 200;

    // stacked autoencoders (deep_rvfl)
    std::string ae_activation = "tanh";
    double ae_noise_sigma = 0.0;
    bool ae_sparse_readout = false;
    double ae_lambda = 1e-6;
};

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin);
ExperimentConfig load_config(const std::string& path);

/// Applies one "key = value" assignment (used by config files and sweeps).
void apply_key(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Canonical "key = value" dump of every field; parses back to an equal config.
std::string resolved_text(const ExperimentConfig& cfg);

/// Cross-field checks (model kind known, split fractions sane, ...).
void validate(const ExperimentConfig& cfg);

/// Per-layer spectral-radius targets with `rho` broadcast when unset.
std::vector<double> layer_rho_targets(const ExperimentConfig& cfg);

}  // namespace randnn::config
