#pragma once

#include "randnn/reservoir.hpp"

#include <cstdint>
#include <vector>

namespace randnn::deepesn {

/// Stack of reservoirs; layer l is driven by layer l-1's state at the same
/// time step, layer 1 by the external input.
struct DeepReservoir {
    std::vector<reservoir::ReservoirLayer> layers;
    double inter_layer_scaling = 1.0;

    int depth() const { return static_cast<int>(layers.size()); }
};

using DeepState = std::vector<Vector>;  // one state vector per layer

enum class ReadoutMode { AllLayers, LastLayer };

std::string to_string(ReadoutMode mode);
ReadoutMode parse_readout_mode(const std::string& text);

struct DeepInitOptions {
    reservoir::Topology topology = reservoir::Topology::dense();
    double input_scaling = 1.0;
    reservoir::InitOptions layer_options;
    /// Interpret the per-layer targets as spectral-norm targets instead.
    reservoir::Scaling::Mode scaling_mode = reservoir::Scaling::Mode::SpectralRadius;
};

/// Layer l (0-based) draws with seed+l, so depth-1 stacks reproduce a shallow
/// reservoir with the same seed exactly.
DeepReservoir init_deep(const std::vector<int>& layer_sizes, const std::vector<double>& per_layer_rho,
                        double inter_layer_scaling, int input_dim, const Dist& dist,
                        std::uint32_t seed, const DeepInitOptions& opts = {});

DeepState zero_state(const DeepReservoir& dr);

/// h^1(t) = act(W^1T x(t) + W_R^1T h^1(t-1));
/// h^l(t) = act(W^lT h^{l-1}(t) + W_R^lT h^l(t-1)) for l > 1.
DeepState deep_step(const DeepReservoir& dr, const Vector& x_t, const DeepState& prev,
                    Activation act = Activation::Tanh);

std::vector<reservoir::StateTrace> deep_run(const DeepReservoir& dr, const Matrix& series,
                                            int washout = -1, Activation act = Activation::Tanh);

/// max over k of sum_{i<=k} ||W_R^i|| * prod_{j=i+1..k} ||W^j|| < 1
/// (empty product = 1, so depth 1 reduces to the shallow condition).
reservoir::ConditionReport check_deep_sufficient(const DeepReservoir& dr);

/// max over layers of rho(W_R^l) < 1.
reservoir::ConditionReport check_deep_necessary(const DeepReservoir& dr);

/// Per-time-step feature rows, washout excluded. AllLayers concatenates the
/// layer states in layer order; LastLayer keeps only the top of the stack.
Matrix collect_features(const std::vector<reservoir::StateTrace>& traces, ReadoutMode mode);

/// Runs the same input with and without a perturbation added at step t0 and
/// reports, per layer, how long the state difference stays above `threshold`.
std::vector<int> perturbation_duration(const DeepReservoir& dr, const Matrix& series, int t0,
                                       const Vector& delta, double threshold);

struct FrequencyProfile {
    Vector spectrum;         // one-sided magnitude spectrum, normalized to sum 1
    bool degenerate = false; // constant states: nothing left after centering
};

/// Per layer: magnitude FFT of each unit's mean-centered post-washout signal,
/// averaged over units and normalized to a probability vector.
std::vector<FrequencyProfile> layer_frequency_profile(const std::vector<reservoir::StateTrace>& traces);

/// Total-variation distance between two normalized spectra.
double profile_distance(const FrequencyProfile& a, const FrequencyProfile& b);

/// Echo-state falsification for the whole stack: drives the same input from
/// random initial deep states and tracks the max pairwise distance of the
/// concatenated (flattened) state vectors.
reservoir::EspReport check_esp_empirical(const DeepReservoir& dr, const Matrix& series, int trials,
                                         double tol, std::uint32_t seed = 0);

struct LayerTemplate {
    int units = 100;
    double rho = 0.9;
    double input_scaling = 1.0;
    double inter_layer_scaling = 1.0;
    reservoir::Topology topology = reservoir::Topology::dense();
    Dist dist;
    std::uint32_t seed = 0;
    int washout = -1;
};

struct AutoDepthReport {
    int depth = 1;
    std::vector<double> distances;  // profile distance added by layer 2, 3, ...
};

/// Grows the stack one layer at a time and stops once the new layer's
/// frequency profile is within epsilon (total variation) of the previous one.
AutoDepthReport auto_depth(const Matrix& series, const LayerTemplate& tmpl, int max_depth,
                           double epsilon);

}  // namespace randnn::deepesn
