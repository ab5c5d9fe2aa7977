#pragma once

#include "randnn/types.hpp"

#include <cstdint>
#include <string>

namespace randnn::reservoir {

/// Connectivity pattern of the recurrent weight matrix.
struct Topology {
    enum class Kind { Dense, Sparse, Ring, MultiRing, Chain };

    Kind kind = Kind::Dense;
    double density = 0.1;  // sparse only, fraction of nonzero entries
    int cycles = 1;        // multi_ring only

    static Topology dense();
    static Topology sparse(double density);
    static Topology ring();
    static Topology multi_ring(int cycles);
    static Topology chain();

    std::string to_string() const;
    /// Parses "dense", "sparse:0.2", "ring", "multi_ring:3", "chain".
    static Topology parse(const std::string& text);
};

/// Stability scaling applied after the raw draw: fix the spectral radius or
/// the spectral norm of the recurrent matrix to `value`.
struct Scaling {
    enum class Mode { SpectralRadius, SpectralNorm };
    Mode mode = Mode::SpectralRadius;
    double value = 0.9;

    static Scaling rho(double v);
    static Scaling norm(double v);
};

enum class RingSign { Positive, Alternating };

struct InitOptions {
    bool include_bias = false;       // off: the state update has no bias term
    RingSign ring_sign = RingSign::Positive;
};

struct ReservoirLayer {
    Matrix W;    // input_dim x units, input weights (already times input_scaling)
    Matrix W_R;  // units x units, recurrent weights (already rescaled)
    Vector bias; // units, zero unless include_bias
    Topology topology;
    Scaling scaling;
    double input_scaling = 1.0;
    Dist dist;
    std::uint32_t seed = 0;
    double achieved = 0.0;  // measured rho or norm after rescaling

    int units() const { return static_cast<int>(W_R.rows()); }
    int input_dim() const { return static_cast<int>(W.rows()); }
};

/// Driven state sequence; the first `washout` rows are excluded from readout
/// training but kept so deeper layers can be driven with the full trace.
struct StateTrace {
    Matrix states;  // T x units
    int washout = 0;

    Eigen::Index length() const { return states.rows(); }
    Matrix usable() const { return states.bottomRows(states.rows() - washout); }
};

struct ConditionReport {
    bool holds = false;
    double value = 0.0;
};

struct EspReport {
    bool converged = false;
    Vector distance_trace;  // length T+1; entry 0 is the initial-state spread
};

int default_washout(Eigen::Index T);  // min(100, T/10)

ReservoirLayer init_reservoir(int units, int input_dim, const Topology& topology,
                              const Scaling& scaling, double input_scaling, const Dist& dist,
                              std::uint32_t seed, const InitOptions& opts = {});

/// h_t = act(W^T x_t + W_R^T h_prev + bias)
Vector step(const ReservoirLayer& layer, const Vector& x_t, const Vector& h_prev,
            Activation act = Activation::Tanh);

/// Iterates `step` over the rows of `series` starting from h0 (zeros when
/// empty). washout < 0 selects the default rule.
StateTrace run(const ReservoirLayer& layer, const Matrix& series, const Vector& h0 = Vector(),
               int washout = -1, Activation act = Activation::Tanh);

/// Sufficient echo-state condition: ||W_R||_2 < 1.
ConditionReport check_sufficient(const ReservoirLayer& layer);

/// Necessary echo-state condition: rho(W_R) < 1.
ConditionReport check_necessary(const ReservoirLayer& layer);

/// Falsification test for the echo state property: drives the same input from
/// `trials` random initial states and tracks the max pairwise state distance.
EspReport check_esp_empirical(const ReservoirLayer& layer, const Matrix& series, int trials,
                              double tol, std::uint32_t seed = 0);

}  // namespace randnn::reservoir
