#pragma once

#include "randnn/deepesn.hpp"

#include <cstdint>

namespace randnn::diagnostics {

struct MemoryCapacityOptions {
    double lambda = 1e-8;                    // ridge strength for the delay readouts
    Activation activation = Activation::Tanh; // Identity gives the linear-capacity setting
    double input_amplitude = 0.8;             // input drawn from uniform(-a, a)
    int washout = -1;                         // default rule when negative
    double holdout_fraction = 0.3;            // r^2 measured on the trailing split
};

struct MemoryCapacityReport {
    Vector r2;                // squared correlation per delay, k = 1..K
    double total = 0.0;       // MC = sum of r2
    bool dim_warning = false; // K >= state dimension: the capacity bound binds
};

/// Drives the system with an i.i.d. scalar input and measures, per delay k,
/// how well a ridge readout reconstructs x(t-k) on held-out steps.
MemoryCapacityReport memory_capacity(const reservoir::ReservoirLayer& layer, int delays, int T,
                                     std::uint32_t seed, const MemoryCapacityOptions& opts = {});
MemoryCapacityReport memory_capacity(const deepesn::DeepReservoir& dr, int delays, int T,
                                     std::uint32_t seed, const MemoryCapacityOptions& opts = {});

/// Differential entropy of the Gaussian fit to the post-washout states:
/// 0.5 * log det(2*pi*e*(Sigma + jitter*I)).
double state_entropy(const reservoir::StateTrace& trace, double jitter = 1e-12);

struct LyapunovReport {
    Vector exponents;  // sorted descending
    int window = 1;
    bool floored = false;  // a stretch factor collapsed to zero (nilpotent Jacobian)
};

/// Local Lyapunov spectrum along the driven trajectory: propagates a tangent
/// frame through J(t) = diag(1 - h(t)^2) W_R^T with periodic QR
/// re-orthonormalization; exponents are time-averaged log stretch factors.
LyapunovReport local_lyapunov_spectrum(const reservoir::ReservoirLayer& layer, const Matrix& series,
                                       int num_exponents, int window = 1,
                                       Activation act = Activation::Tanh);

}  // namespace randnn::diagnostics
