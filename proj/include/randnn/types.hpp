#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string>

namespace randnn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Distribution spec for random weight draws. All initializers in the
/// library draw through this, so a (spec, seed) pair pins the weights.
struct Dist {
    enum class Kind { Uniform, Gaussian };

    Kind kind = Kind::Uniform;
    double a = -1.0;     // uniform lower bound
    double b = 1.0;      // uniform upper bound
    double sigma = 1.0;  // gaussian std deviation (zero mean)

    static Dist uniform(double a, double b);
    static Dist gaussian(double sigma);

    double sample(std::mt19937& rng) const;

    std::string to_string() const;
    /// Parses "uniform(a,b)" or "gaussian(sigma)".
    static Dist parse(const std::string& text);
};

enum class Activation { Tanh, Sigmoid, Identity };

double activate_scalar(Activation act, double z);
Vector activate(Activation act, const Vector& z);
Matrix activate(Activation act, const Matrix& z);

std::string to_string(Activation act);
Activation parse_activation(const std::string& text);

}  // namespace randnn
