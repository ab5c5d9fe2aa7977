#include "randnn/types.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace randnn {

Dist Dist::uniform(double a, double b) {
    if (!(a < b)) throw std::invalid_argument("uniform distribution requires a < b");
    Dist d;
    d.kind = Kind::Uniform;
    d.a = a;
    d.b = b;
    return d;
}

Dist Dist::gaussian(double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian distribution requires sigma > 0");
    Dist d;
    d.kind = Kind::Gaussian;
    d.sigma = sigma;
    return d;
}

double Dist::sample(std::mt19937& rng) const {
    if (kind == Kind::Uniform) {
        return std::uniform_real_distribution<double>(a, b)(rng);
    }
    return std::normal_distribution<double>(0.0, sigma)(rng);
}

std::string Dist::to_string() const {
    std::ostringstream os;
    if (kind == Kind::Uniform) {
        os << "uniform(" << a << "," << b << ")";
    } else {
        os << "gaussian(" << sigma << ")";
    }
    return os.str();
}

Dist Dist::parse(const std::string& text) {
    auto open = text.find('(');
    auto close = text.rfind(')');
    if (open == std::string::npos || close == std::string::npos || close < open) {
        throw std::invalid_argument("bad distribution spec '" + text + "' (expected uniform(a,b) or gaussian(sigma))");
    }
    std::string name = text.substr(0, open);
    std::string args = text.substr(open + 1, close - open - 1);
    try {
        if (name == "uniform") {
            auto comma = args.find(',');
            if (comma == std::string::npos) throw std::invalid_argument("uniform needs two arguments");
            return uniform(std::stod(args.substr(0, comma)), std::stod(args.substr(comma + 1)));
        }
        if (name == "gaussian") {
            return gaussian(std::stod(args));
        }
    } catch (const std::invalid_argument&) {
        throw;
    } catch (const std::exception&) {
        throw std::invalid_argument("bad distribution arguments in '" + text + "'");
    }
    throw std::invalid_argument("unknown distribution '" + name + "'");
}

double activate_scalar(Activation act, double z) {
    switch (act) {
        case Activation::Tanh: return std::tanh(z);
        case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-z));
        case Activation::Identity: return z;
    }
    return z;
}

Vector activate(Activation act, const Vector& z) {
    switch (act) {
        case Activation::Tanh: return z.array().tanh();
        case Activation::Sigmoid: return 1.0 / (1.0 + (-z.array()).exp());
        case Activation::Identity: return z;
    }
    return z;
}

Matrix activate(Activation act, const Matrix& z) {
    switch (act) {
        case Activation::Tanh: return z.array().tanh();
        case Activation::Sigmoid: return 1.0 / (1.0 + (-z.array()).exp());
        case Activation::Identity: return z;
    }
    return z;
}

std::string to_string(Activation act) {
    switch (act) {
        case Activation::Tanh: return "tanh";
        case Activation::Sigmoid: return "sigmoid";
        case Activation::Identity: return "identity";
    }
    return "tanh";
}

Activation parse_activation(const std::string& text) {
    if (text == "tanh") return Activation::Tanh;
    if (text == "sigmoid") return Activation::Sigmoid;
    if (text == "identity") return Activation::Identity;
    throw std::invalid_argument("unknown activation '" + text + "'");
}

}  // namespace randnn
