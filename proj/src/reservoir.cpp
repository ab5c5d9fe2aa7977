#include "randnn/reservoir.hpp"

#include "randnn/linalg.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace randnn::reservoir {

Topology Topology::dense() { return {}; }

Topology Topology::sparse(double density) {
    if (!(density > 0.0) || density > 1.0) {
        throw std::invalid_argument("sparse topology: density must be in (0,1]");
    }
    Topology t;
    t.kind = Kind::Sparse;
    t.density = density;
    return t;
}

Topology Topology::ring() {
    Topology t;
    t.kind = Kind::Ring;
    return t;
}

Topology Topology::multi_ring(int cycles) {
    if (cycles < 1) throw std::invalid_argument("multi_ring topology: cycles must be >= 1");
    Topology t;
    t.kind = Kind::MultiRing;
    t.cycles = cycles;
    return t;
}

Topology Topology::chain() {
    Topology t;
    t.kind = Kind::Chain;
    return t;
}

std::string Topology::to_string() const {
    switch (kind) {
        case Kind::Dense: return "dense";
        case Kind::Sparse: return "sparse:" + std::to_string(density);
        case Kind::Ring: return "ring";
        case Kind::MultiRing: return "multi_ring:" + std::to_string(cycles);
        case Kind::Chain: return "chain";
    }
    return "dense";
}

Topology Topology::parse(const std::string& text) {
    if (text == "dense") return dense();
    if (text == "ring") return ring();
    if (text == "chain") return chain();
    auto colon = text.find(':');
    if (colon != std::string::npos) {
        const std::string name = text.substr(0, colon);
        const std::string arg = text.substr(colon + 1);
        try {
            if (name == "sparse") return sparse(std::stod(arg));
            if (name == "multi_ring") return multi_ring(std::stoi(arg));
        } catch (const std::invalid_argument&) {
            throw;
        } catch (const std::exception&) {
            throw std::invalid_argument("bad topology argument in '" + text + "'");
        }
    }
    throw std::invalid_argument("unknown topology '" + text + "'");
}

Scaling Scaling::rho(double v) {
    if (!(v > 0.0)) throw std::invalid_argument("scaling: target value must be positive");
    return {Mode::SpectralRadius, v};
}

Scaling Scaling::norm(double v) {
    if (!(v > 0.0)) throw std::invalid_argument("scaling: target value must be positive");
    return {Mode::SpectralNorm, v};
}

int default_washout(Eigen::Index T) {
    return static_cast<int>(std::min<Eigen::Index>(100, T / 10));
}

namespace {

double cycle_weight(RingSign sign, int index) {
    return (sign == RingSign::Alternating && (index % 2) != 0) ? -1.0 : 1.0;
}

// Raw recurrent matrix before stability rescaling. Dense and sparse draw from
// uniform(-1,1); ring/multi-ring/chain use deterministic +-1 patterns.
Matrix raw_recurrent(int n, const Topology& topo, RingSign ring_sign, std::mt19937& rng) {
    Matrix w = Matrix::Zero(n, n);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> gate(0.0, 1.0);
    switch (topo.kind) {
        case Topology::Kind::Dense:
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) w(i, j) = unit(rng);
            break;
        case Topology::Kind::Sparse:
            for (int j = 0; j < n; ++j) {
                for (int i = 0; i < n; ++i) {
                    const double value = unit(rng);
                    const double keep = gate(rng);
                    if (keep < topo.density) w(i, j) = value;
                }
            }
            break;
        case Topology::Kind::Ring:
            for (int i = 0; i < n; ++i) w((i + 1) % n, i) = cycle_weight(ring_sign, i);
            break;
        case Topology::Kind::MultiRing: {
            if (topo.cycles > n) {
                throw std::invalid_argument("multi_ring topology: more cycles than units");
            }
            // contiguous segments of near-equal size, each closed into a cycle
            int start = 0;
            for (int c = 0; c < topo.cycles; ++c) {
                const int len = n / topo.cycles + (c < n % topo.cycles ? 1 : 0);
                for (int i = 0; i < len; ++i) {
                    const int from = start + i;
                    const int to = start + (i + 1) % len;
                    w(to, from) = cycle_weight(ring_sign, from);
                }
                start += len;
            }
            break;
        }
        case Topology::Kind::Chain:
            for (int i = 0; i + 1 < n; ++i) w(i + 1, i) = cycle_weight(ring_sign, i);
            break;
    }
    return w;
}

}  // namespace

ReservoirLayer init_reservoir(int units, int input_dim, const Topology& topology,
                              const Scaling& scaling, double input_scaling, const Dist& dist,
                              std::uint32_t seed, const InitOptions& opts) {
    if (units <= 0 || input_dim <= 0) {
        throw std::invalid_argument("init_reservoir: units and input_dim must be positive");
    }
    if (!(scaling.value > 0.0)) throw std::invalid_argument("init_reservoir: target must be positive");

    ReservoirLayer layer;
    layer.topology = topology;
    layer.scaling = scaling;
    layer.input_scaling = input_scaling;
    layer.dist = dist;
    layer.seed = seed;

    std::mt19937 rng(seed);
    layer.W_R = raw_recurrent(units, topology, opts.ring_sign, rng);

    const double raw = (scaling.mode == Scaling::Mode::SpectralRadius)
                           ? linalg::spectral_radius(layer.W_R)
                           : linalg::spectral_norm(layer.W_R);
    if (scaling.mode == Scaling::Mode::SpectralRadius &&
        raw <= 1e-12 * std::max(1.0, layer.W_R.norm())) {
        throw std::runtime_error(
            "init_reservoir: raw spectral radius is zero (nilpotent pattern); "
            "spectral-radius scaling is impossible, use norm mode instead");
    }
    if (raw <= 0.0) {
        throw std::runtime_error("init_reservoir: raw recurrent matrix is zero; cannot rescale");
    }
    layer.W_R *= scaling.value / raw;
    layer.achieved = (scaling.mode == Scaling::Mode::SpectralRadius)
                         ? linalg::spectral_radius(layer.W_R)
                         : linalg::spectral_norm(layer.W_R);

    layer.W.resize(input_dim, units);
    for (int j = 0; j < units; ++j)
        for (int i = 0; i < input_dim; ++i) layer.W(i, j) = dist.sample(rng) * input_scaling;

    layer.bias = Vector::Zero(units);
    if (opts.include_bias) {
        for (int j = 0; j < units; ++j) layer.bias(j) = dist.sample(rng);
    }
    return layer;
}

Vector step(const ReservoirLayer& layer, const Vector& x_t, const Vector& h_prev, Activation act) {
    if (x_t.size() != layer.W.rows()) {
        throw std::invalid_argument("step: input has size " + std::to_string(x_t.size()) +
                                    ", expected " + std::to_string(layer.W.rows()));
    }
    if (h_prev.size() != layer.W_R.rows()) {
        throw std::invalid_argument("step: state has size " + std::to_string(h_prev.size()) +
                                    ", expected " + std::to_string(layer.W_R.rows()));
    }
    return activate(act, Vector(layer.W.transpose() * x_t + layer.W_R.transpose() * h_prev + layer.bias));
}

StateTrace run(const ReservoirLayer& layer, const Matrix& series, const Vector& h0, int washout,
               Activation act) {
    const Eigen::Index T = series.rows();
    if (T == 0) throw std::invalid_argument("run: empty input series");
    if (washout < 0) washout = default_washout(T);
    if (washout >= T) throw std::invalid_argument("run: washout must be smaller than the series length");

    Vector h = h0.size() == 0 ? Vector(Vector::Zero(layer.units())) : h0;
    StateTrace trace;
    trace.washout = washout;
    trace.states.resize(T, layer.units());
    for (Eigen::Index t = 0; t < T; ++t) {
        h = step(layer, series.row(t).transpose(), h, act);
        trace.states.row(t) = h.transpose();
    }
    return trace;
}

ConditionReport check_sufficient(const ReservoirLayer& layer) {
    const double value = linalg::spectral_norm(layer.W_R);
    return {value < 1.0, value};
}

ConditionReport check_necessary(const ReservoirLayer& layer) {
    const double value = linalg::spectral_radius(layer.W_R);
    return {value < 1.0, value};
}

EspReport check_esp_empirical(const ReservoirLayer& layer, const Matrix& series, int trials,
                              double tol, std::uint32_t seed) {
    if (trials < 2) throw std::invalid_argument("check_esp_empirical: need at least 2 trials");
    const Eigen::Index T = series.rows();
    if (T == 0) throw std::invalid_argument("check_esp_empirical: empty input series");

    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<Vector> states(trials);
    for (int k = 0; k < trials; ++k) {
        states[k].resize(layer.units());
        for (int i = 0; i < layer.units(); ++i) states[k](i) = unit(rng);
    }

    auto max_pairwise = [&]() {
        double d = 0.0;
        for (int a = 0; a < trials; ++a)
            for (int b = a + 1; b < trials; ++b) d = std::max(d, (states[a] - states[b]).norm());
        return d;
    };

    EspReport report;
    report.distance_trace.resize(T + 1);
    report.distance_trace(0) = max_pairwise();
    for (Eigen::Index t = 0; t < T; ++t) {
        for (int k = 0; k < trials; ++k) {
            states[k] = step(layer, series.row(t).transpose(), states[k]);
        }
        report.distance_trace(t + 1) = max_pairwise();
    }
    report.converged = report.distance_trace(T) < tol;
    return report;
}

}  // namespace randnn::reservoir
