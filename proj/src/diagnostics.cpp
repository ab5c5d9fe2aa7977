#include "randnn/diagnostics.hpp"

#include "randnn/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace randnn::diagnostics {

namespace {

constexpr double kLogFloor = -690.77552789821368;  // log(1e-300)

double squared_correlation(const Vector& target, const Vector& pred) {
    const double n = static_cast<double>(target.size());
    const double mt = target.mean();
    const double mp = pred.mean();
    const double cov = ((target.array() - mt) * (pred.array() - mp)).sum() / n;
    const double vt = (target.array() - mt).square().sum() / n;
    const double vp = (pred.array() - mp).square().sum() / n;
    if (vt <= 0.0 || vp <= 0.0) return 0.0;
    const double r2 = (cov * cov) / (vt * vp);
    return std::min(r2, 1.0);
}

MemoryCapacityReport capacity_from_states(const Matrix& states, const Vector& input, int delays,
                                          int washout, const MemoryCapacityOptions& opts) {
    const Eigen::Index T = states.rows();
    const Eigen::Index t_start = std::max<Eigen::Index>(washout, delays);
    const Eigen::Index rows = T - t_start;
    const Eigen::Index train_rows = rows - static_cast<Eigen::Index>(std::floor(opts.holdout_fraction * rows));
    if (train_rows < 2 || rows - train_rows < 2) {
        throw std::invalid_argument("memory_capacity: not enough usable steps after washout");
    }

    const Matrix design = states.middleRows(t_start, rows);

    MemoryCapacityReport report;
    report.r2.resize(delays);
    report.dim_warning = delays >= states.cols();
    for (int k = 1; k <= delays; ++k) {
        Vector target(rows);
        for (Eigen::Index i = 0; i < rows; ++i) target(i) = input(t_start + i - k);
        const Matrix beta = linalg::ridge_solve(
            {design.topRows(train_rows), target.head(train_rows), opts.lambda});
        const Vector pred = design.bottomRows(rows - train_rows) * beta;
        report.r2(k - 1) = squared_correlation(target.tail(rows - train_rows), pred);
    }
    report.total = report.r2.sum();
    return report;
}

Vector capacity_input(int T, std::uint32_t seed, double amplitude) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-amplitude, amplitude);
    Vector input(T);
    for (int t = 0; t < T; ++t) input(t) = u(rng);
    return input;
}

void check_capacity_args(int input_dim, int delays, int T) {
    if (input_dim != 1) {
        throw std::invalid_argument("memory_capacity: the system must take scalar input");
    }
    if (delays < 1) throw std::invalid_argument("memory_capacity: delays must be >= 1");
    if (T < 20 * delays) {
        throw std::invalid_argument("memory_capacity: need T >= 20*K for a stable estimate");
    }
}

}  // namespace

MemoryCapacityReport memory_capacity(const reservoir::ReservoirLayer& layer, int delays, int T,
                                     std::uint32_t seed, const MemoryCapacityOptions& opts) {
    check_capacity_args(layer.input_dim(), delays, T);
    const Vector input = capacity_input(T, seed, opts.input_amplitude);
    int washout = opts.washout >= 0 ? opts.washout : reservoir::default_washout(T);
    const auto trace = reservoir::run(layer, input, Vector(), washout, opts.activation);
    return capacity_from_states(trace.states, input, delays, washout, opts);
}

MemoryCapacityReport memory_capacity(const deepesn::DeepReservoir& dr, int delays, int T,
                                     std::uint32_t seed, const MemoryCapacityOptions& opts) {
    if (dr.layers.empty()) throw std::invalid_argument("memory_capacity: empty reservoir");
    check_capacity_args(dr.layers[0].input_dim(), delays, T);
    const Vector input = capacity_input(T, seed, opts.input_amplitude);
    int washout = opts.washout >= 0 ? opts.washout : reservoir::default_washout(T);
    const auto traces = deepesn::deep_run(dr, input, 0, opts.activation);
    Eigen::Index width = 0;
    for (const auto& tr : traces) width += tr.states.cols();
    Matrix states(T, width);
    Eigen::Index col = 0;
    for (const auto& tr : traces) {
        states.middleCols(col, tr.states.cols()) = tr.states;
        col += tr.states.cols();
    }
    return capacity_from_states(states, input, delays, washout, opts);
}

double state_entropy(const reservoir::StateTrace& trace, double jitter) {
    const Matrix usable = trace.usable();
    const Eigen::Index m = usable.rows();
    const Eigen::Index n = usable.cols();
    if (m <= n) {
        throw std::invalid_argument("state_entropy: need more post-washout steps than state dimensions");
    }
    const Matrix centered = usable.rowwise() - usable.colwise().mean();
    const Matrix sigma = (centered.transpose() * centered) / static_cast<double>(m - 1);
    Eigen::SelfAdjointEigenSolver<Matrix> es(sigma, Eigen::EigenvaluesOnly);
    double entropy = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double ev = std::max(es.eigenvalues()(i), 0.0) + jitter;
        entropy += 0.5 * std::log(2.0 * M_PI * M_E * ev);
    }
    return entropy;
}

LyapunovReport local_lyapunov_spectrum(const reservoir::ReservoirLayer& layer, const Matrix& series,
                                       int num_exponents, int window, Activation act) {
    const Eigen::Index T = series.rows();
    const int n = layer.units();
    if (T < 1) throw std::invalid_argument("local_lyapunov_spectrum: empty series");
    if (num_exponents < 1 || num_exponents > n) {
        throw std::invalid_argument("local_lyapunov_spectrum: need 1 <= m <= units");
    }
    if (window < 1 || window > T) {
        throw std::invalid_argument("local_lyapunov_spectrum: need 1 <= window <= series length");
    }

    LyapunovReport report;
    report.window = window;

    Matrix q = Matrix::Identity(n, num_exponents);
    Vector log_sum = Vector::Zero(num_exponents);
    Vector h = Vector::Zero(n);
    int since_qr = 0;

    auto reorthonormalize = [&]() {
        Eigen::HouseholderQR<Matrix> qr(q);
        Matrix thin_q = qr.householderQ() * Matrix::Identity(n, num_exponents);
        Matrix r = qr.matrixQR().topRows(num_exponents).triangularView<Eigen::Upper>();
        for (int i = 0; i < num_exponents; ++i) {
            const double stretch = std::abs(r(i, i));
            if (stretch < 1e-300) {
                log_sum(i) += kLogFloor;
                report.floored = true;
            } else {
                log_sum(i) += std::log(stretch);
            }
        }
        q = thin_q;
    };

    for (Eigen::Index t = 0; t < T; ++t) {
        h = reservoir::step(layer, series.row(t).transpose(), h, act);
        Vector gain;
        switch (act) {
            case Activation::Tanh: gain = 1.0 - h.array().square(); break;
            case Activation::Sigmoid: gain = h.array() * (1.0 - h.array()); break;
            case Activation::Identity: gain = Vector::Ones(n); break;
        }
        q = gain.asDiagonal() * (layer.W_R.transpose() * q);
        if (++since_qr == window) {
            reorthonormalize();
            since_qr = 0;
        }
    }
    if (since_qr > 0) reorthonormalize();

    report.exponents = log_sum / static_cast<double>(T);
    std::sort(report.exponents.data(), report.exponents.data() + report.exponents.size(),
              std::greater<double>());
    return report;
}

}  // namespace randnn::diagnostics
