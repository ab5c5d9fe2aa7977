#include "randnn/deepesn.hpp"

#include "randnn/linalg.hpp"

#include <fftw3.h>

#include <cmath>
#include <stdexcept>
#include <string>

namespace randnn::deepesn {

std::string to_string(ReadoutMode mode) {
    return mode == ReadoutMode::AllLayers ? "all_layers" : "last_layer";
}

ReadoutMode parse_readout_mode(const std::string& text) {
    if (text == "all_layers") return ReadoutMode::AllLayers;
    if (text == "last_layer") return ReadoutMode::LastLayer;
    throw std::invalid_argument("unknown readout mode '" + text + "'");
}

DeepReservoir init_deep(const std::vector<int>& layer_sizes, const std::vector<double>& per_layer_rho,
                        double inter_layer_scaling, int input_dim, const Dist& dist,
                        std::uint32_t seed, const DeepInitOptions& opts) {
    if (layer_sizes.empty()) throw std::invalid_argument("init_deep: no layers requested");
    if (layer_sizes.size() != per_layer_rho.size()) {
        throw std::invalid_argument("init_deep: layer_sizes and per_layer_rho differ in length");
    }
    DeepReservoir dr;
    dr.inter_layer_scaling = inter_layer_scaling;
    dr.layers.reserve(layer_sizes.size());
    int prev_dim = input_dim;
    for (std::size_t l = 0; l < layer_sizes.size(); ++l) {
        const double scale = (l == 0) ? opts.input_scaling : inter_layer_scaling;
        const reservoir::Scaling scaling{opts.scaling_mode, per_layer_rho[l]};
        dr.layers.push_back(reservoir::init_reservoir(
            layer_sizes[l], prev_dim, opts.topology, scaling, scale, dist,
            seed + static_cast<std::uint32_t>(l), opts.layer_options));
        prev_dim = layer_sizes[l];
    }
    return dr;
}

DeepState zero_state(const DeepReservoir& dr) {
    DeepState s(dr.layers.size());
    for (std::size_t l = 0; l < dr.layers.size(); ++l) s[l] = Vector::Zero(dr.layers[l].units());
    return s;
}

DeepState deep_step(const DeepReservoir& dr, const Vector& x_t, const DeepState& prev, Activation act) {
    if (prev.size() != dr.layers.size()) {
        throw std::invalid_argument("deep_step: state has wrong number of layers");
    }
    DeepState next(dr.layers.size());
    next[0] = reservoir::step(dr.layers[0], x_t, prev[0], act);
    for (std::size_t l = 1; l < dr.layers.size(); ++l) {
        next[l] = reservoir::step(dr.layers[l], next[l - 1], prev[l], act);
    }
    return next;
}

std::vector<reservoir::StateTrace> deep_run(const DeepReservoir& dr, const Matrix& series,
                                            int washout, Activation act) {
    const Eigen::Index T = series.rows();
    if (T == 0) throw std::invalid_argument("deep_run: empty input series");
    if (washout < 0) washout = reservoir::default_washout(T);
    if (washout >= T) throw std::invalid_argument("deep_run: washout must be smaller than the series length");

    std::vector<reservoir::StateTrace> traces(dr.layers.size());
    for (std::size_t l = 0; l < dr.layers.size(); ++l) {
        traces[l].washout = washout;
        traces[l].states.resize(T, dr.layers[l].units());
    }
    DeepState h = zero_state(dr);
    for (Eigen::Index t = 0; t < T; ++t) {
        h = deep_step(dr, series.row(t).transpose(), h, act);
        for (std::size_t l = 0; l < dr.layers.size(); ++l) traces[l].states.row(t) = h[l].transpose();
    }
    return traces;
}

reservoir::ConditionReport check_deep_sufficient(const DeepReservoir& dr) {
    const int L = dr.depth();
    std::vector<double> rec_norm(L), in_norm(L);
    for (int l = 0; l < L; ++l) {
        rec_norm[l] = linalg::spectral_norm(dr.layers[l].W_R);
        in_norm[l] = linalg::spectral_norm(dr.layers[l].W);
    }
    double value = 0.0;
    for (int k = 1; k <= L; ++k) {
        double sum = 0.0;
        for (int i = 1; i <= k; ++i) {
            double prod = 1.0;
            for (int j = i + 1; j <= k; ++j) prod *= in_norm[j - 1];
            sum += rec_norm[i - 1] * prod;
        }
        value = std::max(value, sum);
    }
    return {value < 1.0, value};
}

reservoir::ConditionReport check_deep_necessary(const DeepReservoir& dr) {
    double value = 0.0;
    for (const auto& layer : dr.layers) value = std::max(value, linalg::spectral_radius(layer.W_R));
    return {value < 1.0, value};
}

Matrix collect_features(const std::vector<reservoir::StateTrace>& traces, ReadoutMode mode) {
    if (traces.empty()) throw std::invalid_argument("collect_features: no traces");
    const Eigen::Index T = traces.front().length();
    const int washout = traces.front().washout;
    for (const auto& tr : traces) {
        if (tr.length() != T || tr.washout != washout) {
            throw std::invalid_argument("collect_features: traces disagree on length or washout");
        }
    }
    const Eigen::Index rows = T - washout;
    if (mode == ReadoutMode::LastLayer) return traces.back().usable();
    Eigen::Index width = 0;
    for (const auto& tr : traces) width += tr.states.cols();
    Matrix out(rows, width);
    Eigen::Index col = 0;
    for (const auto& tr : traces) {
        out.middleCols(col, tr.states.cols()) = tr.usable();
        col += tr.states.cols();
    }
    return out;
}

std::vector<int> perturbation_duration(const DeepReservoir& dr, const Matrix& series, int t0,
                                       const Vector& delta, double threshold) {
    const Eigen::Index T = series.rows();
    if (t0 < 0 || t0 >= T) throw std::invalid_argument("perturbation_duration: t0 out of range");
    if (delta.size() != series.cols()) {
        throw std::invalid_argument("perturbation_duration: delta has wrong dimension");
    }
    Matrix perturbed = series;
    perturbed.row(t0) += delta.transpose();

    const auto base = deep_run(dr, series, 0);
    const auto pert = deep_run(dr, perturbed, 0);

    std::vector<int> durations(dr.depth(), 0);
    for (int l = 0; l < dr.depth(); ++l) {
        int last = t0;
        for (Eigen::Index t = t0; t < T; ++t) {
            const double dist = (base[l].states.row(t) - pert[l].states.row(t)).norm();
            if (dist > threshold) last = static_cast<int>(t);
        }
        durations[l] = last - t0;
    }
    return durations;
}

namespace {

FrequencyProfile profile_of_trace(const reservoir::StateTrace& trace) {
    const Matrix usable = trace.usable();
    const Eigen::Index T = usable.rows();
    if (T < 16) throw std::invalid_argument("layer_frequency_profile: need at least 16 post-washout steps");
    const Eigen::Index n_units = usable.cols();
    const Eigen::Index n_bins = T / 2 + 1;

    std::vector<double> in(static_cast<std::size_t>(T));
    std::vector<fftw_complex> out(static_cast<std::size_t>(n_bins));
    fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(T), in.data(), out.data(), FFTW_ESTIMATE);

    Vector accum = Vector::Zero(n_bins);
    for (Eigen::Index u = 0; u < n_units; ++u) {
        const double mean = usable.col(u).mean();
        for (Eigen::Index t = 0; t < T; ++t) in[static_cast<std::size_t>(t)] = usable(t, u) - mean;
        fftw_execute(plan);
        for (Eigen::Index k = 0; k < n_bins; ++k) {
            accum(k) += std::hypot(out[static_cast<std::size_t>(k)][0], out[static_cast<std::size_t>(k)][1]);
        }
    }
    fftw_destroy_plan(plan);

    FrequencyProfile profile;
    accum /= static_cast<double>(n_units);
    const double total = accum.sum();
    // relative to the raw signal scale: constant states leave only rounding residue
    const double floor = 1e-12 * static_cast<double>(T) * usable.cwiseAbs().maxCoeff();
    if (total <= std::max(floor, 1e-300)) {
        profile.spectrum = Vector::Zero(n_bins);
        profile.degenerate = true;
    } else {
        profile.spectrum = accum / total;
    }
    return profile;
}

}  // namespace

std::vector<FrequencyProfile> layer_frequency_profile(const std::vector<reservoir::StateTrace>& traces) {
    std::vector<FrequencyProfile> profiles;
    profiles.reserve(traces.size());
    for (const auto& tr : traces) profiles.push_back(profile_of_trace(tr));
    return profiles;
}

reservoir::EspReport check_esp_empirical(const DeepReservoir& dr, const Matrix& series, int trials,
                                         double tol, std::uint32_t seed) {
    if (trials < 2) throw std::invalid_argument("check_esp_empirical: need at least 2 trials");
    const Eigen::Index T = series.rows();
    if (T == 0) throw std::invalid_argument("check_esp_empirical: empty input series");

    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<DeepState> states(trials);
    for (int k = 0; k < trials; ++k) {
        states[k] = zero_state(dr);
        for (auto& h : states[k])
            for (Eigen::Index i = 0; i < h.size(); ++i) h(i) = unit(rng);
    }

    auto max_pairwise = [&]() {
        double d = 0.0;
        for (int a = 0; a < trials; ++a) {
            for (int b = a + 1; b < trials; ++b) {
                double sq = 0.0;
                for (std::size_t l = 0; l < dr.layers.size(); ++l) {
                    sq += (states[a][l] - states[b][l]).squaredNorm();
                }
                d = std::max(d, std::sqrt(sq));
            }
        }
        return d;
    };

    reservoir::EspReport report;
    report.distance_trace.resize(T + 1);
    report.distance_trace(0) = max_pairwise();
    for (Eigen::Index t = 0; t < T; ++t) {
        for (int k = 0; k < trials; ++k) states[k] = deep_step(dr, series.row(t).transpose(), states[k]);
        report.distance_trace(t + 1) = max_pairwise();
    }
    report.converged = report.distance_trace(T) < tol;
    return report;
}

double profile_distance(const FrequencyProfile& a, const FrequencyProfile& b) {
    if (a.spectrum.size() != b.spectrum.size()) {
        throw std::invalid_argument("profile_distance: spectra have different lengths");
    }
    return 0.5 * (a.spectrum - b.spectrum).cwiseAbs().sum();
}

AutoDepthReport auto_depth(const Matrix& series, const LayerTemplate& tmpl, int max_depth,
                           double epsilon) {
    if (max_depth < 1) throw std::invalid_argument("auto_depth: max_depth must be >= 1");
    int washout = tmpl.washout;
    if (washout < 0) washout = reservoir::default_washout(series.rows());

    AutoDepthReport report;
    auto layer = reservoir::init_reservoir(tmpl.units, static_cast<int>(series.cols()), tmpl.topology,
                                           reservoir::Scaling::rho(tmpl.rho), tmpl.input_scaling,
                                           tmpl.dist, tmpl.seed);
    reservoir::StateTrace trace = reservoir::run(layer, series, Vector(), washout);
    FrequencyProfile prev = layer_frequency_profile({trace})[0];

    for (int l = 2; l <= max_depth; ++l) {
        layer = reservoir::init_reservoir(tmpl.units, tmpl.units, tmpl.topology,
                                          reservoir::Scaling::rho(tmpl.rho), tmpl.inter_layer_scaling,
                                          tmpl.dist, tmpl.seed + static_cast<std::uint32_t>(l - 1));
        trace = reservoir::run(layer, trace.states, Vector(), washout);
        FrequencyProfile cur = layer_frequency_profile({trace})[0];
        const double dist = profile_distance(cur, prev);
        report.distances.push_back(dist);
        if (dist < epsilon) {
            report.depth = l - 1;
            return report;
        }
        prev = cur;
    }
    report.depth = max_depth;
    return report;
}

}  // namespace randnn::deepesn
