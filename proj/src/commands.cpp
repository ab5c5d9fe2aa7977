#include "randnn/commands.hpp"

#include "randnn/linalg.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace randnn::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_reservoir_kind(const std::string& model) {
    return model == "esn" || model == "deepesn" || model == "tree" || model == "graph";
}

bool is_structural_kind(const std::string& model) { return model == "tree" || model == "graph"; }

reservoir::InitOptions layer_options_from(const config::ExperimentConfig& cfg) {
    reservoir::InitOptions opts;
    opts.include_bias = cfg.reservoir_bias;
    opts.ring_sign = cfg.ring_sign == "alternating" ? reservoir::RingSign::Alternating
                                                    : reservoir::RingSign::Positive;
    return opts;
}

deepesn::DeepInitOptions deep_options_from(const config::ExperimentConfig& cfg) {
    deepesn::DeepInitOptions opts;
    opts.topology = cfg.topology;
    opts.input_scaling = cfg.input_scaling;
    opts.layer_options = layer_options_from(cfg);
    opts.scaling_mode = cfg.scaling_mode == "norm" ? reservoir::Scaling::Mode::SpectralNorm
                                                   : reservoir::Scaling::Mode::SpectralRadius;
    return opts;
}

rvfl::AutoencoderOptions ae_options_from(const config::ExperimentConfig& cfg) {
    rvfl::AutoencoderOptions opts;
    opts.activation = parse_activation(cfg.ae_activation);
    opts.noise_sigma = cfg.ae_noise_sigma;
    opts.sparse_readout = cfg.ae_sparse_readout;
    opts.l1_max_iter = cfg.max_iter;
    opts.l1_tol = cfg.tol;
    return opts;
}

int resolve_washout(const config::ExperimentConfig& cfg, Eigen::Index T) {
    return cfg.washout >= 0 ? cfg.washout : reservoir::default_washout(T);
}

Matrix structure_labels(const Dataset& data) {
    Eigen::Index dim = -1;
    for (const auto& rec : data.structures) {
        if (!rec.label) return Matrix(data.structures.size(), 0);
        if (dim < 0) dim = rec.label->size();
        if (rec.label->size() != dim) {
            throw std::invalid_argument("structure labels have inconsistent dimensions");
        }
    }
    Matrix labels(data.structures.size(), dim);
    for (std::size_t i = 0; i < data.structures.size(); ++i) {
        labels.row(i) = data.structures[i].label->transpose();
    }
    return labels;
}

struct SplitSizes {
    Eigen::Index train = 0, val = 0, test = 0;
};

SplitSizes split_rows(Eigen::Index n, const std::vector<double>& fractions) {
    SplitSizes s;
    s.train = static_cast<Eigen::Index>(std::floor(fractions[0] * static_cast<double>(n)));
    s.val = static_cast<Eigen::Index>(std::floor(fractions[1] * static_cast<double>(n)));
    s.test = n - s.train - s.val;
    if (s.train < 1) throw std::invalid_argument("training split is empty; need more data rows");
    return s;
}

rvfl::Readout fit_readout(const config::ExperimentConfig& cfg, const Matrix& H, const Matrix& y,
                          double lambda) {
    if (cfg.loss == "logistic") return rvfl::train_logistic(H, y, lambda, cfg.max_iter, cfg.tol);
    if (cfg.loss == "l1") return rvfl::train_l1(H, y, lambda, cfg.max_iter, cfg.tol);
    return rvfl::train_ridge(H, y, lambda);
}

double csv_safe(double v) { return std::isfinite(v) ? v : kNaN; }

std::string csv_quote(const std::string& s) {
    if (s.find(',') == std::string::npos && s.find('"') == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace

Dataset load_dataset(const config::ExperimentConfig& cfg, const std::string& path) {
    Dataset data;
    if (is_structural_kind(cfg.model)) {
        data.structures = dataset::load_structures(path);
        const bool want_tree = cfg.model == "tree";
        for (const auto& rec : data.structures) {
            if (rec.is_tree() != want_tree) {
                throw std::invalid_argument(path + ": dataset mixes structure kinds or does not match model '" +
                                            cfg.model + "'");
            }
        }
    } else {
        data.series = dataset::load_timeseries(path);
    }
    return data;
}

Model build_model(const config::ExperimentConfig& cfg, int input_dim) {
    config::ExperimentConfig resolved = cfg;
    if (resolved.input_dim == 0) resolved.input_dim = input_dim;
    if (resolved.input_dim <= 0) throw std::invalid_argument("cannot resolve the model input dimension");
    if (input_dim > 0 && resolved.input_dim != input_dim) {
        throw std::invalid_argument("config input_dim " + std::to_string(resolved.input_dim) +
                                    " does not match the dataset width " + std::to_string(input_dim));
    }
    config::validate(resolved);

    Model model;
    model.config = resolved;
    if (resolved.model == "rvfl") {
        model.feedforward = rvfl::init_rvfl(resolved.input_dim, resolved.hidden_dim, resolved.dist,
                                            resolved.seed, resolved.direct_links, resolved.bias_feature);
    } else if (resolved.model == "deep_rvfl") {
        // adopted weights are data-dependent; fitted in compute_features
    } else {
        if (resolved.model == "esn" && resolved.layer_dims.size() != 1) {
            throw std::invalid_argument("model 'esn' takes exactly one layer; use 'deepesn' for stacks");
        }
        model.reservoir = deepesn::init_deep(resolved.layer_dims, config::layer_rho_targets(resolved),
                                             resolved.inter_layer_scaling, resolved.input_dim,
                                             resolved.dist, resolved.seed, deep_options_from(resolved));
    }
    return model;
}

FeatureBundle compute_features(Model& model, const Dataset& data, Eigen::Index fit_rows) {
    const auto& cfg = model.config;
    FeatureBundle out;

    if (is_structural_kind(cfg.model)) {
        if (data.structures.empty()) throw std::invalid_argument("model '" + cfg.model + "' needs structure data");
        const auto select = deepesn::parse_readout_mode(cfg.readout_mode);
        const auto mode = structures::parse_pool_mode(cfg.pool);
        structures::GraphEmbedOptions gopts;
        gopts.tol = cfg.graph_tol;
        gopts.max_iter = cfg.graph_max_iter;
        gopts.degree_normalization = cfg.degree_normalization;

        std::vector<Vector> rows;
        rows.reserve(data.structures.size());
        for (const auto& rec : data.structures) {
            structures::StructEmbedding emb;
            if (rec.is_tree()) {
                emb = structures::tree_embed(*model.reservoir, std::get<structures::TreeData>(rec.data));
            } else {
                emb = structures::graph_embed(*model.reservoir, std::get<structures::GraphData>(rec.data), gopts);
                if (emb.contraction_warning) out.contraction_warning = true;
            }
            rows.push_back(structures::pool(emb, mode, select));
        }
        out.features.resize(rows.size(), rows.front().size());
        for (std::size_t i = 0; i < rows.size(); ++i) out.features.row(i) = rows[i].transpose();
        out.targets = structure_labels(data);
        return out;
    }

    if (!data.series) throw std::invalid_argument("model '" + cfg.model + "' needs time-series data");
    const Matrix& X = data.series->inputs;

    if (cfg.model == "rvfl") {
        out.features = rvfl::expand(*model.feedforward, X);
        out.targets = data.series->targets;
        return out;
    }
    if (cfg.model == "deep_rvfl") {
        if (model.adopted.empty()) {
            const Eigen::Index n_fit = fit_rows < 0 ? X.rows() : std::min(fit_rows, X.rows());
            model.adopted = rvfl::stack_autoencoders(X.topRows(n_fit), cfg.layer_dims, cfg.ae_lambda,
                                                     cfg.dist, cfg.seed, ae_options_from(cfg));
        }
        out.features = rvfl::autoencoder_forward(X, model.adopted, parse_activation(cfg.ae_activation));
        out.targets = data.series->targets;
        return out;
    }

    const int washout = resolve_washout(cfg, X.rows());
    const auto traces = deepesn::deep_run(*model.reservoir, X, washout);
    out.features = deepesn::collect_features(traces, deepesn::parse_readout_mode(cfg.readout_mode));
    if (data.series->has_targets()) {
        out.targets = data.series->targets.bottomRows(X.rows() - washout);
    } else {
        out.targets = Matrix(out.features.rows(), 0);
    }
    return out;
}

Matrix predict_features(const Model& model, const Matrix& features) {
    if (!model.readout) throw std::invalid_argument("model has no trained readout");
    Matrix scores = features * model.readout->beta;
    if (model.readout->loss == rvfl::LossKind::Logistic) {
        return activate(Activation::Sigmoid, scores);
    }
    return scores;
}

Matrix predict(const Model& model, const Dataset& data) {
    Model scratch = model;  // compute_features may fit deep_rvfl stacks; predictions never should
    if (scratch.config.model == "deep_rvfl" && scratch.adopted.empty()) {
        throw std::invalid_argument("deep_rvfl model has no adopted weights; train it first");
    }
    const FeatureBundle bundle = compute_features(scratch, data);
    return predict_features(model, bundle.features);
}

Metrics evaluate_metrics(const Matrix& predictions, const Matrix& targets, const std::string& loss) {
    if (predictions.rows() != targets.rows() || predictions.cols() != targets.cols()) {
        throw std::invalid_argument("metrics: prediction/target shape mismatch");
    }
    if (targets.size() == 0) throw std::invalid_argument("metrics: empty targets");

    Metrics m;
    m.mse = (predictions - targets).squaredNorm() / static_cast<double>(targets.size());

    double r2_sum = 0.0;
    for (Eigen::Index c = 0; c < targets.cols(); ++c) {
        const Vector t = targets.col(c);
        const Vector p = predictions.col(c);
        const double mt = t.mean(), mp = p.mean();
        const double cov = ((t.array() - mt) * (p.array() - mp)).sum();
        const double vt = (t.array() - mt).square().sum();
        const double vp = (p.array() - mp).square().sum();
        r2_sum += (vt > 0.0 && vp > 0.0) ? (cov * cov) / (vt * vp) : 0.0;
    }
    m.r2 = r2_sum / static_cast<double>(targets.cols());

    if (loss == "logistic") {
        Eigen::Index hits = 0;
        for (Eigen::Index i = 0; i < targets.rows(); ++i) {
            hits += ((predictions(i, 0) > 0.5) == (targets(i, 0) > 0.5)) ? 1 : 0;
        }
        m.accuracy = static_cast<double>(hits) / static_cast<double>(targets.rows());
    } else {
        m.accuracy = kNaN;
    }
    return m;
}

TrainReport cmd_train(const config::ExperimentConfig& cfg, const Dataset& data) {
    const int input_dim = data.is_structural()
                              ? static_cast<int>(data.structures.front().is_tree()
                                                     ? std::get<structures::TreeData>(data.structures.front().data).labels.cols()
                                                     : std::get<structures::GraphData>(data.structures.front().data).features.cols())
                              : static_cast<int>(data.series ? data.series->inputs.cols() : 0);
    Model model = build_model(cfg, input_dim);

    // deep_rvfl autoencoders fit on the training rows only
    Eigen::Index fit_rows = -1;
    if (cfg.model == "deep_rvfl" && data.series) {
        fit_rows = split_rows(data.series->inputs.rows(), cfg.split).train;
    }
    FeatureBundle bundle = compute_features(model, data, fit_rows);
    if (bundle.targets.cols() == 0) {
        throw std::invalid_argument("training requires targets (y columns or structure labels)");
    }

    const SplitSizes s = split_rows(bundle.features.rows(), cfg.split);
    const Matrix h_train = bundle.features.topRows(s.train);
    const Matrix y_train = bundle.targets.topRows(s.train);
    const Matrix h_val = bundle.features.middleRows(s.train, s.val);
    const Matrix y_val = bundle.targets.middleRows(s.train, s.val);
    const Matrix h_test = bundle.features.bottomRows(s.test);
    const Matrix y_test = bundle.targets.bottomRows(s.test);

    if (cfg.lambda_grid.size() > 1 && s.val == 0) {
        throw std::invalid_argument("lambda selection needs a nonempty validation split");
    }

    double best_lambda = cfg.lambda_grid.front();
    if (cfg.lambda_grid.size() > 1) {
        double best_score = std::numeric_limits<double>::infinity();
        for (double lambda : cfg.lambda_grid) {
            const rvfl::Readout candidate = fit_readout(cfg, h_train, y_train, lambda);
            Matrix scores = h_val * candidate.beta;
            if (candidate.loss == rvfl::LossKind::Logistic) scores = activate(Activation::Sigmoid, scores);
            const Metrics vm = evaluate_metrics(scores, y_val, cfg.loss);
            const double score = cfg.loss == "logistic" ? -vm.accuracy : vm.mse;
            if (score < best_score) {
                best_score = score;
                best_lambda = lambda;
            }
        }
    }

    model.readout = fit_readout(cfg, h_train, y_train, best_lambda);

    TrainReport report;
    report.chosen_lambda = best_lambda;
    report.train = evaluate_metrics(predict_features(model, h_train), y_train, cfg.loss);
    report.validation = s.val > 0 ? evaluate_metrics(predict_features(model, h_val), y_val, cfg.loss)
                                  : Metrics{kNaN, kNaN, kNaN};
    report.test = s.test > 0 ? evaluate_metrics(predict_features(model, h_test), y_test, cfg.loss)
                             : Metrics{kNaN, kNaN, kNaN};
    report.artifact = to_artifact(model);
    return report;
}

Metrics cmd_eval(const artifact::ModelArtifact& art, const Dataset& data) {
    const Model model = from_artifact(art);
    Model scratch = model;
    const FeatureBundle bundle = compute_features(scratch, data);
    if (bundle.targets.cols() == 0) {
        throw std::invalid_argument("evaluation requires targets (y columns or structure labels)");
    }
    return evaluate_metrics(predict_features(model, bundle.features), bundle.targets, model.config.loss);
}

artifact::ModelArtifact to_artifact(const Model& model) {
    artifact::ModelArtifact art;
    art.config = model.config;
    art.readout = model.readout;
    art.weights_materialized = model.config.store_weights || model.config.model == "deep_rvfl";
    if (!art.weights_materialized) return art;

    if (model.feedforward) {
        art.weights.emplace_back("rvfl.W", model.feedforward->W);
        art.weights.emplace_back("rvfl.b", Matrix(model.feedforward->b));
    }
    for (std::size_t l = 0; l < model.adopted.size(); ++l) {
        art.weights.emplace_back("ae." + std::to_string(l), model.adopted[l]);
    }
    if (model.reservoir) {
        for (std::size_t l = 0; l < model.reservoir->layers.size(); ++l) {
            const auto& layer = model.reservoir->layers[l];
            const std::string prefix = "layer" + std::to_string(l) + ".";
            art.weights.emplace_back(prefix + "W", layer.W);
            art.weights.emplace_back(prefix + "WR", layer.W_R);
            art.weights.emplace_back(prefix + "bias", Matrix(layer.bias));
        }
    }
    return art;
}

Model from_artifact(const artifact::ModelArtifact& art) {
    const auto& cfg = art.config;
    if (!art.weights_materialized) {
        if (cfg.model == "deep_rvfl") {
            throw std::invalid_argument("deep_rvfl artifacts need materialized weights");
        }
        Model model = build_model(cfg, cfg.input_dim);
        model.readout = art.readout;
        return model;
    }

    Model model;
    model.config = cfg;
    model.readout = art.readout;
    auto find = [&](const std::string& name) -> const Matrix& {
        for (const auto& [n, m] : art.weights)
            if (n == name) return m;
        throw std::runtime_error("model artifact is missing weight block '" + name + "'");
    };

    if (cfg.model == "rvfl") {
        rvfl::RVFLParams p;
        p.W = find("rvfl.W");
        p.b = find("rvfl.b").col(0);
        p.input_dim = static_cast<int>(p.W.rows());
        p.hidden_dim = static_cast<int>(p.W.cols());
        p.include_direct_links = cfg.direct_links;
        p.include_bias_feature = cfg.bias_feature;
        p.dist = cfg.dist;
        p.seed = cfg.seed;
        model.feedforward = std::move(p);
    } else if (cfg.model == "deep_rvfl") {
        for (std::size_t l = 0; l < cfg.layer_dims.size(); ++l) {
            model.adopted.push_back(find("ae." + std::to_string(l)));
        }
    } else {
        deepesn::DeepReservoir dr;
        dr.inter_layer_scaling = cfg.inter_layer_scaling;
        const auto targets = config::layer_rho_targets(cfg);
        for (std::size_t l = 0; l < cfg.layer_dims.size(); ++l) {
            const std::string prefix = "layer" + std::to_string(l) + ".";
            reservoir::ReservoirLayer layer;
            layer.W = find(prefix + "W");
            layer.W_R = find(prefix + "WR");
            layer.bias = find(prefix + "bias").col(0);
            layer.topology = cfg.topology;
            layer.scaling = cfg.scaling_mode == "norm" ? reservoir::Scaling::norm(targets[l])
                                                       : reservoir::Scaling::rho(targets[l]);
            layer.input_scaling = l == 0 ? cfg.input_scaling : cfg.inter_layer_scaling;
            layer.dist = cfg.dist;
            layer.seed = cfg.seed + static_cast<std::uint32_t>(l);
            // measured at init time; the checksummed weights carry it unchanged
            layer.achieved = targets[l];
            dr.layers.push_back(std::move(layer));
        }
        model.reservoir = std::move(dr);
    }
    return model;
}

DiagnoseReport cmd_diagnose(const config::ExperimentConfig& cfg, const Dataset& data) {
    if (!is_reservoir_kind(cfg.model)) {
        throw std::invalid_argument("diagnose requires a reservoir model (esn, deepesn, tree, graph)");
    }
    if (!data.series) throw std::invalid_argument("diagnose needs a time-series dataset to drive the system");
    const Matrix& X = data.series->inputs;
    const Eigen::Index T = X.rows();
    const int washout = resolve_washout(cfg, T);

    Model model = build_model(cfg, static_cast<int>(X.cols()));
    const auto& dr = *model.reservoir;

    DiagnoseReport report;
    report.sufficient = deepesn::check_deep_sufficient(dr);
    report.necessary = deepesn::check_deep_necessary(dr);
    report.esp = deepesn::check_esp_empirical(dr, X, cfg.esp_trials, cfg.esp_tol, cfg.seed + 991u);

    {
        config::ExperimentConfig mc_cfg = cfg;
        mc_cfg.input_dim = 1;
        Model mc_model = build_model(mc_cfg, 1);
        diagnostics::MemoryCapacityOptions mc_opts;
        mc_opts.activation = cfg.mc_linear ? Activation::Identity : Activation::Tanh;
        report.mc = diagnostics::memory_capacity(*mc_model.reservoir, cfg.mc_delays, cfg.mc_T,
                                                 cfg.seed, mc_opts);
    }

    const auto traces = deepesn::deep_run(dr, X, washout);
    for (const auto& tr : traces) {
        if (tr.usable().rows() > tr.states.cols()) {
            report.entropy.push_back(diagnostics::state_entropy(tr));
        } else {
            report.entropy.push_back(kNaN);
        }
    }

    const int m = std::min(cfg.lyapunov_exponents, dr.layers[0].units());
    report.lyapunov = diagnostics::local_lyapunov_spectrum(dr.layers[0], X, m);

    if (T - washout >= 16) {
        report.profiles = deepesn::layer_frequency_profile(traces);
        for (std::size_t l = 1; l < report.profiles.size(); ++l) {
            report.profile_distances.push_back(
                deepesn::profile_distance(report.profiles[l], report.profiles[l - 1]));
        }
    }

    const int t0 = washout + static_cast<int>((T - washout) / 2);
    report.perturbation_durations = deepesn::perturbation_duration(
        dr, X, t0, Vector::Constant(X.cols(), cfg.perturb_delta), cfg.perturb_threshold);

    if (cfg.model == "deepesn") {
        deepesn::LayerTemplate tmpl;
        tmpl.units = cfg.layer_dims[0];
        tmpl.rho = config::layer_rho_targets(cfg)[0];
        tmpl.input_scaling = cfg.input_scaling;
        tmpl.inter_layer_scaling = cfg.inter_layer_scaling;
        tmpl.topology = cfg.topology;
        tmpl.dist = cfg.dist;
        tmpl.seed = cfg.seed;
        tmpl.washout = cfg.washout;
        report.suggested_depth = deepesn::auto_depth(X, tmpl, cfg.max_depth, cfg.depth_epsilon).depth;
    }
    return report;
}

std::string diagnose_text(const DiagnoseReport& r) {
    std::ostringstream os;
    os.precision(6);
    os << "== stability ==\n";
    os << "sufficient condition value " << r.sufficient.value << " -> "
       << (r.sufficient.holds ? "holds" : "violated") << "\n";
    os << "necessary condition value " << r.necessary.value << " -> "
       << (r.necessary.holds ? "holds" : "violated") << "\n";
    os << "empirical ESP: " << (r.esp.converged ? "converged" : "NOT converged")
       << " (final distance " << r.esp.distance_trace(r.esp.distance_trace.size() - 1) << ")\n";
    os << "== memory capacity ==\n";
    os << "MC total " << r.mc.total;
    if (r.mc.dim_warning) os << "  [warning: delays >= state dimension]";
    os << "\n";
    os << "== state entropy per layer ==\n";
    for (std::size_t l = 0; l < r.entropy.size(); ++l) {
        os << "layer " << (l + 1) << ": " << r.entropy[l] << "\n";
    }
    os << "== local Lyapunov spectrum (layer 1) ==\n";
    for (Eigen::Index i = 0; i < r.lyapunov.exponents.size(); ++i) {
        os << "lambda_" << (i + 1) << " = " << r.lyapunov.exponents(i) << "\n";
    }
    if (r.lyapunov.floored) os << "(floored: nilpotent Jacobian directions)\n";
    if (!r.profiles.empty()) {
        os << "== frequency profiles ==\n";
        for (std::size_t l = 0; l < r.profile_distances.size(); ++l) {
            os << "TV distance layer " << (l + 1) << " -> " << (l + 2) << ": "
               << r.profile_distances[l] << "\n";
        }
        for (std::size_t l = 0; l < r.profiles.size(); ++l) {
            if (r.profiles[l].degenerate) os << "layer " << (l + 1) << ": degenerate (constant states)\n";
        }
    }
    os << "== perturbation durations ==\n";
    for (std::size_t l = 0; l < r.perturbation_durations.size(); ++l) {
        os << "layer " << (l + 1) << ": " << r.perturbation_durations[l] << " steps\n";
    }
    if (r.suggested_depth > 0) os << "suggested depth: " << r.suggested_depth << "\n";
    return os.str();
}

std::string diagnose_csv(const DiagnoseReport& r) {
    std::ostringstream os;
    os.precision(17);
    os << "metric,index,value\n";
    os << "sufficient_value,," << r.sufficient.value << "\n";
    os << "sufficient_holds,," << (r.sufficient.holds ? 1 : 0) << "\n";
    os << "necessary_value,," << r.necessary.value << "\n";
    os << "necessary_holds,," << (r.necessary.holds ? 1 : 0) << "\n";
    os << "esp_converged,," << (r.esp.converged ? 1 : 0) << "\n";
    os << "esp_final_distance,," << r.esp.distance_trace(r.esp.distance_trace.size() - 1) << "\n";
    os << "mc_total,," << csv_safe(r.mc.total) << "\n";
    for (Eigen::Index k = 0; k < r.mc.r2.size(); ++k) {
        os << "mc_r2," << (k + 1) << "," << csv_safe(r.mc.r2(k)) << "\n";
    }
    for (std::size_t l = 0; l < r.entropy.size(); ++l) {
        os << "state_entropy," << (l + 1) << "," << csv_safe(r.entropy[l]) << "\n";
    }
    for (Eigen::Index i = 0; i < r.lyapunov.exponents.size(); ++i) {
        os << "lyapunov," << (i + 1) << "," << csv_safe(r.lyapunov.exponents(i)) << "\n";
    }
    for (std::size_t l = 0; l < r.profile_distances.size(); ++l) {
        os << "profile_distance," << (l + 2) << "," << csv_safe(r.profile_distances[l]) << "\n";
    }
    for (std::size_t l = 0; l < r.perturbation_durations.size(); ++l) {
        os << "perturbation_duration," << (l + 1) << "," << r.perturbation_durations[l] << "\n";
    }
    if (r.suggested_depth > 0) os << "suggested_depth,," << r.suggested_depth << "\n";
    return os.str();
}

diagnostics::MemoryCapacityReport cmd_mc(const config::ExperimentConfig& cfg) {
    if (!is_reservoir_kind(cfg.model)) {
        throw std::invalid_argument("mc requires a reservoir model (esn, deepesn, tree, graph)");
    }
    config::ExperimentConfig mc_cfg = cfg;
    mc_cfg.input_dim = 1;
    Model model = build_model(mc_cfg, 1);
    diagnostics::MemoryCapacityOptions opts;
    opts.activation = cfg.mc_linear ? Activation::Identity : Activation::Tanh;
    return diagnostics::memory_capacity(*model.reservoir, cfg.mc_delays, cfg.mc_T, cfg.seed, opts);
}

reservoir::EspReport cmd_esp_check(const config::ExperimentConfig& cfg, const Dataset& data) {
    if (!is_reservoir_kind(cfg.model)) {
        throw std::invalid_argument("esp-check requires a reservoir model");
    }
    if (!data.series) throw std::invalid_argument("esp-check needs a time-series dataset");
    Model model = build_model(cfg, static_cast<int>(data.series->inputs.cols()));
    return deepesn::check_esp_empirical(*model.reservoir, data.series->inputs, cfg.esp_trials,
                                        cfg.esp_tol, cfg.seed + 991u);
}

FeatureBundle cmd_embed(const config::ExperimentConfig& cfg, const Dataset& data) {
    if (!is_structural_kind(cfg.model)) {
        throw std::invalid_argument("embed requires a structural model (tree or graph)");
    }
    if (data.structures.empty()) throw std::invalid_argument("embed needs structure data");
    const auto& first = data.structures.front();
    const int input_dim = static_cast<int>(first.is_tree()
                                               ? std::get<structures::TreeData>(first.data).labels.cols()
                                               : std::get<structures::GraphData>(first.data).features.cols());
    Model model = build_model(cfg, input_dim);
    return compute_features(model, data);
}

SweepSpec parse_sweep_text(const std::string& text, const std::string& origin) {
    SweepSpec spec;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument(origin + ": line " + std::to_string(line_no) +
                                        ": expected 'key = v1; v2; ...'");
        }
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            if (a == std::string::npos) return std::string();
            const auto b = s.find_last_not_of(" \t\r");
            return s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        std::vector<std::string> values;
        std::istringstream vs(line.substr(eq + 1));
        std::string item;
        while (std::getline(vs, item, ';')) {
            item = trim(item);
            if (!item.empty()) values.push_back(item);
        }
        if (values.empty()) {
            throw std::invalid_argument(origin + ": line " + std::to_string(line_no) +
                                        ": no values for axis '" + key + "'");
        }
        spec.axes.emplace_back(key, values);
    }
    if (spec.axes.empty()) throw std::invalid_argument(origin + ": empty sweep spec");
    return spec;
}

SweepSpec load_sweep(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open sweep file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_sweep_text(buf.str(), path);
}

SweepTable cmd_sweep(const config::ExperimentConfig& base, const SweepSpec& spec,
                     const Dataset& data, int workers) {
    SweepTable table;
    std::size_t cells = 1;
    for (const auto& [key, values] : spec.axes) {
        table.axis_names.push_back(key);
        cells *= values.size();
    }
    table.rows.resize(cells);

    auto run_cell = [&](std::size_t index) {
        SweepRow& row = table.rows[index];
        config::ExperimentConfig cfg = base;
        // row-major: the last axis varies fastest
        std::size_t rem = index;
        row.cell.resize(spec.axes.size());
        for (std::size_t a = spec.axes.size(); a-- > 0;) {
            const auto& values = spec.axes[a].second;
            row.cell[a] = values[rem % values.size()];
            rem /= values.size();
        }
        try {
            for (std::size_t a = 0; a < spec.axes.size(); ++a) {
                config::apply_key(cfg, spec.axes[a].first, row.cell[a]);
            }
            config::validate(cfg);
            const TrainReport report = cmd_train(cfg, data);
            row.chosen_lambda = report.chosen_lambda;
            row.test = report.test;
            if (is_reservoir_kind(cfg.model)) {
                const Model model = from_artifact(report.artifact);
                const auto suff = deepesn::check_deep_sufficient(*model.reservoir);
                const auto nec = deepesn::check_deep_necessary(*model.reservoir);
                row.sufficient_value = suff.value;
                row.sufficient_holds = suff.holds;
                row.necessary_value = nec.value;
                row.necessary_holds = nec.holds;
                row.has_stability = true;
            }
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    };

    workers = std::max(1, workers);
    if (workers == 1 || cells <= 1) {
        for (std::size_t i = 0; i < cells; ++i) run_cell(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        const int n_threads = std::min<std::size_t>(workers, cells);
        pool.reserve(n_threads);
        for (int w = 0; w < n_threads; ++w) {
            pool.emplace_back([&]() {
                for (std::size_t i = next.fetch_add(1); i < cells; i = next.fetch_add(1)) run_cell(i);
            });
        }
        for (auto& t : pool) t.join();
    }
    return table;
}

std::string sweep_csv(const SweepTable& table) {
    std::ostringstream os;
    os.precision(17);
    for (const auto& name : table.axis_names) os << csv_quote(name) << ",";
    os << "chosen_lambda,test_mse,test_r2,test_accuracy,sufficient_value,sufficient_holds,"
          "necessary_value,necessary_holds,error\n";
    for (const auto& row : table.rows) {
        for (const auto& v : row.cell) os << csv_quote(v) << ",";
        if (row.error.empty()) {
            os << row.chosen_lambda << "," << csv_safe(row.test.mse) << "," << csv_safe(row.test.r2)
               << "," << csv_safe(row.test.accuracy) << ",";
            if (row.has_stability) {
                os << row.sufficient_value << "," << (row.sufficient_holds ? 1 : 0) << ","
                   << row.necessary_value << "," << (row.necessary_holds ? 1 : 0) << ",";
            } else {
                os << ",,,,";
            }
            os << "\n";
        } else {
            os << ",,,,,,,," << csv_quote(row.error) << "\n";
        }
    }
    return os.str();
}

}  // namespace randnn::cli
