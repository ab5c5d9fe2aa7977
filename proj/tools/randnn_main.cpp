#include "randnn/commands.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace randnn;

struct CommonArgs {
    std::string config_path;
    std::string model_path;
    std::string data_path;
    std::string out_path;
    std::string sweep_path;
    long long seed = -1;
    int workers = 1;
    std::string format = "text";
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_model = false) {
    cmd->add_option("--config", args.config_path, "experiment config file");
    if (with_model) cmd->add_option("--model", args.model_path, "saved model artifact");
    cmd->add_option("--data", args.data_path, "dataset file");
    cmd->add_option("--out", args.out_path, "output path");
    cmd->add_option("--seed", args.seed, "override the config seed");
    cmd->add_option("--workers", args.workers, "parallel workers (sweep)");
    cmd->add_option("--format", args.format, "output format: text or csv")
        ->check(CLI::IsMember({"text", "csv"}));
}

config::ExperimentConfig resolve_config(const CommonArgs& args, bool allow_model = false) {
    config::ExperimentConfig cfg;
    if (!args.config_path.empty()) {
        cfg = config::load_config(args.config_path);
    } else if (allow_model && !args.model_path.empty()) {
        cfg = artifact::load_model(args.model_path).config;
    } else {
        throw std::invalid_argument("missing --config");
    }
    if (args.seed >= 0) cfg.seed = static_cast<std::uint32_t>(args.seed);
    config::validate(cfg);
    return cfg;
}

// every run logs the full configuration so results are reproducible
void print_resolved(const config::ExperimentConfig& cfg) {
    std::istringstream lines(config::resolved_text(cfg));
    std::string line;
    std::cout << "# resolved config\n";
    while (std::getline(lines, line)) std::cout << "#   " << line << "\n";
}

cli::Dataset require_data(const config::ExperimentConfig& cfg, const CommonArgs& args) {
    if (args.data_path.empty()) throw std::invalid_argument("missing --data");
    return cli::load_dataset(cfg, args.data_path);
}

void write_or_print(const std::string& out_path, const std::string& content) {
    if (out_path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open '" + out_path + "' for writing");
    out << content;
}

void print_metrics(const char* tag, const cli::Metrics& m, const std::string& loss) {
    std::cout << tag << ": mse " << m.mse << "  r2 " << m.r2;
    if (loss == "logistic") std::cout << "  accuracy " << m.accuracy;
    std::cout << "\n";
}

int check_stability_gate(const config::ExperimentConfig& cfg, int input_dim) {
    if (!cfg.fail_on_unstable) return 0;
    if (cfg.model == "rvfl" || cfg.model == "deep_rvfl") return 0;
    const cli::Model model = cli::build_model(cfg, input_dim);
    const auto necessary = deepesn::check_deep_necessary(*model.reservoir);
    if (!necessary.holds) {
        std::cerr << "stability gate: necessary condition violated (max layer spectral radius "
                  << necessary.value << " >= 1)\n";
        return 3;
    }
    return 0;
}

int input_width(const cli::Dataset& data) {
    if (data.series) return static_cast<int>(data.series->inputs.cols());
    const auto& first = data.structures.front();
    return static_cast<int>(first.is_tree()
                                ? std::get<structures::TreeData>(first.data).labels.cols()
                                : std::get<structures::GraphData>(first.data).features.cols());
}

std::string matrix_csv(const Matrix& features, const Matrix& labels) {
    std::ostringstream os;
    os.precision(17);
    for (Eigen::Index j = 0; j < features.cols(); ++j) os << (j ? "," : "") << "f" << j;
    for (Eigen::Index j = 0; j < labels.cols(); ++j) os << ",y" << j;
    os << "\n";
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
        for (Eigen::Index j = 0; j < features.cols(); ++j) os << (j ? "," : "") << features(i, j);
        for (Eigen::Index j = 0; j < labels.cols(); ++j) os << "," << labels(i, j);
        os << "\n";
    }
    return os.str();
}

int run_init(const CommonArgs& args) {
    auto cfg = resolve_config(args);
    print_resolved(cfg);
    auto data = require_data(cfg, args);
    if (args.out_path.empty()) throw std::invalid_argument("init needs --out for the model artifact");

    cli::Model model = cli::build_model(cfg, input_width(data));
    if (const int rc = check_stability_gate(model.config, input_width(data))) return rc;
    if (cfg.model == "deep_rvfl") cli::compute_features(model, data);  // fit the adopted stack
    artifact::save_model(args.out_path, cli::to_artifact(model));
    std::cout << "saved untrained model to " << args.out_path << "\n";
    return 0;
}

int run_train(const CommonArgs& args) {
    auto cfg = resolve_config(args);
    print_resolved(cfg);
    auto data = require_data(cfg, args);
    if (const int rc = check_stability_gate(cfg, input_width(data))) return rc;

    const cli::TrainReport report = cli::cmd_train(cfg, data);
    std::cout << "chosen lambda: " << report.chosen_lambda << "\n";
    print_metrics("train", report.train, cfg.loss);
    print_metrics("validation", report.validation, cfg.loss);
    print_metrics("test", report.test, cfg.loss);
    if (!args.out_path.empty()) {
        artifact::save_model(args.out_path, report.artifact);
        std::cout << "saved model to " << args.out_path << "\n";
    }
    return 0;
}

int run_eval(const CommonArgs& args) {
    if (args.model_path.empty()) throw std::invalid_argument("eval needs --model");
    const auto art = artifact::load_model(args.model_path);
    config::ExperimentConfig cfg = art.config;
    if (args.seed >= 0) cfg.seed = static_cast<std::uint32_t>(args.seed);
    print_resolved(cfg);
    auto data = require_data(cfg, args);
    const cli::Metrics m = cli::cmd_eval(art, data);
    print_metrics("eval", m, cfg.loss);
    return 0;
}

int run_diagnose(const CommonArgs& args) {
    auto cfg = resolve_config(args, /*allow_model=*/true);
    print_resolved(cfg);
    auto data = require_data(cfg, args);
    if (const int rc = check_stability_gate(cfg, input_width(data))) return rc;
    const cli::DiagnoseReport report = cli::cmd_diagnose(cfg, data);
    const std::string text = args.format == "csv" ? cli::diagnose_csv(report) : cli::diagnose_text(report);
    write_or_print(args.out_path, text);
    return 0;
}

int run_sweep(const CommonArgs& args) {
    auto cfg = resolve_config(args);
    print_resolved(cfg);
    if (args.sweep_path.empty()) throw std::invalid_argument("sweep needs --sweep");
    auto data = require_data(cfg, args);
    const cli::SweepSpec spec = cli::load_sweep(args.sweep_path);
    const cli::SweepTable table = cli::cmd_sweep(cfg, spec, data, args.workers);
    write_or_print(args.out_path, cli::sweep_csv(table));
    for (const auto& row : table.rows) {
        if (!row.error.empty()) return 1;
    }
    return 0;
}

int run_embed(const CommonArgs& args) {
    auto cfg = resolve_config(args);
    print_resolved(cfg);
    auto data = require_data(cfg, args);
    const cli::FeatureBundle bundle = cli::cmd_embed(cfg, data);
    if (bundle.contraction_warning) {
        std::cerr << "warning: ||W_R||*k_max >= 1 on some layer; the graph fixed point "
                     "may not be unique (consider degree_normalization)\n";
    }
    write_or_print(args.out_path, matrix_csv(bundle.features, bundle.targets));
    return 0;
}

int run_mc(const CommonArgs& args) {
    auto cfg = resolve_config(args);
    print_resolved(cfg);
    const auto report = cli::cmd_mc(cfg);
    if (args.format == "csv") {
        std::ostringstream os;
        os.precision(17);
        os << "delay,r2\n";
        for (Eigen::Index k = 0; k < report.r2.size(); ++k) os << (k + 1) << "," << report.r2(k) << "\n";
        os << "total," << report.total << "\n";
        write_or_print(args.out_path, os.str());
    } else {
        for (Eigen::Index k = 0; k < report.r2.size(); ++k) {
            std::cout << "delay " << (k + 1) << ": r2 " << report.r2(k) << "\n";
        }
        std::cout << "memory capacity: " << report.total << "\n";
        if (report.dim_warning) std::cout << "warning: delays >= state dimension\n";
    }
    return 0;
}

int run_esp_check(const CommonArgs& args) {
    auto cfg = resolve_config(args, /*allow_model=*/true);
    print_resolved(cfg);
    auto data = require_data(cfg, args);
    if (const int rc = check_stability_gate(cfg, input_width(data))) return rc;
    const auto report = cli::cmd_esp_check(cfg, data);
    const Eigen::Index T = report.distance_trace.size() - 1;
    std::cout << "initial spread: " << report.distance_trace(0) << "\n";
    std::cout << "final distance after " << T << " steps: " << report.distance_trace(T) << "\n";
    std::cout << "converged: " << (report.converged ? "yes" : "no") << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"randomized neural networks: RVFL, ESN, DeepESN and structural reservoirs"};
    app.require_subcommand(1);

    CommonArgs args;
    auto* init = app.add_subcommand("init", "materialize a model from a config and save it");
    add_common(init, args);
    auto* train = app.add_subcommand("train", "train a readout with lambda selection");
    add_common(train, args);
    auto* eval = app.add_subcommand("eval", "evaluate a saved model on a dataset");
    add_common(eval, args, /*with_model=*/true);
    auto* diagnose = app.add_subcommand("diagnose", "stability and richness diagnostics");
    add_common(diagnose, args, /*with_model=*/true);
    auto* sweep = app.add_subcommand("sweep", "Cartesian hyper-parameter sweep");
    add_common(sweep, args);
    sweep->add_option("--sweep", args.sweep_path, "sweep spec file (key = v1; v2; ...)");
    auto* embed = app.add_subcommand("embed", "embed structures into fixed-width features");
    add_common(embed, args);
    auto* mc = app.add_subcommand("mc", "short-term memory capacity");
    add_common(mc, args);
    auto* esp = app.add_subcommand("esp-check", "empirical echo state property check");
    add_common(esp, args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (init->parsed()) return run_init(args);
        if (train->parsed()) return run_train(args);
        if (eval->parsed()) return run_eval(args);
        if (diagnose->parsed()) return run_diagnose(args);
        if (sweep->parsed()) return run_sweep(args);
        if (embed->parsed()) return run_embed(args);
        if (mc->parsed()) return run_mc(args);
        if (esp->parsed()) return run_esp_check(args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
