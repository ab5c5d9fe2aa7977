#include "randnn/config.hpp"

#include "randnn/structures.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace randnn::config {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw std::invalid_argument("expected a boolean, got '" + v + "'");
}

int parse_int(const std::string& v) {
    std::size_t used = 0;
    const int out = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument("expected an integer, got '" + v + "'");
    return out;
}

double parse_real(const std::string& v) {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("expected a number, got '" + v + "'");
    return out;
}

std::vector<double> parse_real_list(const std::string& v) {
    std::vector<double> out;
    std::istringstream is(v);
    std::string item;
    while (std::getline(is, item, ',')) out.push_back(parse_real(trim(item)));
    if (out.empty()) throw std::invalid_argument("expected a comma-separated list, got '" + v + "'");
    return out;
}

std::vector<int> parse_int_list(const std::string& v) {
    std::vector<int> out;
    std::istringstream is(v);
    std::string item;
    while (std::getline(is, item, ',')) out.push_back(parse_int(trim(item)));
    if (out.empty()) throw std::invalid_argument("expected a comma-separated list, got '" + v + "'");
    return out;
}

template <typename T>
std::string list_to_string(const std::vector<T>& xs) {
    std::ostringstream os;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) os << ",";
        os << xs[i];
    }
    return os.str();
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"model", [](auto& c, const auto& v) { c.model = v; }},
        {"input_dim", [](auto& c, const auto& v) { c.input_dim = parse_int(v); }},
        {"hidden_dim", [](auto& c, const auto& v) { c.hidden_dim = parse_int(v); }},
        {"direct_links", [](auto& c, const auto& v) { c.direct_links = parse_bool(v); }},
        {"bias_feature", [](auto& c, const auto& v) { c.bias_feature = parse_bool(v); }},
        {"layer_dims", [](auto& c, const auto& v) { c.layer_dims = parse_int_list(v); }},
        {"topology", [](auto& c, const auto& v) { c.topology = reservoir::Topology::parse(v); }},
        {"scaling_mode",
         [](auto& c, const auto& v) {
             if (v != "rho" && v != "norm") throw std::invalid_argument("scaling_mode must be rho or norm");
             c.scaling_mode = v;
         }},
        {"rho", [](auto& c, const auto& v) { c.rho = parse_real(v); }},
        {"per_layer_rho", [](auto& c, const auto& v) { c.per_layer_rho = parse_real_list(v); }},
        {"input_scaling", [](auto& c, const auto& v) { c.input_scaling = parse_real(v); }},
        {"inter_layer_scaling", [](auto& c, const auto& v) { c.inter_layer_scaling = parse_real(v); }},
        {"reservoir_bias", [](auto& c, const auto& v) { c.reservoir_bias = parse_bool(v); }},
        {"ring_sign",
         [](auto& c, const auto& v) {
             if (v != "positive" && v != "alternating") {
                 throw std::invalid_argument("ring_sign must be positive or alternating");
             }
             c.ring_sign = v;
         }},
        {"dist", [](auto& c, const auto& v) { c.dist = Dist::parse(v); }},
        {"seed", [](auto& c, const auto& v) { c.seed = static_cast<std::uint32_t>(std::stoul(v)); }},
        {"store_weights", [](auto& c, const auto& v) { c.store_weights = parse_bool(v); }},
        {"lambda_grid", [](auto& c, const auto& v) { c.lambda_grid = parse_real_list(v); }},
        {"loss",
         [](auto& c, const auto& v) {
             if (v != "squared" && v != "logistic" && v != "l1") {
                 throw std::invalid_argument("loss must be squared, logistic or l1");
             }
             c.loss = v;
         }},
        {"readout_mode",
         [](auto& c, const auto& v) {
             if (v != "all_layers" && v != "last_layer") {
                 throw std::invalid_argument("readout_mode must be all_layers or last_layer");
             }
             c.readout_mode = v;
         }},
        {"max_iter", [](auto& c, const auto& v) { c.max_iter = parse_int(v); }},
        {"tol", [](auto& c, const auto& v) { c.tol = parse_real(v); }},
        {"washout", [](auto& c, const auto& v) { c.washout = parse_int(v); }},
        {"split", [](auto& c, const auto& v) { c.split = parse_real_list(v); }},
        {"fail_on_unstable", [](auto& c, const auto& v) { c.fail_on_unstable = parse_bool(v); }},
        {"mc_delays", [](auto& c, const auto& v) { c.mc_delays = parse_int(v); }},
        {"mc_T", [](auto& c, const auto& v) { c.mc_T = parse_int(v); }},
        {"mc_linear", [](auto& c, const auto& v) { c.mc_linear = parse_bool(v); }},
        {"esp_trials", [](auto& c, const auto& v) { c.esp_trials = parse_int(v); }},
        {"esp_tol", [](auto& c, const auto& v) { c.esp_tol = parse_real(v); }},
        {"lyapunov_exponents", [](auto& c, const auto& v) { c.lyapunov_exponents = parse_int(v); }},
        {"perturb_delta", [](auto& c, const auto& v) { c.perturb_delta = parse_real(v); }},
        {"perturb_threshold", [](auto& c, const auto& v) { c.perturb_threshold = parse_real(v); }},
        {"max_depth", [](auto& c, const auto& v) { c.max_depth = parse_int(v); }},
        {"depth_epsilon", [](auto& c, const auto& v) { c.depth_epsilon = parse_real(v); }},
        {"pool",
         [](auto& c, const auto& v) {
             structures::parse_pool_mode(v);
             c.pool = v;
         }},
        {"degree_normalization", [](auto& c, const auto& v) { c.degree_normalization = parse_bool(v); }},
        {"graph_tol", [](auto& c, const auto& v) { c.graph_tol = parse_real(v); }},
        {"graph_max_iter", [](auto& c, const auto& v) { c.graph_max_iter = parse_int(v); }},
        {"ae_activation",
         [](auto& c, const auto& v) {
             parse_activation(v);
             c.ae_activation = v;
         }},
        {"ae_noise_sigma", [](auto& c, const auto& v) { c.ae_noise_sigma = parse_real(v); }},
        {"ae_sparse_readout", [](auto& c, const auto& v) { c.ae_sparse_readout = parse_bool(v); }},
        {"ae_lambda", [](auto& c, const auto& v) { c.ae_lambda = parse_real(v); }},
    };
    return table;
}

}  // namespace

void apply_key(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    const auto& table = setters();
    const auto it = table.find(key);
    if (it == table.end()) {
        throw std::invalid_argument("unknown config key '" + key + "'");
    }
    try {
        it->second(cfg, value);
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument("config key '" + key + "': " + e.what());
    }
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument(origin + ": line " + std::to_string(line_no) +
                                        ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            apply_key(cfg, key, value);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(origin + ": line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    validate(cfg);
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

std::string resolved_text(const ExperimentConfig& c) {
    std::ostringstream os;
    os.precision(17);
    os << "model = " << c.model << "\n";
    os << "input_dim = " << c.input_dim << "\n";
    os << "hidden_dim = " << c.hidden_dim << "\n";
    os << "direct_links = " << (c.direct_links ? "true" : "false") << "\n";
    os << "bias_feature = " << (c.bias_feature ? "true" : "false") << "\n";
    os << "layer_dims = " << list_to_string(c.layer_dims) << "\n";
    os << "topology = " << c.topology.to_string() << "\n";
    os << "scaling_mode = " << c.scaling_mode << "\n";
    os << "rho = " << c.rho << "\n";
    if (!c.per_layer_rho.empty()) os << "per_layer_rho = " << list_to_string(c.per_layer_rho) << "\n";
    os << "input_scaling = " << c.input_scaling << "\n";
    os << "inter_layer_scaling = " << c.inter_layer_scaling << "\n";
    os << "reservoir_bias = " << (c.reservoir_bias ? "true" : "false") << "\n";
    os << "ring_sign = " << c.ring_sign << "\n";
    os << "dist = " << c.dist.to_string() << "\n";
    os << "seed = " << c.seed << "\n";
    os << "store_weights = " << (c.store_weights ? "true" : "false") << "\n";
    os << "lambda_grid = " << list_to_string(c.lambda_grid) << "\n";
    os << "loss = " << c.loss << "\n";
    os << "readout_mode = " << c.readout_mode << "\n";
    os << "max_iter = " << c.max_iter << "\n";
    os << "tol = " << c.tol << "\n";
    os << "washout = " << c.washout << "\n";
    os << "split = " << list_to_string(c.split) << "\n";
    os << "fail_on_unstable = " << (c.fail_on_unstable ? "true" : "false") << "\n";
    os << "mc_delays = " << c.mc_delays << "\n";
    os << "mc_T = " << c.mc_T << "\n";
    os << "mc_linear = " << (c.mc_linear ? "true" : "false") << "\n";
    os << "esp_trials = " << c.esp_trials << "\n";
    os << "esp_tol = " << c.esp_tol << "\n";
    os << "lyapunov_exponents = " << c.lyapunov_exponents << "\n";
    os << "perturb_delta = " << c.perturb_delta << "\n";
    os << "perturb_threshold = " << c.perturb_threshold << "\n";
    os << "max_depth = " << c.max_depth << "\n";
    os << "depth_epsilon = " << c.depth_epsilon << "\n";
    os << "pool = " << c.pool << "\n";
    os << "degree_normalization = " << (c.degree_normalization ? "true" : "false") << "\n";
    os << "graph_tol = " << c.graph_tol << "\n";
    os << "graph_max_iter = " << c.graph_max_iter << "\n";
    os << "ae_activation = " << c.ae_activation << "\n";
    os << "ae_noise_sigma = " << c.ae_noise_sigma << "\n";
    os << "ae_sparse_readout = " << (c.ae_sparse_readout ? "true" : "false") << "\n";
    os << "ae_lambda = " << c.ae_lambda << "\n";
    return os.str();
}

void validate(const ExperimentConfig& c) {
    static const std::vector<std::string> kinds = {"rvfl", "deep_rvfl", "esn", "deepesn", "tree", "graph"};
    bool known = false;
    for (const auto& k : kinds) known = known || (k == c.model);
    if (!known) throw std::invalid_argument("unknown model kind '" + c.model + "'");
    if (c.input_dim < 0) throw std::invalid_argument("input_dim must be nonnegative");
    if (c.hidden_dim <= 0) throw std::invalid_argument("hidden_dim must be positive");
    if (c.layer_dims.empty()) throw std::invalid_argument("layer_dims must be nonempty");
    for (int d : c.layer_dims)
        if (d <= 0) throw std::invalid_argument("layer_dims entries must be positive");
    if (!(c.rho > 0.0)) throw std::invalid_argument("rho target must be positive");
    if (!c.per_layer_rho.empty() && c.per_layer_rho.size() != c.layer_dims.size()) {
        throw std::invalid_argument("per_layer_rho must match layer_dims in length");
    }
    if (c.lambda_grid.empty()) throw std::invalid_argument("lambda_grid must be nonempty");
    for (double l : c.lambda_grid)
        if (l < 0.0) throw std::invalid_argument("lambda_grid entries must be nonnegative");
    if (c.split.size() != 3) throw std::invalid_argument("split must have three fractions");
    double total = 0.0;
    for (double f : c.split) {
        if (f < 0.0) throw std::invalid_argument("split fractions must be nonnegative");
        total += f;
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("split fractions must sum to 1");
    if (c.split[0] <= 0.0) throw std::invalid_argument("training fraction must be positive");
    if (c.mc_delays < 1) throw std::invalid_argument("mc_delays must be >= 1");
    if (c.esp_trials < 2) throw std::invalid_argument("esp_trials must be >= 2");
}

std::vector<double> layer_rho_targets(const ExperimentConfig& cfg) {
    if (!cfg.per_layer_rho.empty()) return cfg.per_layer_rho;
    return std::vector<double>(cfg.layer_dims.size(), cfg.rho);
}

}  // namespace randnn::config
