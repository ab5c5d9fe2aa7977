#include "randnn/commands.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace randnn;

namespace {

// delay-1 recall task: y(t) = x(t-1)
cli::Dataset delay_task(int T, std::uint32_t seed) {
    cli::Dataset data;
    dataset::TimeSeriesData series;
    series.inputs = oracles::random_matrix(T, 1, seed, -0.8, 0.8);
    series.targets.resize(T, 1);
    series.targets(0, 0) = 0.0;
    for (int t = 1; t < T; ++t) series.targets(t, 0) = series.inputs(t - 1, 0);
    series.input_names = {"x0"};
    series.target_names = {"y0"};
    data.series = std::move(series);
    return data;
}

cli::Dataset toy_graphs(int count, std::uint32_t seed) {
    cli::Dataset data;
    for (int i = 0; i < count; ++i) {
        dataset::StructureRecord rec;
        structures::GraphData g;
        const int n = 3 + i % 3;
        g.features = oracles::random_matrix(n, 2, seed + i);
        for (int v = 0; v + 1 < n; ++v) g.edges.emplace_back(v, v + 1);
        rec.data = std::move(g);
        Vector label(1);
        label(0) = (i % 2) ? 1.0 : -1.0;
        rec.label = label;
        data.structures.push_back(std::move(rec));
    }
    return data;
}

config::ExperimentConfig esn_config(const std::string& extra = "") {
    return config::parse_config_text(
        "model = esn\nlayer_dims = 30\nrho = 0.9\nwashout = 20\n"
        "lambda_grid = 1e-8,1e-6,1e-4\nseed = 5\n" + extra,
        "test");
}

}  // namespace

TEST_CASE("cmd_train: deterministic and accurate on delay-1 recall") {
    auto cfg = config::parse_config_text(
        "model = esn\nlayer_dims = 50\nrho = 0.9\ninput_scaling = 0.5\nwashout = 50\n"
        "lambda_grid = 1e-10,1e-8,1e-6\nseed = 7\n",
        "test");
    auto data = delay_task(800, 1);
    auto a = cli::cmd_train(cfg, data);
    auto b = cli::cmd_train(cfg, data);
    CHECK(a.test.mse == b.test.mse);
    CHECK(a.test.r2 == b.test.r2);
    CHECK(a.chosen_lambda == b.chosen_lambda);
    CHECK(a.test.r2 > 0.99);
}

TEST_CASE("cmd_train: single-lambda grid skips selection") {
    auto cfg = esn_config("split = 0.8,0,0.2\n");
    cfg.lambda_grid = {1e-6};
    auto data = delay_task(300, 2);
    auto report = cli::cmd_train(cfg, data);
    CHECK(report.chosen_lambda == 1e-6);
    CHECK(std::isnan(report.validation.mse));
    CHECK(report.test.r2 > 0.9);
}

TEST_CASE("cmd_train: needs targets") {
    auto cfg = esn_config();
    cli::Dataset data = delay_task(300, 3);
    data.series->targets = Matrix(300, 0);
    CHECK_THROWS_WITH_AS(cli::cmd_train(cfg, data), doctest::Contains("target"),
                         std::invalid_argument);
}

TEST_CASE("cmd_train covers every model kind") {
    auto data = delay_task(240, 4);
    SUBCASE("rvfl") {
        auto cfg = config::parse_config_text(
            "model = rvfl\nhidden_dim = 40\ndirect_links = true\nseed = 1\n", "test");
        auto report = cli::cmd_train(cfg, data);
        CHECK(std::isfinite(report.test.mse));
    }
    SUBCASE("deep_rvfl") {
        auto cfg = config::parse_config_text(
            "model = deep_rvfl\nlayer_dims = 20,10\nseed = 1\n", "test");
        auto report = cli::cmd_train(cfg, data);
        CHECK(std::isfinite(report.test.mse));
        CHECK(report.artifact.weights_materialized);
    }
    SUBCASE("deepesn") {
        auto cfg = config::parse_config_text(
            "model = deepesn\nlayer_dims = 20,20\nrho = 0.9\nwashout = 20\nseed = 1\n", "test");
        auto report = cli::cmd_train(cfg, data);
        CHECK(std::isfinite(report.test.mse));
    }
    SUBCASE("graph") {
        auto cfg = config::parse_config_text(
            "model = graph\nlayer_dims = 10\nrho = 0.3\npool = mean\nsplit = 0.5,0.25,0.25\n"
            "lambda_grid = 1e-4,1e-2\nseed = 1\n",
            "test");
        auto report = cli::cmd_train(cfg, toy_graphs(12, 9));
        CHECK(std::isfinite(report.test.mse));
    }
}

TEST_CASE("cmd_train: logistic loss reports accuracy") {
    cli::Dataset data;
    dataset::TimeSeriesData series;
    series.inputs = oracles::random_matrix(200, 2, 11);
    series.targets.resize(200, 1);
    for (int i = 0; i < 200; ++i) {
        series.targets(i, 0) = series.inputs(i, 0) + series.inputs(i, 1) > 0 ? 1.0 : 0.0;
    }
    data.series = std::move(series);
    auto cfg = config::parse_config_text(
        "model = rvfl\nhidden_dim = 30\ndirect_links = true\nloss = logistic\n"
        "lambda_grid = 1e-4,1e-2\nmax_iter = 500\nseed = 2\n",
        "test");
    auto report = cli::cmd_train(cfg, data);
    CHECK(report.test.accuracy > 0.85);
}

TEST_CASE("artifact round-trip preserves predictions bitwise") {
    auto cfg = esn_config();
    auto data = delay_task(300, 5);
    auto report = cli::cmd_train(cfg, data);

    cli::Model model = cli::from_artifact(report.artifact);
    Matrix before = cli::predict(model, data);

    const std::string bytes = artifact::serialize_model(report.artifact);
    cli::Model loaded = cli::from_artifact(artifact::deserialize_model(bytes, "mem"));
    Matrix after = cli::predict(loaded, data);
    CHECK(before.rows() == after.rows());
    CHECK((before - after).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("seed-only artifacts regenerate identical weights") {
    auto cfg = esn_config("store_weights = false\n");
    auto data = delay_task(300, 6);
    auto report = cli::cmd_train(cfg, data);
    CHECK(!report.artifact.weights_materialized);
    CHECK(report.artifact.weights.empty());

    cli::Model regenerated = cli::from_artifact(report.artifact);
    cli::Model direct = cli::build_model(report.artifact.config, 1);
    CHECK((regenerated.reservoir->layers[0].W_R - direct.reservoir->layers[0].W_R)
              .cwiseAbs()
              .maxCoeff() == 0.0);

    Matrix pred = cli::predict(regenerated, data);
    CHECK(pred.rows() == 300 - 20);
}

TEST_CASE("cmd_eval matches the training-side metrics") {
    auto cfg = esn_config();
    auto data = delay_task(300, 7);
    auto report = cli::cmd_train(cfg, data);
    auto metrics = cli::cmd_eval(report.artifact, data);
    CHECK(std::isfinite(metrics.mse));
    CHECK(metrics.r2 > 0.9);

    SUBCASE("refuses datasets without targets") {
        cli::Dataset inputs_only = data;
        inputs_only.series->targets = Matrix(300, 0);
        CHECK_THROWS_AS(cli::cmd_eval(report.artifact, inputs_only), std::invalid_argument);
    }
}

TEST_CASE("cmd_sweep: one-point sweep equals cmd_train") {
    auto cfg = esn_config();
    auto data = delay_task(300, 8);
    cli::SweepSpec spec;
    spec.axes = {{"rho", {"0.9"}}};
    auto table = cli::cmd_sweep(cfg, spec, data, 1);
    REQUIRE(table.rows.size() == 1);
    CHECK(table.rows[0].error.empty());
    auto direct = cli::cmd_train(cfg, data);
    CHECK(table.rows[0].test.mse == direct.test.mse);
    CHECK(table.rows[0].chosen_lambda == direct.chosen_lambda);
}

TEST_CASE("cmd_sweep: stability flags per row") {
    auto cfg = esn_config();
    auto data = delay_task(300, 9);
    cli::SweepSpec spec = cli::parse_sweep_text("rho = 0.5; 0.9; 1.1\n", "test");
    auto table = cli::cmd_sweep(cfg, spec, data, 2);
    REQUIRE(table.rows.size() == 3);
    CHECK(table.rows[0].cell[0] == "0.5");
    CHECK(table.rows[2].cell[0] == "1.1");
    for (const auto& row : table.rows) {
        REQUIRE(row.error.empty());
        CHECK(row.has_stability);
    }
    CHECK(table.rows[0].necessary_holds);
    CHECK(table.rows[1].necessary_holds);
    CHECK(!table.rows[2].necessary_holds);

    const std::string csv = cli::sweep_csv(table);
    CHECK(csv.find("necessary_holds") != std::string::npos);

    SUBCASE("two-axis sweeps enumerate row-major") {
        cli::SweepSpec spec2 = cli::parse_sweep_text("rho = 0.5; 0.9\nseed = 1; 2\n", "test");
        auto t2 = cli::cmd_sweep(cfg, spec2, data, 4);
        REQUIRE(t2.rows.size() == 4);
        CHECK(t2.rows[0].cell == std::vector<std::string>{"0.5", "1"});
        CHECK(t2.rows[1].cell == std::vector<std::string>{"0.5", "2"});
        CHECK(t2.rows[3].cell == std::vector<std::string>{"0.9", "2"});
    }
}

TEST_CASE("cmd_embed produces fixed-width structure features") {
    auto cfg = config::parse_config_text(
        "model = graph\nlayer_dims = 8,6\nrho = 0.3\npool = sum\nreadout_mode = all_layers\nseed = 3\n",
        "test");
    auto data = toy_graphs(5, 20);
    auto bundle = cli::cmd_embed(cfg, data);
    CHECK(bundle.features.rows() == 5);
    CHECK(bundle.features.cols() == 14);
    CHECK(bundle.targets.rows() == 5);

    SUBCASE("root pooling on graphs is rejected") {
        cfg.pool = "root";
        CHECK_THROWS_AS(cli::cmd_embed(cfg, data), std::invalid_argument);
    }
}

TEST_CASE("cmd_mc and cmd_esp_check wire through") {
    auto cfg = config::parse_config_text(
        "model = esn\nlayer_dims = 15\nrho = 0.9\nmc_delays = 8\nmc_T = 400\nseed = 4\n", "test");
    auto mc = cli::cmd_mc(cfg);
    CHECK(mc.r2.size() == 8);

    auto data = delay_task(200, 21);
    auto esp = cli::cmd_esp_check(cfg, data);
    CHECK(esp.distance_trace.size() == 201);
    CHECK(esp.converged);
}

TEST_CASE("cmd_diagnose: full report wiring") {
    auto cfg = config::parse_config_text(
        "model = deepesn\nlayer_dims = 15,15\nrho = 0.9\nwashout = 30\nmc_delays = 6\nmc_T = 300\n"
        "lyapunov_exponents = 2\nmax_depth = 3\nseed = 6\n",
        "test");
    auto data = delay_task(400, 22);
    auto report = cli::cmd_diagnose(cfg, data);
    CHECK(report.sufficient.value > 0.0);
    CHECK(report.necessary.value == doctest::Approx(0.9).epsilon(1e-6));
    CHECK(report.mc.r2.size() == 6);
    CHECK(report.entropy.size() == 2);
    CHECK(report.lyapunov.exponents.size() == 2);
    CHECK(report.profiles.size() == 2);
    CHECK(report.perturbation_durations.size() == 2);
    CHECK(report.suggested_depth >= 1);

    const std::string text = cli::diagnose_text(report);
    CHECK(text.find("memory capacity") != std::string::npos);
    const std::string csv = cli::diagnose_csv(report);
    CHECK(csv.find("mc_total") != std::string::npos);

    SUBCASE("diagnose refuses feed-forward models") {
        auto bad = config::parse_config_text("model = rvfl\n", "test");
        CHECK_THROWS_AS(cli::cmd_diagnose(bad, data), std::invalid_argument);
    }
}

TEST_CASE("build_model validates input dimensions") {
    auto cfg = esn_config();
    CHECK_THROWS_AS(cli::build_model(cfg, 0), std::invalid_argument);
    cfg.input_dim = 3;
    CHECK_THROWS_AS(cli::build_model(cfg, 2), std::invalid_argument);
    CHECK_NOTHROW(cli::build_model(cfg, 3));
}
