#pragma once

#include "randnn/artifact.hpp"
#include "randnn/config.hpp"
#include "randnn/dataset.hpp"
#include "randnn/diagnostics.hpp"

#include <optional>
#include <string>
#include <vector>

namespace randnn::cli {

/// Either a time series table or a list of labeled structures.
struct Dataset {
    std::optional<dataset::TimeSeriesData> series;
    std::vector<dataset::StructureRecord> structures;

    bool is_structural() const { return !structures.empty(); }
};

Dataset load_dataset(const config::ExperimentConfig& cfg, const std::string& path);

/// Materialized model: the random (or adopted) weights plus a readout.
struct Model {
    config::ExperimentConfig config;
    std::optional<rvfl::RVFLParams> feedforward;      // rvfl
    std::vector<Matrix> adopted;                      // deep_rvfl forward weights
    std::optional<deepesn::DeepReservoir> reservoir;  // esn | deepesn | tree | graph
    std::optional<rvfl::Readout> readout;
};

/// Builds the data-independent parts of the model from (config, seed).
/// input_dim resolves config.input_dim when that is 0.
Model build_model(const config::ExperimentConfig& cfg, int input_dim);

/// Feature rows plus aligned target rows (washout applied for reservoirs).
struct FeatureBundle {
    Matrix features;
    Matrix targets;  // 0 columns when the dataset has no targets
    bool contraction_warning = false;  // some graph embedding ran outside the contraction regime
};

/// deep_rvfl fits its autoencoder stack on the first `fit_rows` input rows
/// (all rows when fit_rows < 0) and stores the adopted weights in the model.
FeatureBundle compute_features(Model& model, const Dataset& data, Eigen::Index fit_rows = -1);

Matrix predict_features(const Model& model, const Matrix& features);
Matrix predict(const Model& model, const Dataset& data);

struct Metrics {
    double mse = 0.0;
    double r2 = 0.0;
    double accuracy = 0.0;  // logistic loss only; NaN otherwise
};

Metrics evaluate_metrics(const Matrix& predictions, const Matrix& targets, const std::string& loss);

struct TrainReport {
    double chosen_lambda = 0.0;
    Metrics train, validation, test;
    artifact::ModelArtifact artifact;
};

TrainReport cmd_train(const config::ExperimentConfig& cfg, const Dataset& data);
Metrics cmd_eval(const artifact::ModelArtifact& art, const Dataset& data);

artifact::ModelArtifact to_artifact(const Model& model);
Model from_artifact(const artifact::ModelArtifact& art);

struct DiagnoseReport {
    reservoir::ConditionReport sufficient, necessary;
    reservoir::EspReport esp;
    diagnostics::MemoryCapacityReport mc;
    std::vector<double> entropy;  // per layer
    diagnostics::LyapunovReport lyapunov;
    std::vector<deepesn::FrequencyProfile> profiles;
    std::vector<double> profile_distances;  // between consecutive layers
    std::vector<int> perturbation_durations;
    int suggested_depth = -1;  // deepesn only
};

DiagnoseReport cmd_diagnose(const config::ExperimentConfig& cfg, const Dataset& data);
std::string diagnose_text(const DiagnoseReport& report);
std::string diagnose_csv(const DiagnoseReport& report);

diagnostics::MemoryCapacityReport cmd_mc(const config::ExperimentConfig& cfg);
reservoir::EspReport cmd_esp_check(const config::ExperimentConfig& cfg, const Dataset& data);

/// Per-structure pooled feature rows (plus label rows when present).
FeatureBundle cmd_embed(const config::ExperimentConfig& cfg, const Dataset& data);

struct SweepSpec {
    // axis -> list of raw values, applied over the base config
    std::vector<std::pair<std::string, std::vector<std::string>>> axes;
};

/// Lines of "key = v1; v2; ...". Values are ';'-separated so list-valued
/// keys keep their commas.
SweepSpec parse_sweep_text(const std::string& text, const std::string& origin);
SweepSpec load_sweep(const std::string& path);

struct SweepRow {
    std::vector<std::string> cell;  // one value per axis
    double chosen_lambda = 0.0;
    Metrics test;
    double sufficient_value = 0.0, necessary_value = 0.0;
    bool sufficient_holds = false, necessary_holds = false;
    bool has_stability = false;
    std::string error;  // nonempty when the cell failed
};

struct SweepTable {
    std::vector<std::string> axis_names;
    std::vector<SweepRow> rows;  // deterministic row-major order over the axes
};

SweepTable cmd_sweep(const config::ExperimentConfig& base, const SweepSpec& spec,
                     const Dataset& data, int workers = 1);
std::string sweep_csv(const SweepTable& table);

}  // namespace randnn::cli
