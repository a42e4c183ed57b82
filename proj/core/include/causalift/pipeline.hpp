#pragma once

#include "causalift/dataset.hpp"
#include "causalift/discovery.hpp"
#include "causalift/evaluation.hpp"
#include "causalift/features.hpp"
#include "causalift/graph.hpp"
#include "causalift/models.hpp"
#include "causalift/scm.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace causalift {

struct ExperimentConfig {
    /// Exactly one data source: a simulator spec or a directory of CSV files.
    std::optional<ScmSpec> simulator;
    std::optional<std::filesystem::path> data_dir;

    int n_runs = 20;
    double split_fraction = 0.5;
    std::vector<std::string> targets = {"ITE_Ener", "In_Temp"};
    DiscoveryConfig discovery;
    std::optional<EditSpec> edits;
    std::vector<SelectorMethod> selectors;
    std::vector<ModelFamily> families = {ModelFamily::ols, ModelFamily::lasso, ModelFamily::gbt, ModelFamily::mlp};
    int tuning_budget = 20;
    int k_folds = 3;
    int horizon = 5;
    double lasso_alpha = 0.1;
    double pca_variance = 0.85;
    ImportanceRule tree_rule = ImportanceRule::mean;
    bool per_run_discovery = false;
    std::filesystem::path output_dir = "results";
    std::uint64_t seed = 0;
    int threads = 0;

    ExperimentConfig();
    void validate() const;
};

/// Relative paths inside the file resolve against the file's directory.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
ExperimentConfig experiment_config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
nlohmann::json to_json(const ExperimentConfig& cfg);

/// Training half of one run; selectors and tuners only ever see this type.
struct TrainSplit {
    TimeSeriesDataset data;
};

/// Held-out half of one run; used for evaluation only.
struct TestSplit {
    TimeSeriesDataset data;
};

struct ExperimentHooks {
    /// Called on every test half right after splitting (used to poison test data in leakage checks).
    std::function<void(int run, TimeSeriesDataset& test)> on_test_split;
};

struct SelectionRecord {
    int run = 0;
    std::string target;
    std::string selector;
    nlohmann::json features;
    std::optional<std::string> error;
};

struct ResultsBundle {
    nlohmann::json config;
    TimeSeriesGraph discovered;
    TimeSeriesGraph final_graph;
    std::vector<TimeSeriesGraph> per_run_graphs;
    std::vector<EvalRow> rows;
    std::vector<SelectionRecord> selections;
    nlohmann::json aggregate;
    nlohmann::json profiles;
    std::string report;
};

/// Features for one selector, computed from the training half only.
FeatureSet select_features(SelectorMethod method, const TimeSeriesGraph& graph, const TrainSplit& train,
                           const std::string& target, const ExperimentConfig& cfg, std::uint64_t seed);

ResultsBundle run_experiment(const ExperimentConfig& cfg, const ExperimentHooks& hooks = {});
ResultsBundle run_experiment(const ExperimentConfig& cfg, std::vector<TimeSeriesDataset> datasets,
                             const ExperimentHooks& hooks = {});

/// Writes graph.json, graph_final.json, results.csv, results.json,
/// aggregate.json, profiles.json and report.md. Wall-clock timings go to
/// timings.json, the one file outside the determinism contract.
void write_bundle(const ResultsBundle& bundle, const std::filesystem::path& dir);

nlohmann::json results_json(const ResultsBundle& bundle);
std::string results_csv(const std::vector<EvalRow>& rows);

/// Markdown tables (one per target, full test and post-intervention), rows sorted by MAE.
std::string render_report(const nlohmann::json& results, const nlohmann::json& aggregate);

}  // namespace causalift
