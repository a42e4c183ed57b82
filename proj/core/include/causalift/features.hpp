#pragma once

#include "causalift/dataset.hpp"
#include "causalift/graph.hpp"
#include "causalift/linalg.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace causalift {

enum class SelectorMethod { causal_lags, causal_all, all, rfe, pca, tree, lasso };

std::string to_string(SelectorMethod method);
SelectorMethod selector_from_string(const std::string& text);
const std::vector<SelectorMethod>& all_selectors();
bool is_causal(SelectorMethod method);

/// Principal components fitted on a standardized lag-expanded training design.
struct PcaComponents {
    std::vector<LagColumn> basis;  // the full design columns the loadings refer to
    Vector center;
    Vector scale;
    Matrix loadings;  // basis.size() x k
    std::vector<double> explained_ratio;
};

/// Predictor set for one target: (variable, lag) columns or, for PCA, components.
struct FeatureSet {
    SelectorMethod method = SelectorMethod::all;
    std::string target;
    std::vector<LagColumn> columns;
    std::optional<PcaComponents> pca;
    nlohmann::json params = nlohmann::json::object();
    std::vector<std::string> notes;

    std::size_t size() const;
    /// True when the selector legitimately returned nothing.
    bool empty() const { return size() == 0; }
    std::vector<std::string> schema() const;
};

FeatureSet causal_lags(const TimeSeriesGraph& graph, const std::string& target);
FeatureSet causal_all(const TimeSeriesGraph& graph, const std::string& target);
FeatureSet all_features(const std::vector<std::string>& variables, int tau_max, const std::string& target);

/// Recursive elimination by smallest |standardized OLS coefficient|, one column
/// per step. Default keep count is floor(columns / 2).
FeatureSet rfe(const LaggedDesign& design, std::optional<int> n_keep = std::nullopt);

FeatureSet pca_select(const LaggedDesign& design, double variance_target = 0.85);

enum class ImportanceRule { mean, zero };
FeatureSet tree_select(const LaggedDesign& design, ImportanceRule rule = ImportanceRule::mean,
                       std::uint64_t seed = 0);

FeatureSet lasso_select(const LaggedDesign& design, double alpha = 0.1);

/// Inputs ready for a model: raw lagged columns or PCA scores.
struct ModelInput {
    Matrix X;
    Vector y;
    std::vector<std::size_t> row_time_index;
    std::vector<std::string> schema;
};

/// Builds the model input of `features` on `ds` (any split) using `tau_max` rows of history.
ModelInput model_input(const FeatureSet& features, const TimeSeriesDataset& ds, int tau_max);

nlohmann::json to_json(const FeatureSet& features);
FeatureSet feature_set_from_json(const nlohmann::json& doc);

}  // namespace causalift
