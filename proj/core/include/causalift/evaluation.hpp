#pragma once

#include "causalift/dataset.hpp"
#include "causalift/features.hpp"
#include "causalift/models.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace causalift {

double mae(const Vector& y, const Vector& yhat);

struct MapeResult {
    std::optional<double> value;  // empty when every |y| < 1e-8
    std::size_t excluded = 0;
};

/// Samples with |y| < 1e-8 are excluded and counted.
MapeResult mape(const Vector& y, const Vector& yhat);

/// Half-open range of time indices the windows are clipped to.
struct TimeRange {
    std::size_t begin = 0;
    std::size_t end = 0;
};

/// For each event at t, {t+1, ..., t+horizon} clipped to `range`; empty windows dropped.
std::vector<std::vector<std::size_t>> intervention_windows(const std::vector<InterventionEvent>& events,
                                                           int horizon, TimeRange range);

/// Sorted union of all window indices.
std::vector<std::size_t> window_union(const std::vector<std::vector<std::size_t>>& windows);

struct EvalMetrics {
    std::size_t n_features = 0;
    double mae = 0.0;
    std::optional<double> mape;
    std::size_t mape_excluded = 0;
    std::optional<double> mae_w;
    std::optional<double> mape_w;
    std::size_t window_count = 0;
    std::vector<std::optional<double>> profile;  // offsets 1..horizon
};

EvalMetrics evaluate_predictions(const Vector& y, const Vector& yhat, const std::vector<std::size_t>& row_time_index,
                                 const std::vector<InterventionEvent>& events, int horizon);

EvalMetrics evaluate(const TrainedModel& model, const ModelInput& test, const std::vector<InterventionEvent>& events,
                     int horizon = 5);

struct EvalRow {
    int run = 0;
    std::string target;
    std::string selector;
    std::string family;
    EvalMetrics metrics;
    nlohmann::json hyperparams;
    std::vector<std::string> features;
    double runtime_seconds = 0.0;
    std::optional<std::string> error;
};

enum class Metric { mae, mape, mae_w, mape_w };
std::string to_string(Metric metric);
std::optional<double> metric_value(const EvalMetrics& metrics, Metric metric);

struct BestCounts {
    std::map<std::string, double> wins;
    int runs = 0;
    int tied_runs = 0;
};

/// Per run, the selector whose best family reaches the lowest metric gets one
/// win; ties split it evenly and are counted in `tied_runs`.
BestCounts best_counts(const std::vector<EvalRow>& rows, Metric metric, const std::string& target);

nlohmann::json to_json(const EvalMetrics& metrics);
nlohmann::json to_json(const EvalRow& row);

}  // namespace causalift
