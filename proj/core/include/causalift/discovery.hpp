#pragma once

#include "causalift/dataset.hpp"
#include "causalift/graph.hpp"
#include "causalift/stats.hpp"

#include <optional>
#include <string>
#include <vector>

namespace causalift {

struct DiscoveryConfig {
    double alpha = 0.01;
    int max_scan_lag = 24;
    std::optional<int> tau_max;
    std::optional<int> max_condition_size;
    double stationarity_threshold = 0.01;
    /// Exactly periodic columns (x[t] == x[t - P], P <= max_scan_lag) carry no
    /// innovation; they stay candidate parents but are not searched as targets.
    bool skip_deterministic_targets = true;
    int threads = 0;

    void validate() const;
};

/// Book-keeping for one lagged candidate parent during condition selection.
struct CandidateState {
    LagColumn link;
    double min_abs_stat = 1.0;
    double last_p = 0.0;
    double last_r = 0.0;
    int last_condition_size = 0;
    bool alive = true;
};

struct Pc1Result {
    std::string target;
    std::vector<CandidateState> candidates;
    std::vector<AuditEntry> audit;
    int iterations = 0;

    std::vector<CandidateState> parents() const;
};

/// Mean over ordered pairs (i != j) of the lag maximizing |corr(x_i[t - lag], x_j[t])|,
/// rounded half up and clamped to >= 1. Constant columns are excluded.
int select_tau_max(const TimeSeriesDataset& ds, int max_scan_lag);

/// Smallest P in 1..max_period with x[t] == x[t - P] for every t, if any.
std::optional<int> exact_period(const Vector& series, int max_period);

/// Condition-selection stage of PC1 with partial-correlation tests. The
/// dataset is used as given (no stationarity transform); tau_max must be set
/// in `cfg` or passed explicitly.
Pc1Result pc1_parents(const TimeSeriesDataset& ds, const std::string& target, const DiscoveryConfig& cfg,
                      int tau_max);

/// Stationarize, choose tau_max, run PC1 for every variable and assemble the graph.
TimeSeriesGraph discover_graph(const TimeSeriesDataset& ds, const DiscoveryConfig& cfg);

}  // namespace causalift
