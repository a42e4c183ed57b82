#include "causalift/evaluation.hpp"

#include "causalift/error.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <set>
#include <unordered_map>

namespace causalift {

using nlohmann::json;

namespace {

void check_lengths(const Vector& y, const Vector& yhat, const char* who) {
    if (y.size() != yhat.size()) {
        throw DataError(std::string(who) + ": length mismatch (" + std::to_string(y.size()) + " vs " +
                        std::to_string(yhat.size()) + ")");
    }
    if (y.size() == 0) {
        throw DataError(std::string(who) + ": empty input");
    }
}

}  // namespace

double mae(const Vector& y, const Vector& yhat) {
    check_lengths(y, yhat, "mae");
    return (y - yhat).cwiseAbs().sum() / static_cast<double>(y.size());
}

MapeResult mape(const Vector& y, const Vector& yhat) {
    check_lengths(y, yhat, "mape");
    MapeResult out;
    double sum = 0.0;
    std::size_t used = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (std::abs(y(i)) < 1e-8) {
            ++out.excluded;
            continue;
        }
        sum += std::abs((y(i) - yhat(i)) / y(i));
        ++used;
    }
    if (used > 0) {
        out.value = 100.0 * sum / static_cast<double>(used);
    }
    return out;
}

std::vector<std::vector<std::size_t>> intervention_windows(const std::vector<InterventionEvent>& events, int horizon,
                                                           TimeRange range) {
    if (horizon < 1) {
        throw DataError("intervention windows: horizon must be >= 1");
    }
    std::vector<std::vector<std::size_t>> windows;
    for (const auto& e : events) {
        std::vector<std::size_t> w;
        for (int j = 1; j <= horizon; ++j) {
            const std::size_t t = e.time_index + static_cast<std::size_t>(j);
            if (t >= range.begin && t < range.end) {
                w.push_back(t);
            }
        }
        if (!w.empty()) {
            windows.push_back(std::move(w));
        }
    }
    return windows;
}

std::vector<std::size_t> window_union(const std::vector<std::vector<std::size_t>>& windows) {
    std::set<std::size_t> all;
    for (const auto& w : windows) {
        all.insert(w.begin(), w.end());
    }
    return {all.begin(), all.end()};
}

EvalMetrics evaluate_predictions(const Vector& y, const Vector& yhat, const std::vector<std::size_t>& row_time_index,
                                 const std::vector<InterventionEvent>& events, int horizon) {
    check_lengths(y, yhat, "evaluate");
    if (row_time_index.size() != static_cast<std::size_t>(y.size())) {
        throw DataError("evaluate: row_time_index length mismatch");
    }
    EvalMetrics m;
    m.mae = mae(y, yhat);
    const auto full = mape(y, yhat);
    m.mape = full.value;
    m.mape_excluded = full.excluded;

    std::unordered_map<std::size_t, Eigen::Index> row_of;
    for (std::size_t r = 0; r < row_time_index.size(); ++r) {
        row_of.emplace(row_time_index[r], static_cast<Eigen::Index>(r));
    }
    const auto [lo, hi] = std::minmax_element(row_time_index.begin(), row_time_index.end());
    const auto windows = intervention_windows(events, horizon, TimeRange{*lo, *hi + 1});
    m.window_count = windows.size();

    const auto indices = window_union(windows);
    std::vector<Eigen::Index> rows;
    for (auto t : indices) {
        if (const auto it = row_of.find(t); it != row_of.end()) {
            rows.push_back(it->second);
        }
    }
    if (!rows.empty()) {
        Vector yw(static_cast<Eigen::Index>(rows.size()));
        Vector pw(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            yw(static_cast<Eigen::Index>(i)) = y(rows[i]);
            pw(static_cast<Eigen::Index>(i)) = yhat(rows[i]);
        }
        m.mae_w = mae(yw, pw);
        m.mape_w = mape(yw, pw).value;
    }

    m.profile.assign(static_cast<std::size_t>(horizon), std::nullopt);
    for (int j = 1; j <= horizon; ++j) {
        double sum = 0.0;
        int count = 0;
        for (const auto& e : events) {
            const auto it = row_of.find(e.time_index + static_cast<std::size_t>(j));
            if (it != row_of.end()) {
                sum += std::abs(y(it->second) - yhat(it->second));
                ++count;
            }
        }
        if (count > 0) {
            m.profile[static_cast<std::size_t>(j - 1)] = sum / count;
        }
    }
    return m;
}

EvalMetrics evaluate(const TrainedModel& model, const ModelInput& test, const std::vector<InterventionEvent>& events,
                     int horizon) {
    const Vector pred = predict(model, test.X);
    auto m = evaluate_predictions(test.y, pred, test.row_time_index, events, horizon);
    m.n_features = static_cast<std::size_t>(test.X.cols());
    return m;
}

std::string to_string(Metric metric) {
    switch (metric) {
        case Metric::mae: return "mae";
        case Metric::mape: return "mape";
        case Metric::mae_w: return "mae_w";
        case Metric::mape_w: return "mape_w";
    }
    return "mae";
}

std::optional<double> metric_value(const EvalMetrics& metrics, Metric metric) {
    switch (metric) {
        case Metric::mae: return metrics.mae;
        case Metric::mape: return metrics.mape;
        case Metric::mae_w: return metrics.mae_w;
        case Metric::mape_w: return metrics.mape_w;
    }
    return std::nullopt;
}

BestCounts best_counts(const std::vector<EvalRow>& rows, Metric metric, const std::string& target) {
    // run -> selector -> best value over families
    std::map<int, std::map<std::string, double>> best;
    std::set<std::string> selectors;
    for (const auto& r : rows) {
        if (r.target != target) {
            continue;
        }
        selectors.insert(r.selector);
        if (r.error) {
            continue;
        }
        const auto v = metric_value(r.metrics, metric);
        if (!v) {
            continue;
        }
        auto& slot = best[r.run];
        const auto it = slot.find(r.selector);
        if (it == slot.end() || *v < it->second) {
            slot[r.selector] = *v;
        }
    }
    BestCounts out;
    for (const auto& s : selectors) {
        out.wins[s] = 0.0;
    }
    for (const auto& [run, per_selector] : best) {
        if (per_selector.empty()) {
            continue;
        }
        double lowest = std::numeric_limits<double>::infinity();
        for (const auto& [s, v] : per_selector) {
            lowest = std::min(lowest, v);
        }
        std::vector<std::string> winners;
        for (const auto& [s, v] : per_selector) {
            if (v == lowest) {
                winners.push_back(s);
            }
        }
        for (const auto& w : winners) {
            out.wins[w] += 1.0 / static_cast<double>(winners.size());
        }
        ++out.runs;
        if (winners.size() > 1) {
            ++out.tied_runs;
        }
    }
    return out;
}

namespace {

json opt(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

}  // namespace

json to_json(const EvalMetrics& m) {
    json profile = json::array();
    for (const auto& p : m.profile) {
        profile.push_back(opt(p));
    }
    return {{"n_features", m.n_features}, {"mae", m.mae},         {"mape", opt(m.mape)},
            {"mape_excluded", m.mape_excluded}, {"mae_w", opt(m.mae_w)}, {"mape_w", opt(m.mape_w)},
            {"windows", m.window_count},  {"profile", profile}};
}

json to_json(const EvalRow& row) {
    json out = {{"run", row.run},
                {"target", row.target},
                {"selector", row.selector},
                {"family", row.family},
                {"metrics", to_json(row.metrics)},
                {"hyperparams", row.hyperparams},
                {"features", row.features}};
    out["error"] = row.error ? json(*row.error) : json(nullptr);
    return out;
}

}  // namespace causalift
