#include "causalift/dataset.hpp"

#include "causalift/error.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace causalift {

std::string to_string(const LagColumn& column) {
    return column.variable + "@" + std::to_string(column.lag);
}

TimeSeriesDataset::TimeSeriesDataset(std::vector<Variable> variables, Matrix values, std::string step,
                                     std::vector<InterventionEvent> interventions,
                                     std::optional<std::uint64_t> seed)
    : variables_(std::move(variables)),
      values_(std::move(values)),
      step_(std::move(step)),
      interventions_(std::move(interventions)),
      seed_(seed) {
    if (variables_.empty()) {
        throw DataError("dataset needs at least one variable");
    }
    if (static_cast<Eigen::Index>(variables_.size()) != values_.cols()) {
        throw DataError("dataset has " + std::to_string(variables_.size()) + " names but " +
                        std::to_string(values_.cols()) + " columns");
    }
    if (values_.rows() < 1) {
        throw DataError("dataset has no rows");
    }
    std::unordered_set<std::string> seen;
    for (const auto& v : variables_) {
        if (v.name.empty()) {
            throw DataError("empty variable name");
        }
        if (!seen.insert(v.name).second) {
            throw DataError("duplicate variable name '" + v.name + "'");
        }
    }
    for (Eigen::Index j = 0; j < values_.cols(); ++j) {
        for (Eigen::Index i = 0; i < values_.rows(); ++i) {
            if (!std::isfinite(values_(i, j))) {
                throw DataError("non-finite value at row " + std::to_string(i) + ", column '" + variables_[j].name +
                                "'");
            }
        }
    }
    for (const auto& e : interventions_) {
        if (!seen.contains(e.variable)) {
            throw DataError("intervention targets unknown variable '" + e.variable + "'");
        }
        if (e.time_index >= static_cast<std::size_t>(values_.rows())) {
            throw DataError("intervention at t=" + std::to_string(e.time_index) + " outside [0, " +
                            std::to_string(values_.rows()) + ")");
        }
    }
    std::stable_sort(interventions_.begin(), interventions_.end(),
                     [](const auto& a, const auto& b) { return a.time_index < b.time_index; });
}

std::vector<std::string> TimeSeriesDataset::names() const {
    std::vector<std::string> out;
    out.reserve(variables_.size());
    for (const auto& v : variables_) {
        out.push_back(v.name);
    }
    return out;
}

std::optional<Eigen::Index> TimeSeriesDataset::find(const std::string& name) const {
    for (std::size_t j = 0; j < variables_.size(); ++j) {
        if (variables_[j].name == name) {
            return static_cast<Eigen::Index>(j);
        }
    }
    return std::nullopt;
}

Eigen::Index TimeSeriesDataset::index_of(const std::string& name) const {
    if (auto idx = find(name)) {
        return *idx;
    }
    throw DataError("unknown variable '" + name + "'");
}

TimeSeriesDataset TimeSeriesDataset::slice(Eigen::Index begin, Eigen::Index end) const {
    if (begin < 0 || end > rows() || begin >= end) {
        throw DataError("invalid slice [" + std::to_string(begin) + ", " + std::to_string(end) + ")");
    }
    std::vector<InterventionEvent> events;
    for (const auto& e : interventions_) {
        const auto t = static_cast<Eigen::Index>(e.time_index);
        if (t >= begin && t < end) {
            events.push_back({static_cast<std::size_t>(t - begin), e.variable, e.new_value});
        }
    }
    return TimeSeriesDataset(variables_, values_.middleRows(begin, end - begin), step_, std::move(events), seed_);
}

TimeSeriesDataset TimeSeriesDataset::with_values(Matrix values) const {
    if (values.rows() != rows() || values.cols() != cols()) {
        throw DataError("with_values: shape mismatch");
    }
    return TimeSeriesDataset(variables_, std::move(values), step_, interventions_, seed_);
}

std::vector<LagColumn> full_lag_columns(const std::vector<std::string>& variables, int tau_max) {
    std::vector<LagColumn> out;
    out.reserve(variables.size() * static_cast<std::size_t>(std::max(tau_max, 0)));
    for (const auto& v : variables) {
        for (int lag = 1; lag <= tau_max; ++lag) {
            out.push_back({v, lag});
        }
    }
    return out;
}

LaggedDesign build_lagged_design(const TimeSeriesDataset& ds, const std::string& target, int tau_max,
                                 std::optional<std::span<const LagColumn>> subset) {
    if (tau_max < 1) {
        throw DataError("tau_max must be >= 1");
    }
    if (tau_max >= ds.rows()) {
        throw DataError("tau_max " + std::to_string(tau_max) + " leaves no rows (T = " + std::to_string(ds.rows()) +
                        ")");
    }
    const Eigen::Index target_col = ds.index_of(target);

    LaggedDesign design;
    design.target = target;
    design.tau_max = tau_max;
    if (subset) {
        design.columns.assign(subset->begin(), subset->end());
    } else {
        design.columns = full_lag_columns(ds.names(), tau_max);
    }

    std::vector<Eigen::Index> source(design.columns.size());
    for (std::size_t c = 0; c < design.columns.size(); ++c) {
        const auto& col = design.columns[c];
        if (col.lag < 1 || col.lag > tau_max) {
            throw DataError("lag " + std::to_string(col.lag) + " of '" + col.variable + "' outside 1.." +
                            std::to_string(tau_max));
        }
        source[c] = ds.index_of(col.variable);
    }

    const Eigen::Index n = ds.rows() - tau_max;
    const auto& values = ds.values();
    design.X.resize(n, static_cast<Eigen::Index>(design.columns.size()));
    for (std::size_t c = 0; c < design.columns.size(); ++c) {
        const int lag = design.columns[c].lag;
        design.X.col(static_cast<Eigen::Index>(c)) = values.col(source[c]).segment(tau_max - lag, n);
    }
    design.y = values.col(target_col).segment(tau_max, n);
    design.row_time_index.resize(static_cast<std::size_t>(n));
    for (Eigen::Index r = 0; r < n; ++r) {
        design.row_time_index[static_cast<std::size_t>(r)] = static_cast<std::size_t>(r + tau_max);
    }
    return design;
}

std::pair<TimeSeriesDataset, TimeSeriesDataset> temporal_split(const TimeSeriesDataset& ds, double fraction) {
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw DataError("split fraction must lie in (0, 1)");
    }
    const auto n_train = static_cast<Eigen::Index>(std::floor(fraction * static_cast<double>(ds.rows())));
    if (n_train < 1 || n_train >= ds.rows()) {
        throw DataError("split fraction " + std::to_string(fraction) + " leaves an empty half (T = " +
                        std::to_string(ds.rows()) + ")");
    }
    return {ds.slice(0, n_train), ds.slice(n_train, ds.rows())};
}

}  // namespace causalift
