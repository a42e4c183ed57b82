#pragma once

#include "causalift/linalg.hpp"

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace causalift {

struct Variable {
    std::string name;
    std::string unit;
};

struct InterventionEvent {
    std::size_t time_index = 0;
    std::string variable;
    double new_value = 0.0;

    friend bool operator==(const InterventionEvent&, const InterventionEvent&) = default;
};

/// One predictor column of a lag-expanded design: `variable` observed `lag` steps back.
struct LagColumn {
    std::string variable;
    int lag = 1;

    friend auto operator<=>(const LagColumn&, const LagColumn&) = default;
};

std::string to_string(const LagColumn& column);

/// Column-named T x V matrix of a regularly sampled multivariate series.
///
/// Immutable after construction; the constructor enforces unique names,
/// finite values and intervention indices inside [0, T).
class TimeSeriesDataset {
public:
    TimeSeriesDataset(std::vector<Variable> variables, Matrix values, std::string step = "1h",
                      std::vector<InterventionEvent> interventions = {},
                      std::optional<std::uint64_t> seed = std::nullopt);

    const std::vector<Variable>& variables() const noexcept { return variables_; }
    std::vector<std::string> names() const;
    const Matrix& values() const noexcept { return values_; }
    Eigen::Index rows() const noexcept { return values_.rows(); }
    Eigen::Index cols() const noexcept { return values_.cols(); }
    const std::string& step() const noexcept { return step_; }
    const std::vector<InterventionEvent>& interventions() const noexcept { return interventions_; }
    std::optional<std::uint64_t> seed() const noexcept { return seed_; }

    /// Column index of `name`; throws DataError when absent.
    Eigen::Index index_of(const std::string& name) const;
    std::optional<Eigen::Index> find(const std::string& name) const;
    Vector column(const std::string& name) const { return values_.col(index_of(name)); }

    /// Rows [begin, end) with interventions re-based to the slice.
    TimeSeriesDataset slice(Eigen::Index begin, Eigen::Index end) const;
    /// Same metadata, new values of identical shape.
    TimeSeriesDataset with_values(Matrix values) const;

private:
    std::vector<Variable> variables_;
    Matrix values_;
    std::string step_;
    std::vector<InterventionEvent> interventions_;
    std::optional<std::uint64_t> seed_;
};

/// Lag-expanded regression problem for one target.
///
/// Row r holds, for each column (v, lag), the value of v at
/// `row_time_index[r] - lag`; `y[r]` is the target at `row_time_index[r]`.
struct LaggedDesign {
    std::string target;
    int tau_max = 1;
    std::vector<LagColumn> columns;
    Matrix X;
    Vector y;
    std::vector<std::size_t> row_time_index;
};

/// Every (variable, lag) pair, variable-major in dataset order, lag ascending.
std::vector<LagColumn> full_lag_columns(const std::vector<std::string>& variables, int tau_max);

LaggedDesign build_lagged_design(const TimeSeriesDataset& ds, const std::string& target, int tau_max,
                                 std::optional<std::span<const LagColumn>> subset = std::nullopt);

/// First floor(fraction * T) rows and the remainder; never shuffles.
std::pair<TimeSeriesDataset, TimeSeriesDataset> temporal_split(const TimeSeriesDataset& ds, double fraction);

/// Reads `path` and, if present, the sidecar `<stem>.meta.json` beside it.
TimeSeriesDataset read_csv(const std::filesystem::path& path);
/// Writes `path` plus the sidecar; values use shortest round-trip formatting.
void write_csv(const TimeSeriesDataset& ds, const std::filesystem::path& path);

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

}  // namespace causalift
