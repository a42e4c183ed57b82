#pragma once

#include "causalift/dataset.hpp"
#include "causalift/linalg.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace causalift {

/// Outcome of a partial-correlation significance test.
struct CiResult {
    double r = 0.0;
    double t_stat = 0.0;
    double p_value = 1.0;
    long n = 0;
    long k = 0;
};

double pearson(const Vector& x, const Vector& y);

/// Correlation of the residuals of x and y after least-squares regression on [1, Z].
/// With zero columns in Z this is exactly `pearson(x, y)`.
double partial_corr(const Vector& x, const Vector& y, const Matrix& Z);

/// Student-t test of a (partial) correlation with n - 2 - k degrees of freedom.
CiResult parcorr_test(double r, long n, long k);

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);
double student_t_cdf(double t, double dof);
double normal_cdf(double z);

/// Augmented Dickey-Fuller regression with constant, no trend.
struct AdfResult {
    double stat = 0.0;
    double p_value = 1.0;
    int n_lags_used = 0;
    long n_obs = 0;
    std::string regression = "constant";
    std::string lag_selection = "aic";

    bool stationary_at(double threshold) const { return p_value < threshold; }
};

/// Default maximum augmentation lag floor(12 * (n / 100)^(1/4)).
int adf_default_max_lag(long n);

/// Lag order chosen by AIC over 0..max_lag on a common sample, then refit.
AdfResult adf_test(const Vector& series, std::optional<int> max_lag = std::nullopt);

/// MacKinnon response-surface p-value for the constant-only ADF statistic.
double adf_pvalue(double stat);

/// output[i] = input[i + 1] - input[i].
Vector difference(const Vector& series);

enum class StationarityAction { kept, differenced, constant };
std::string to_string(StationarityAction action);

struct StationarityEntry {
    std::string variable;
    StationarityAction action = StationarityAction::kept;
    std::optional<double> adf_p;
    std::optional<double> adf_stat;
    /// ADF p-value re-checked after differencing.
    std::optional<double> p_after;
    bool still_nonstationary = false;
};

struct StationarityReport {
    double threshold = 0.01;
    std::vector<StationarityEntry> entries;
    int rows_dropped = 0;

    bool any_transformed() const { return rows_dropped > 0; }
};

nlohmann::json to_json(const StationarityReport& report);

/// Differences every column whose ADF p-value is >= threshold (one pass at most).
/// When anything is differenced the first row is dropped from all columns.
std::pair<TimeSeriesDataset, StationarityReport> make_stationary(const TimeSeriesDataset& ds,
                                                                 double threshold = 0.01);

}  // namespace causalift
