#include "causalift/stats.hpp"

#include "causalift/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace causalift {

namespace {

void require_same_length(const Vector& x, const Vector& y) {
    if (x.size() != y.size()) {
        throw DataError("vectors differ in length (" + std::to_string(x.size()) + " vs " + std::to_string(y.size()) +
                        ")");
    }
}

// Sum of squared deviations, or 0 when it is indistinguishable from rounding noise.
double centered_ss(const Vector& v, Vector& centered) {
    const double m = v.mean();
    centered = v.array() - m;
    const double ss = centered.squaredNorm();
    const double floor = static_cast<double>(v.size()) * std::pow(1e-14 * std::max(std::abs(m), 1e-300), 2);
    return ss > floor ? ss : 0.0;
}

// Continued fraction for the incomplete beta function (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIter = 100000;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) {
            return h;
        }
    }
    return h;
}

}  // namespace

double pearson(const Vector& x, const Vector& y) {
    require_same_length(x, y);
    if (x.size() < 3) {
        throw DataError("pearson needs at least 3 samples");
    }
    Vector xc;
    Vector yc;
    const double sxx = centered_ss(x, xc);
    const double syy = centered_ss(y, yc);
    if (sxx == 0.0 || syy == 0.0) {
        throw DegenerateError("correlation of a constant vector is undefined");
    }
    const double r = xc.dot(yc) / std::sqrt(sxx * syy);
    return std::clamp(r, -1.0, 1.0);
}

double partial_corr(const Vector& x, const Vector& y, const Matrix& Z) {
    require_same_length(x, y);
    if (Z.cols() == 0) {
        return pearson(x, y);
    }
    if (Z.rows() != x.size()) {
        throw DataError("conditioning matrix row count differs from sample size");
    }
    if (x.size() <= Z.cols() + 2) {
        throw DataError("partial correlation needs n > k + 2");
    }
    const Residualizer residualizer(Z);
    const Vector rx = residualizer.residuals(x);
    const Vector ry = residualizer.residuals(y);
    // A residual that is rounding noise relative to the input means the
    // variable is an exact linear function of the conditioning set.
    Vector scratch;
    const double sx = centered_ss(x, scratch);
    const double sy = centered_ss(y, scratch);
    const double rxx = rx.squaredNorm();
    const double ryy = ry.squaredNorm();
    if (sx == 0.0 || sy == 0.0 || rxx <= 1e-20 * sx || ryy <= 1e-20 * sy) {
        throw DegenerateError("residual variance vanishes given the conditioning set");
    }
    return std::clamp(rx.dot(ry) / std::sqrt(rxx * ryy), -1.0, 1.0);
}

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw DataError("incomplete_beta requires a, b > 0");
    }
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return std::exp(log_front) * beta_continued_fraction(a, b, x) / a;
    }
    return 1.0 - std::exp(log_front) * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double dof) {
    if (!(dof > 0.0)) {
        throw DataError("student_t_cdf requires dof > 0");
    }
    if (std::isinf(t)) {
        return t > 0 ? 1.0 : 0.0;
    }
    const double x = dof / (dof + t * t);
    const double tail = 0.5 * incomplete_beta(0.5 * dof, 0.5, x);
    return t > 0 ? 1.0 - tail : tail;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

CiResult parcorr_test(double r, long n, long k) {
    if (n <= k + 2) {
        throw DataError("parcorr_test requires n > k + 2 (n=" + std::to_string(n) + ", k=" + std::to_string(k) + ")");
    }
    if (!(std::abs(r) <= 1.0)) {
        throw DataError("correlation outside [-1, 1]");
    }
    CiResult out;
    out.r = r;
    out.n = n;
    out.k = k;
    const double dof = static_cast<double>(n - 2 - k);
    if (std::abs(r) >= 1.0) {
        out.t_stat = std::copysign(std::numeric_limits<double>::infinity(), r);
        out.p_value = 0.0;
        return out;
    }
    out.t_stat = r * std::sqrt(dof / (1.0 - r * r));
    // Two-sided tail directly from the incomplete beta avoids 1 - cdf cancellation.
    out.p_value = std::clamp(incomplete_beta(0.5 * dof, 0.5, dof / (dof + out.t_stat * out.t_stat)), 0.0, 1.0);
    return out;
}

Vector difference(const Vector& series) {
    if (series.size() < 2) {
        throw DataError("difference needs at least 2 values");
    }
    return series.tail(series.size() - 1) - series.head(series.size() - 1);
}

std::string to_string(StationarityAction action) {
    switch (action) {
        case StationarityAction::kept: return "kept";
        case StationarityAction::differenced: return "differenced";
        case StationarityAction::constant: return "constant";
    }
    return "kept";
}

nlohmann::json to_json(const StationarityReport& report) {
    nlohmann::json entries = nlohmann::json::array();
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    for (const auto& e : report.entries) {
        entries.push_back({{"variable", e.variable},
                           {"action", to_string(e.action)},
                           {"adf_p", opt(e.adf_p)},
                           {"adf_stat", opt(e.adf_stat)},
                           {"p_after", opt(e.p_after)},
                           {"still_nonstationary", e.still_nonstationary}});
    }
    return {{"threshold", report.threshold},
            {"adf_regression", "constant"},
            {"rows_dropped", report.rows_dropped},
            {"columns", entries}};
}

std::pair<TimeSeriesDataset, StationarityReport> make_stationary(const TimeSeriesDataset& ds, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw DataError("stationarity threshold must lie in (0, 1)");
    }
    StationarityReport report;
    report.threshold = threshold;
    const auto& values = ds.values();
    const Eigen::Index T = ds.rows();
    std::vector<bool> diff(static_cast<std::size_t>(ds.cols()), false);

    for (Eigen::Index j = 0; j < ds.cols(); ++j) {
        StationarityEntry entry;
        entry.variable = ds.variables()[static_cast<std::size_t>(j)].name;
        const Vector col = values.col(j);
        if ((col.array() == col(0)).all()) {
            entry.action = StationarityAction::constant;
            report.entries.push_back(entry);
            continue;
        }
        const AdfResult adf = adf_test(col);
        entry.adf_p = adf.p_value;
        entry.adf_stat = adf.stat;
        if (!adf.stationary_at(threshold)) {
            entry.action = StationarityAction::differenced;
            diff[static_cast<std::size_t>(j)] = true;
            const Vector d = difference(col);
            if ((d.array() != d(0)).any() && d.size() >= 20) {
                entry.p_after = adf_test(d).p_value;
                entry.still_nonstationary = !(*entry.p_after < threshold);
            }
        }
        report.entries.push_back(entry);
    }

    if (std::none_of(diff.begin(), diff.end(), [](bool b) { return b; })) {
        return {ds, report};
    }
    report.rows_dropped = 1;
    Matrix out(T - 1, ds.cols());
    for (Eigen::Index j = 0; j < ds.cols(); ++j) {
        if (diff[static_cast<std::size_t>(j)]) {
            out.col(j) = difference(values.col(j));
        } else {
            out.col(j) = values.col(j).tail(T - 1);
        }
    }
    std::vector<InterventionEvent> events;
    for (const auto& e : ds.interventions()) {
        if (e.time_index >= 1) {
            events.push_back({e.time_index - 1, e.variable, e.new_value});
        }
    }
    return {TimeSeriesDataset(ds.variables(), std::move(out), ds.step(), std::move(events), ds.seed()), report};
}

}  // namespace causalift
