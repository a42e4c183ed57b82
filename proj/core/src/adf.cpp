#include "causalift/error.hpp"
#include "causalift/stats.hpp"

#include <cmath>
#include <limits>

namespace causalift {

namespace {

// MacKinnon (1994) response-surface coefficients for one series, constant-only
// regression: below kTauStar use the small-p polynomial, above it the large-p one.
constexpr double kTauMax = 2.74;
constexpr double kTauMin = -18.83;
constexpr double kTauStar = -1.61;
constexpr double kSmallP[] = {2.1659, 1.4412, 0.038269};
constexpr double kLargeP[] = {1.7339, 0.93202, -0.12745, -0.010368};

struct RegressionRows {
    Matrix X;  // [1, y_{t-1}, dy_{t-1}, ..., dy_{t-p}]
    Vector dy;
};

// Rows for t = first .. n-2 of the differenced series (dy[t] = y[t+1] - y[t]).
RegressionRows regression_rows(const Vector& y, const Vector& dy, int lags, int first) {
    const Eigen::Index rows = dy.size() - first;
    RegressionRows out;
    out.X.resize(rows, lags + 2);
    out.dy = dy.tail(rows);
    out.X.col(0).setOnes();
    out.X.col(1) = y.segment(first, rows);
    for (int i = 1; i <= lags; ++i) {
        out.X.col(1 + i) = dy.segment(first - i, rows);
    }
    return out;
}

}  // namespace

int adf_default_max_lag(long n) {
    return static_cast<int>(std::floor(12.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)));
}

double adf_pvalue(double stat) {
    if (stat > kTauMax) return 1.0;
    if (stat < kTauMin) return 0.0;
    double z = 0.0;
    if (stat <= kTauStar) {
        z = kSmallP[0] + kSmallP[1] * stat + kSmallP[2] * stat * stat;
    } else {
        z = kLargeP[0] + stat * (kLargeP[1] + stat * (kLargeP[2] + stat * kLargeP[3]));
    }
    return normal_cdf(z);
}

AdfResult adf_test(const Vector& series, std::optional<int> max_lag) {
    const long n = series.size();
    if (n < 20) {
        throw DataError("adf_test needs at least 20 observations");
    }
    if ((series.array() == series(0)).all()) {
        throw DegenerateError("adf_test on a constant series");
    }
    int maxlag = max_lag.value_or(adf_default_max_lag(n));
    maxlag = std::min<long>(maxlag, n / 2 - 2);
    if (maxlag < 0) {
        throw DataError("adf_test: series too short for the requested lag order");
    }
    const Vector dy = difference(series);

    // AIC over a common sample using nested Gram sub-blocks.
    const RegressionRows common = regression_rows(series, dy, maxlag, maxlag);
    const auto nobs = static_cast<double>(common.dy.size());
    const Matrix gram = common.X.transpose() * common.X;
    const Vector xty = common.X.transpose() * common.dy;
    const double yty = common.dy.squaredNorm();
    const double tss = (common.dy.array() - common.dy.mean()).square().sum();

    int best_lag = -1;
    double best_aic = std::numeric_limits<double>::infinity();
    for (int p = 0; p <= maxlag; ++p) {
        const int k = p + 2;
        Eigen::LDLT<Matrix> ldlt(gram.topLeftCorner(k, k));
        if (ldlt.info() != Eigen::Success) {
            continue;
        }
        const Vector d = ldlt.vectorD().cwiseAbs();
        if (d.minCoeff() <= 1e-10 * d.maxCoeff()) {
            continue;  // collinear lag structure (e.g. exactly periodic series)
        }
        const Vector beta = ldlt.solve(xty.head(k));
        const double ssr = yty - beta.dot(xty.head(k));
        if (!(ssr > 1e-12 * tss)) {
            continue;
        }
        const double aic = nobs * std::log(ssr / nobs) + 2.0 * k;
        if (aic < best_aic) {
            best_aic = aic;
            best_lag = p;
        }
    }
    if (best_lag < 0) {
        throw DegenerateError("adf_test: no lag order gives a non-degenerate regression");
    }

    const RegressionRows full = regression_rows(series, dy, best_lag, best_lag);
    Eigen::ColPivHouseholderQR<Matrix> qr(full.X);
    const Vector beta = qr.solve(full.dy);
    const Vector resid = full.dy - full.X * beta;
    const auto rows = static_cast<double>(full.X.rows());
    const double sigma2 = resid.squaredNorm() / (rows - static_cast<double>(full.X.cols()));
    const Matrix xtx_inv = (full.X.transpose() * full.X).ldlt().solve(Matrix::Identity(full.X.cols(), full.X.cols()));
    const double se = std::sqrt(sigma2 * xtx_inv(1, 1));

    AdfResult out;
    out.stat = beta(1) / se;
    out.p_value = adf_pvalue(out.stat);
    out.n_lags_used = best_lag;
    out.n_obs = full.X.rows();
    return out;
}

}  // namespace causalift
