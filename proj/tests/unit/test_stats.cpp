#include "causalift/error.hpp"
#include "causalift/stats.hpp"

#include "test_support.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <doctest.h>

using namespace causalift;

namespace {

Vector gaussian(std::mt19937_64& rng, Eigen::Index n) {
    std::normal_distribution<double> n01;
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        v(i) = n01(rng);
    }
    return v;
}

/// Residual of v on [1, Z] by the normal equations; deliberately not the library path.
Vector residual(const Vector& v, const Matrix& Z) {
    Matrix D(Z.rows(), Z.cols() + 1);
    D.col(0).setOnes();
    D.rightCols(Z.cols()) = Z;
    const Vector beta = (D.transpose() * D).ldlt().solve(D.transpose() * v);
    return v - D * beta;
}

double brute_pearson(const Vector& x, const Vector& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        mx += x(i);
        my += y(i);
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        sxy += (x(i) - mx) * (y(i) - my);
        sxx += (x(i) - mx) * (x(i) - mx);
        syy += (y(i) - my) * (y(i) - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST_CASE("pearson matches a two-pass oracle") {
    std::mt19937_64 rng(2);
    for (int rep = 0; rep < 50; ++rep) {
        const Vector x = gaussian(rng, 100);
        const Vector y = 0.3 * x + gaussian(rng, 100);
        CHECK(pearson(x, y) == doctest::Approx(brute_pearson(x, y)).epsilon(1e-12));
    }
    Vector c = Vector::Constant(10, 2.0);
    CHECK_THROWS_AS(pearson(c, gaussian(rng, 10)), DegenerateError);
}

TEST_CASE("partial correlation equals the residual-correlation oracle") {
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 50; ++rep) {
        const Eigen::Index n = 200;
        Matrix Z(n, 1 + rep % 4);
        for (Eigen::Index j = 0; j < Z.cols(); ++j) {
            Z.col(j) = gaussian(rng, n);
        }
        const Vector x = Z.rowwise().sum() + gaussian(rng, n);
        const Vector y = Z.col(0) * 2.0 + gaussian(rng, n);
        const double oracle = brute_pearson(residual(x, Z), residual(y, Z));
        CHECK(partial_corr(x, y, Z) == doctest::Approx(oracle).epsilon(1e-10));
    }
    const Vector x = gaussian(rng, 50);
    const Vector y = gaussian(rng, 50);
    CHECK(partial_corr(x, y, Matrix(50, 0)) == pearson(x, y));
}

TEST_CASE("partial correlation flags collinear conditioning sets") {
    std::mt19937_64 rng(4);
    const Vector a = gaussian(rng, 80);
    Matrix Z(80, 2);
    Z.col(0) = a;
    Z.col(1) = 2.0 * a;
    CHECK_THROWS_AS(partial_corr(gaussian(rng, 80), gaussian(rng, 80), Z), CollinearityError);
}

TEST_CASE("special functions agree with Boost.Math") {
    for (double a : {0.5, 1.0, 3.5, 40.0}) {
        for (double b : {0.5, 2.0, 7.0, 250.0}) {
            for (double x : {1e-6, 0.1, 0.37, 0.5, 0.9, 0.999}) {
                CHECK(incomplete_beta(a, b, x) == doctest::Approx(boost::math::ibeta(a, b, x)).epsilon(1e-11));
            }
        }
    }
    for (double dof : {1.0, 2.5, 10.0, 97.0, 8000.0}) {
        boost::math::students_t dist(dof);
        for (double t : {-40.0, -3.2, -1.0, 0.0, 0.4, 2.0, 6.0}) {
            CHECK(student_t_cdf(t, dof) == doctest::Approx(boost::math::cdf(dist, t)).epsilon(1e-11));
        }
    }
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
    CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
}

TEST_CASE("parcorr test p-value is the two-sided Student-t tail") {
    for (long n : {30L, 200L, 5000L}) {
        for (long k : {0L, 3L, 10L}) {
            for (double r : {-0.3, 0.0, 0.05, 0.2, 0.9}) {
                const auto res = parcorr_test(r, n, k);
                const double dof = static_cast<double>(n - 2 - k);
                const double t = r * std::sqrt(dof / (1.0 - r * r));
                boost::math::students_t dist(dof);
                const double p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
                CHECK(res.t_stat == doctest::Approx(t).epsilon(1e-12));
                CHECK(res.p_value == doctest::Approx(p).epsilon(1e-10));
            }
        }
    }
    CHECK_THROWS_AS(parcorr_test(0.1, 5, 3), DataError);
}

TEST_CASE("ADF statistic matches statsmodels on committed series") {
    const auto fx = testing::load_json(testing::source_path("tests/data/adf_statsmodels.json"));
    for (const auto& c : fx["cases"]) {
        const auto values = c["series"].get<std::vector<double>>();
        const Vector x = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
        CAPTURE(c["name"].get<std::string>());
        CHECK(adf_default_max_lag(x.size()) == c["max_lag"].get<int>());
        const auto res = adf_test(x);
        CHECK(res.n_lags_used == c["lags"].get<int>());
        CHECK(res.n_obs == c["n_obs"].get<long>());
        CHECK(testing::rel_diff(res.stat, c["stat"].get<double>()) <= 1e-8);
        CHECK(testing::rel_diff(res.p_value, c["p_value"].get<double>()) <= 1e-6);
    }
}

TEST_CASE("ADF p-value surface") {
    CHECK(adf_pvalue(-3.43) == doctest::Approx(0.01).epsilon(0.05));
    CHECK(adf_pvalue(-2.86) == doctest::Approx(0.05).epsilon(0.05));
    CHECK(adf_pvalue(-100.0) == 0.0);
    CHECK(adf_pvalue(10.0) == 1.0);
    double prev = 0.0;
    for (double s = -6.0; s <= 2.0; s += 0.25) {
        const double p = adf_pvalue(s);
        CHECK(p >= prev);
        prev = p;
    }
}

TEST_CASE("ADF rejects too-short and constant series") {
    CHECK_THROWS_AS(adf_test(Vector::Constant(100, 1.0)), DegenerateError);
    CHECK_THROWS(adf_test(Vector::LinSpaced(5, 0, 1)));
}

TEST_CASE("difference drops one row") {
    Vector x(4);
    x << 1, 4, 9, 16;
    const Vector d = difference(x);
    REQUIRE(d.size() == 3);
    CHECK(d(0) == 3.0);
    CHECK(d(2) == 7.0);
}

TEST_CASE("make_stationary differences random walks and keeps white noise") {
    std::mt19937_64 rng(9);
    const Eigen::Index n = 1000;
    Matrix m(n, 3);
    m.col(0) = gaussian(rng, n);
    const Vector steps = gaussian(rng, n);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        acc += steps(i);
        m(i, 1) = acc;
    }
    m.col(2).setConstant(5.0);
    const TimeSeriesDataset ds({{"noise", ""}, {"walk", ""}, {"flat", ""}}, m, "1h", {{10, "noise", 1.0}});
    const auto [out, report] = make_stationary(ds, 0.01);
    REQUIRE(report.entries.size() == 3);
    CHECK(report.entries[0].action == StationarityAction::kept);
    CHECK(report.entries[1].action == StationarityAction::differenced);
    CHECK(report.entries[2].action == StationarityAction::constant);
    CHECK(report.rows_dropped == 1);
    CHECK(out.rows() == n - 1);
    CHECK(out.values()(0, 0) == m(1, 0));
    CHECK(out.values()(0, 1) == doctest::Approx(m(1, 1) - m(0, 1)));
    CHECK(report.entries[1].p_after.has_value());
    CHECK(to_json(report)["columns"].size() == 3);
}
