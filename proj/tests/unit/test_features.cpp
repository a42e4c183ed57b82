#include "causalift/error.hpp"
#include "causalift/features.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <set>

using namespace causalift;

namespace {

/// Five white-noise drivers; target y = 2 v0[t-1] - 1.5 v2[t-3] + 0.1 noise.
TimeSeriesDataset planted(std::uint64_t seed, Eigen::Index T = 600) {
    auto base = testing::random_dataset(seed, T, 6);
    Matrix m = base.values();
    std::mt19937_64 rng(seed + 100);
    std::normal_distribution<double> n01;
    for (Eigen::Index t = 0; t < T; ++t) {
        m(t, 5) = (t >= 3 ? 2.0 * m(t - 1, 0) - 1.5 * m(t - 3, 2) : 0.0) + 0.1 * n01(rng);
    }
    auto vars = base.variables();
    vars[5].name = "y";
    return {vars, m};
}

std::set<LagColumn> as_set(const FeatureSet& fs) {
    return {fs.columns.begin(), fs.columns.end()};
}

const std::set<LagColumn> kPlanted{{"v0", 1}, {"v2", 3}};

}  // namespace

TEST_CASE("selector names round trip") {
    for (auto m : all_selectors()) {
        CHECK(selector_from_string(to_string(m)) == m);
    }
    CHECK(all_selectors().size() == 7);
    CHECK(is_causal(SelectorMethod::causal_lags));
    CHECK_FALSE(is_causal(SelectorMethod::all));
    CHECK_THROWS_AS(selector_from_string("causal"), DataError);
}

TEST_CASE("graph-based selectors on a small graph") {
    const TimeSeriesGraph g({"a", "b", "c"}, 3, 0.01, {{"a", "c", 2}, {"c", "c", 1}, {"a", "c", 3}, {"b", "a", 1}});
    const auto lags = causal_lags(g, "c");
    CHECK(lags.columns == std::vector<LagColumn>{{"a", 2}, {"a", 3}, {"c", 1}});
    const auto all_of = causal_all(g, "c");
    CHECK(all_of.columns == std::vector<LagColumn>{{"a", 1}, {"a", 2}, {"a", 3}, {"c", 1}, {"c", 2}, {"c", 3}});
    CHECK(all_features(g.variables(), g.tau_max(), "c").size() == 9);
    CHECK(causal_lags(g, "b").empty());
    CHECK(causal_all(g, "b").empty());
    CHECK_THROWS_AS(causal_lags(g, "zz"), DataError);
    CHECK(all_features({"x"}, 1, "x").schema() == std::vector<std::string>{"x@1"});
}

TEST_CASE("feature counts on random graphs") {
    std::mt19937_64 rng(8);
    for (int rep = 0; rep < 200; ++rep) {
        const int V = 1 + static_cast<int>(rng() % 11);
        const int tau = 1 + static_cast<int>(rng() % 9);
        std::vector<std::string> vars;
        for (int v = 0; v < V; ++v) {
            vars.push_back("v" + std::to_string(v));
        }
        std::vector<Link> links;
        for (const auto& s : vars) {
            for (const auto& t : vars) {
                for (int lag = 1; lag <= tau; ++lag) {
                    if (rng() % 10 == 0) {
                        links.push_back({s, t, lag});
                    }
                }
            }
        }
        const TimeSeriesGraph g(vars, tau, 0.01, links);
        const auto& target = vars[rng() % vars.size()];
        std::set<std::string> parents;
        for (const auto& l : g.links_into(target)) {
            parents.insert(l.source);
        }
        const auto cl = as_set(causal_lags(g, target));
        const auto ca = as_set(causal_all(g, target));
        const auto al = as_set(all_features(vars, tau, target));
        CHECK(al.size() == static_cast<std::size_t>(V * tau));
        CHECK(ca.size() == parents.size() * static_cast<std::size_t>(tau));
        CHECK(std::includes(ca.begin(), ca.end(), cl.begin(), cl.end()));
        CHECK(std::includes(al.begin(), al.end(), ca.begin(), ca.end()));
    }
}

TEST_CASE("rfe keeps the planted columns") {
    const auto d = build_lagged_design(planted(1), "y", 3);
    CHECK(as_set(rfe(d, 2)) == kPlanted);
    CHECK(rfe(d).size() == static_cast<std::size_t>(d.X.cols() / 2));
    CHECK(rfe(d, 0).empty());
    CHECK_THROWS_AS(rfe(d, 100), DataError);
}

TEST_CASE("rfe drops constant columns first") {
    auto ds = planted(2);
    Matrix m = ds.values();
    m.col(4).setConstant(3.0);
    const auto d = build_lagged_design(ds.with_values(m), "y", 2);
    const auto fs = rfe(d, static_cast<int>(d.X.cols()) - 2);
    for (const auto& c : fs.columns) {
        CHECK(c.variable != "v4");
    }
    CHECK(fs.notes.size() >= 2);
}

TEST_CASE("lasso and tree selectors find the planted columns") {
    const auto d = build_lagged_design(planted(3), "y", 3);
    const auto lasso = as_set(lasso_select(d, 0.1));
    CHECK(lasso.count({"v0", 1}) == 1);
    CHECK(lasso.count({"v2", 3}) == 1);
    CHECK(lasso.size() <= 4);
    CHECK(lasso_select(d, 100.0).empty());
    CHECK_THROWS_AS(lasso_select(d, 0.0), DataError);

    const auto tree = as_set(tree_select(d, ImportanceRule::mean, 7));
    CHECK(tree.count({"v0", 1}) == 1);
    CHECK(tree.count({"v2", 3}) == 1);
    const auto zero = as_set(tree_select(d, ImportanceRule::zero, 7));
    CHECK(zero.size() >= tree.size());
    CHECK(as_set(tree_select(d, ImportanceRule::mean, 7)) == tree);
}

TEST_CASE("pca components are orthonormal, ordered and minimal") {
    const auto d = build_lagged_design(planted(4), "y", 2);
    for (double target : {0.3, 0.85, 1.0}) {
        const auto fs = pca_select(d, target);
        REQUIRE(fs.pca);
        const auto& pc = *fs.pca;
        const auto k = pc.loadings.cols();
        CHECK(static_cast<std::size_t>(k) == fs.size());
        CHECK((pc.loadings.transpose() * pc.loadings - Matrix::Identity(k, k)).cwiseAbs().maxCoeff() < 1e-10);
        double cum = 0.0;
        for (std::size_t j = 0; j < pc.explained_ratio.size(); ++j) {
            if (j > 0) {
                CHECK(pc.explained_ratio[j] <= pc.explained_ratio[j - 1] + 1e-15);
            }
            cum += pc.explained_ratio[j];
        }
        CHECK(cum >= target - 1e-12);
        CHECK(cum - pc.explained_ratio.back() < target);

        // scores are uncorrelated with variance equal to the eigenvalue ratio times p
        const Matrix S = Standardizer{pc.center, pc.scale}.apply(d.X) * pc.loadings;
        const Matrix cov = S.transpose() * S / static_cast<double>(S.rows());
        const double p = static_cast<double>(d.X.cols());
        for (Eigen::Index a = 0; a < k; ++a) {
            CHECK(cov(a, a) == doctest::Approx(pc.explained_ratio[static_cast<std::size_t>(a)] * p).epsilon(1e-9));
            for (Eigen::Index b = 0; b < a; ++b) {
                CHECK(std::abs(cov(a, b)) < 1e-9);
            }
            Eigen::Index arg = 0;
            pc.loadings.col(a).cwiseAbs().maxCoeff(&arg);
            CHECK(pc.loadings(arg, a) > 0.0);
        }
    }
    CHECK_THROWS_AS(pca_select(d, 0.0), DataError);
}

TEST_CASE("model input projects PCA scores and subsets columns") {
    const auto ds = planted(5);
    const auto [train, test] = temporal_split(ds, 0.5);
    const auto d = build_lagged_design(train, "y", 3);
    const auto fs = pca_select(d, 0.85);
    const auto in = model_input(fs, test, 3);
    const auto full = build_lagged_design(test, "y", 3);
    const Matrix expected = Standardizer{fs.pca->center, fs.pca->scale}.apply(full.X) * fs.pca->loadings;
    CHECK((in.X - expected).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(in.y == full.y);
    CHECK(in.schema.front() == "PC1");

    FeatureSet cols;
    cols.target = "y";
    cols.columns = {{"v2", 3}, {"y", 1}};
    const auto sub = model_input(cols, test, 3);
    CHECK(sub.X.col(0) == full.X.col(2 * 3 + 2));
    CHECK(sub.X.col(1) == full.X.col(5 * 3 + 0));
    CHECK(sub.schema == std::vector<std::string>{"v2@3", "y@1"});
}

TEST_CASE("feature set JSON round trip") {
    const auto d = build_lagged_design(planted(6), "y", 2);
    for (const auto& fs : {pca_select(d, 0.85), rfe(d, 3), lasso_select(d, 0.1)}) {
        const auto back = feature_set_from_json(to_json(fs));
        CHECK(back.method == fs.method);
        CHECK(back.columns == fs.columns);
        CHECK(back.schema() == fs.schema());
        if (fs.pca) {
            REQUIRE(back.pca);
            CHECK(back.pca->loadings == fs.pca->loadings);
            CHECK(back.pca->center == fs.pca->center);
        }
    }
    CHECK_THROWS_AS(feature_set_from_json({{"method", "all"}, {"target", "y"}, {"columns", {{"v0", 0}}}}), SchemaError);
}
