#include "causalift/error.hpp"
#include "causalift/models.hpp"

#include "test_support.hpp"

#include <doctest.h>

using namespace causalift;

namespace {

struct Problem {
    Matrix X;
    Vector y;
};

Problem quadratic(std::uint64_t seed, Eigen::Index n) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01;
    Problem p{Matrix(n, 2), Vector(n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        p.X(i, 0) = n01(rng);
        p.X(i, 1) = n01(rng);
        p.y(i) = p.X(i, 0) * p.X(i, 1) + 0.1 * n01(rng);
    }
    return p;
}

}  // namespace

TEST_CASE("contiguous folds give the extra rows to the first blocks") {
    const auto f = contiguous_folds(10, 3);
    REQUIRE(f.size() == 3);
    CHECK(f[0] == std::pair<std::size_t, std::size_t>{0, 4});
    CHECK(f[1] == std::pair<std::size_t, std::size_t>{4, 7});
    CHECK(f[2] == std::pair<std::size_t, std::size_t>{7, 10});
    const auto even = contiguous_folds(9, 3);
    CHECK(even[1] == std::pair<std::size_t, std::size_t>{3, 6});
    CHECK_THROWS_AS(contiguous_folds(2, 3), DataError);
    CHECK_THROWS_AS(contiguous_folds(10, 1), DataError);
}

TEST_CASE("sampled hyperparameters stay inside their ranges") {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 500; ++i) {
        const auto l = std::get<LassoParams>(sample_hyperparams(ModelFamily::lasso, rng));
        CHECK(l.alpha >= 1e-4);
        CHECK(l.alpha <= 1.0);
        const auto g = std::get<GbtParams>(sample_hyperparams(ModelFamily::gbt, rng));
        CHECK(g.trees >= 20);
        CHECK(g.trees <= 100);
        CHECK(g.max_depth >= 1);
        CHECK(g.max_depth <= 6);
        CHECK(g.subsample >= 0.5);
        const auto m = std::get<MlpParams>(sample_hyperparams(ModelFamily::mlp, rng));
        CHECK(m.hidden.size() >= 1);
        CHECK(m.hidden.size() <= 2);
        CHECK(m.epochs >= 5);
        CHECK(m.epochs <= 20);
    }
    CHECK(std::holds_alternative<OlsParams>(sample_hyperparams(ModelFamily::ols, rng)));
}

TEST_CASE("search with budget one returns the first draw") {
    const auto p = quadratic(2, 300);
    const auto r = random_search_cv(ModelFamily::gbt, p.X, p.y, {"a", "b"}, 1, 3, 42);
    REQUIRE(r.table.size() == 1);
    CHECK(r.table[0].draw == 0);
    CHECK(to_json(r.best.params) == r.table[0].hyperparams);
    CHECK(r.table[0].fold_mae.size() == 3);
}

TEST_CASE("search picks the lowest mean fold error and is reproducible") {
    const auto p = quadratic(3, 400);
    const auto a = random_search_cv(ModelFamily::lasso, p.X, p.y, {"a", "b"}, 8, 3, 5);
    const auto b = random_search_cv(ModelFamily::lasso, p.X, p.y, {"a", "b"}, 8, 3, 5);
    CHECK(to_json(a.best.params) == to_json(b.best.params));
    double best = std::numeric_limits<double>::infinity();
    int arg = -1;
    for (const auto& row : a.table) {
        if (!row.failed && row.mean_mae < best) {
            best = row.mean_mae;
            arg = row.draw;
        }
    }
    CHECK(to_json(a.best.params) == a.table[static_cast<std::size_t>(arg)].hyperparams);
    CHECK(predict(a.model, p.X) == predict(b.model, p.X));
}

TEST_CASE("interactions push the tuned GBT depth above one") {
    int deep = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto p = quadratic(100 + seed, 600);
        const auto r = random_search_cv(ModelFamily::gbt, p.X, p.y, {"a", "b"}, 10, 3, seed);
        deep += std::get<GbtParams>(r.best.params).max_depth >= 2;
    }
    CHECK(deep >= 18);
}

TEST_CASE("ols is fit directly and search arguments are validated") {
    const auto p = quadratic(4, 90);
    const auto r = random_search_cv(ModelFamily::ols, p.X, p.y, {"a", "b"}, 20, 3, 0);
    CHECK(r.table.empty());
    CHECK(std::holds_alternative<OlsParams>(r.best.params));
    CHECK_THROWS_AS(random_search_cv(ModelFamily::gbt, p.X, p.y, {"a", "b"}, 0, 3, 0), DataError);
    CHECK_THROWS_AS(random_search_cv(ModelFamily::gbt, p.X.topRows(5), p.y.head(5), {"a", "b"}, 2, 3, 0), DataError);
}

TEST_CASE("hyperparameter JSON round trip") {
    std::mt19937_64 rng(7);
    for (auto f : {ModelFamily::lasso, ModelFamily::forest, ModelFamily::gbt, ModelFamily::mlp}) {
        const auto h = sample_hyperparams(f, rng);
        CHECK(to_json(hyperparams_from_json(f, to_json(h))) == to_json(h));
        CHECK(family_from_string(to_string(f)) == f);
    }
    CHECK_THROWS_AS(family_from_string("xgb"), DataError);
}
