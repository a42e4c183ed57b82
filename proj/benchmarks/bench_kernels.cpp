#include "causalift/discovery.hpp"
#include "causalift/features.hpp"
#include "causalift/models.hpp"
#include "causalift/scm.hpp"
#include "causalift/stats.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace causalift;

namespace {

Matrix gaussian(std::uint64_t seed, Eigen::Index n, Eigen::Index p) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01;
    Matrix m(n, p);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        m.data()[i] = n01(rng);
    }
    return m;
}

const TimeSeriesDataset& train_half() {
    static const auto ds = temporal_split(simulate(default_spec(0)).first, 0.5).first;
    return ds;
}

}  // namespace

static void BM_PartialCorr(benchmark::State& state) {
    const auto n = state.range(0);
    const Matrix Z = gaussian(1, n, state.range(1));
    const Vector x = gaussian(2, n, 1).col(0);
    const Vector y = gaussian(3, n, 1).col(0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(parcorr_test(partial_corr(x, y, Z), n, state.range(1)));
    }
}
BENCHMARK(BM_PartialCorr)->Args({8760, 0})->Args({8760, 4})->Args({8760, 16});

static void BM_Adf(benchmark::State& state) {
    const Vector x = gaussian(4, state.range(0), 1).col(0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(adf_test(x));
    }
}
BENCHMARK(BM_Adf)->Arg(1000)->Arg(8760);

static void BM_Pc1Target(benchmark::State& state) {
    const auto& ds = train_half();
    DiscoveryConfig cfg;
    cfg.threads = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(pc1_parents(ds, "In_Temp", cfg, static_cast<int>(state.range(0))));
    }
}
BENCHMARK(BM_Pc1Target)->Arg(4)->Arg(11)->Unit(benchmark::kMillisecond);

static void BM_DiscoverGraph(benchmark::State& state) {
    const auto& ds = train_half();
    DiscoveryConfig cfg;
    cfg.threads = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(discover_graph(ds, cfg));
    }
}
BENCHMARK(BM_DiscoverGraph)->Unit(benchmark::kMillisecond);

static void BM_FitGbt(benchmark::State& state) {
    const Matrix X = gaussian(5, 8760, state.range(0));
    const Vector y = X.col(0).array().sin().matrix() + 0.1 * gaussian(6, 8760, 1).col(0);
    GbtParams gp;
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_gbt(X, y, gp, 0));
    }
}
BENCHMARK(BM_FitGbt)->Arg(8)->Arg(88)->Unit(benchmark::kMillisecond);

static void BM_FitMlp(benchmark::State& state) {
    const Matrix X = gaussian(7, 8760, state.range(0));
    const Vector y = X.col(0).array().sin().matrix() + 0.1 * gaussian(8, 8760, 1).col(0);
    MlpParams mp;
    mp.epochs = 5;
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_mlp(X, y, mp, 0));
    }
}
BENCHMARK(BM_FitMlp)->Arg(8)->Arg(88)->Unit(benchmark::kMillisecond);

static void BM_LassoSelect(benchmark::State& state) {
    const auto design = build_lagged_design(train_half(), "In_Temp", 11);
    for (auto _ : state) {
        benchmark::DoNotOptimize(lasso_select(design, 0.1));
    }
}
BENCHMARK(BM_LassoSelect)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
