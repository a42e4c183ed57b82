#include "causalift/error.hpp"
#include "causalift/pipeline.hpp"
#include "causalift/service.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <chrono>
#include <set>

using namespace causalift;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    auto spec = default_spec(0);
    spec.horizon_steps = 3000;
    cfg.simulator = spec;
    cfg.n_runs = 2;
    cfg.families = {ModelFamily::ols, ModelFamily::lasso, ModelFamily::gbt};
    cfg.tuning_budget = 2;
    cfg.seed = 7;
    cfg.threads = 1;
    return cfg;
}

std::map<std::string, std::string> bundle_files(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        out[entry.path().filename().string()] = testing::slurp(entry.path());
    }
    return out;
}

const EvalRow& find_row(const ResultsBundle& b, int run, const std::string& target, const std::string& selector,
                        const std::string& family) {
    for (const auto& r : b.rows) {
        if (r.run == run && r.target == target && r.selector == selector && r.family == family) {
            return r;
        }
    }
    throw std::runtime_error("row not found");
}

}  // namespace

TEST_CASE("small experiment produces a complete, sorted bundle") {
    const auto cfg = small_config();
    const auto bundle = run_experiment(cfg);
    CHECK(bundle.rows.size() == 2u * 2u * 7u * 3u);
    CHECK(bundle.selections.size() == 2u * 2u * 7u);
    for (const auto& r : bundle.rows) {
        CAPTURE(r.selector);
        CAPTURE(r.family);
        CHECK_FALSE(r.error.has_value());
        CHECK(std::isfinite(r.metrics.mae));
        CHECK(r.metrics.n_features > 0);
    }
    CHECK(bundle.discovered.same_structure(bundle.final_graph));

    testing::TempDir dir("bundle");
    write_bundle(bundle, dir.path());
    for (const auto* name : {"graph.json", "graph_final.json", "results.csv", "results.json", "aggregate.json",
                             "profiles.json", "report.md", "timings.json"}) {
        CHECK(fs::exists(dir / name));
    }

    // results.csv is sorted by MAE
    std::istringstream csv(testing::slurp(dir / "results.csv"));
    std::string line;
    std::getline(csv, line);
    CHECK(line.rfind("run,target,selector,family,n_features,mae", 0) == 0);
    double prev = -1.0;
    while (std::getline(csv, line)) {
        std::vector<std::string> f;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            f.push_back(cell);
        }
        const double m = std::stod(f.at(5));
        CHECK(m >= prev);
        prev = m;
    }

    // report tables are sorted by their metric, best counts add up to the runs
    const auto& agg = bundle.aggregate;
    for (const auto& target : cfg.targets) {
        const auto& counts = agg["targets"][target]["best_counts"];
        for (const auto* metric : {"mae", "mae_w"}) {
            double sum = 0.0;
            for (const auto& [sel, w] : counts[metric]["wins"].items()) {
                sum += w.get<double>();
            }
            CHECK(sum == doctest::Approx(counts[metric]["runs"].get<double>()));
        }
    }
    const auto& report = bundle.report;
    CHECK(report.find("## In_Temp") != std::string::npos);
    CHECK(report.find("### After interventions (t+1..t+5)") != std::string::npos);
    const auto table_start = report.find("| Selector | Model | N° F | MAE | MAPE |");
    REQUIRE(table_start != std::string::npos);
    std::istringstream rs(report.substr(table_start));
    std::getline(rs, line);
    std::getline(rs, line);
    prev = -1.0;
    while (std::getline(rs, line) && line.rfind("| ", 0) == 0) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, '|')) {
            cells.push_back(cell);
        }
        const double m = std::stod(cells.at(4));
        CHECK(m >= prev);
        prev = m;
    }
}

TEST_CASE("identical config and seed give byte-identical bundles, serial or parallel") {
    auto cfg = small_config();
    testing::TempDir dir("determinism");
    write_bundle(run_experiment(cfg), dir / "a");
    write_bundle(run_experiment(cfg), dir / "b");
    cfg.threads = 4;
    cfg.discovery.threads = 4;
    write_bundle(run_experiment(cfg), dir / "c");
    auto a = bundle_files(dir / "a");
    auto b = bundle_files(dir / "b");
    auto c = bundle_files(dir / "c");
    for (auto* m : {&a, &b, &c}) {
        m->erase("timings.json");
    }
    CHECK(a.size() == 7);
    for (const auto& [name, text] : a) {
        CAPTURE(name);
        CHECK(text == b[name]);
        CHECK(text == c[name]);
    }
    cfg.seed = 8;
    CHECK(results_json(run_experiment(cfg))["rows"] != testing::load_json(dir / "a" / "results.json")["rows"]);
}

TEST_CASE("poisoning the test half changes no selection and no tuned hyperparameter") {
    const auto cfg = small_config();
    const auto clean = run_experiment(cfg);
    ExperimentHooks hooks;
    hooks.on_test_split = [](int, TimeSeriesDataset& test) {
        test = test.with_values(Matrix::Constant(test.rows(), test.cols(), 1e6));
    };
    const auto poisoned = run_experiment(cfg, hooks);
    REQUIRE(clean.selections.size() == poisoned.selections.size());
    for (std::size_t i = 0; i < clean.selections.size(); ++i) {
        CHECK(clean.selections[i].features == poisoned.selections[i].features);
    }
    REQUIRE(clean.rows.size() == poisoned.rows.size());
    bool metrics_moved = false;
    for (std::size_t i = 0; i < clean.rows.size(); ++i) {
        CHECK(clean.rows[i].hyperparams == poisoned.rows[i].hyperparams);
        CHECK(clean.rows[i].features == poisoned.rows[i].features);
        metrics_moved |= clean.rows[i].metrics.mae != poisoned.rows[i].metrics.mae;
    }
    CHECK(metrics_moved);
    CHECK(clean.final_graph == poisoned.final_graph);
}

TEST_CASE("a CSV directory gives the same rows as the simulator") {
    auto cfg = small_config();
    cfg.families = {ModelFamily::ols};
    const auto from_sim = run_experiment(cfg);

    testing::TempDir dir("csvdir");
    auto spec = *cfg.simulator;
    spec.seed = cfg.seed;
    const auto runs = run_batch(spec, cfg.n_runs);
    for (std::size_t i = 0; i < runs.size(); ++i) {
        write_csv(runs[i].first, dir / ("run" + std::to_string(i) + ".csv"));
    }
    auto csv_cfg = cfg;
    csv_cfg.simulator.reset();
    csv_cfg.data_dir = dir.path();
    const auto from_csv = run_experiment(csv_cfg);
    CHECK(results_json(from_csv)["rows"] == results_json(from_sim)["rows"]);
}

TEST_CASE("cells with an empty feature set fail without aborting the experiment") {
    auto cfg = small_config();
    cfg.n_runs = 1;
    cfg.targets = {"Hour", "In_Temp"};
    cfg.families = {ModelFamily::ols};
    const auto bundle = run_experiment(cfg);
    int failed = 0;
    for (const auto& r : bundle.rows) {
        if (r.target == "Hour" && (r.selector == "causal-lags" || r.selector == "causal-all")) {
            REQUIRE(r.error);
            CHECK(*r.error == "empty feature set");
            ++failed;
        } else {
            CHECK_FALSE(r.error.has_value());
        }
    }
    CHECK(failed == 2);
    CHECK(bundle.report.find("(failed 1/1)") != std::string::npos);
}

TEST_CASE("expert edits are applied to the discovered graph before selection") {
    auto cfg = small_config();
    cfg.n_runs = 1;
    cfg.families = {ModelFamily::ols};
    cfg.selectors = {SelectorMethod::causal_lags};
    const auto plain = run_experiment(cfg);
    const auto& g = plain.discovered;
    int lag = 1;
    while (g.find("Out_Hum", "In_Temp", lag) && lag < g.tau_max()) {
        ++lag;
    }
    REQUIRE_FALSE(g.find("Out_Hum", "In_Temp", lag));
    cfg.edits = EditSpec{"tester", "", {{"Out_Hum", "In_Temp", lag, ""}}, {}};
    const auto edited = run_experiment(cfg);
    REQUIRE(edited.final_graph.find("Out_Hum", "In_Temp", lag));
    CHECK(edited.final_graph.find("Out_Hum", "In_Temp", lag)->provenance == Provenance::expert_added);
    CHECK(edited.discovered == plain.discovered);
    const auto& row = find_row(edited, 0, "In_Temp", "causal-lags", "ols");
    CHECK(std::find(row.features.begin(), row.features.end(), "Out_Hum@" + std::to_string(lag)) != row.features.end());

    cfg.edits = EditSpec{"tester", "", {}, {{"Out_Hum", "Hour", 1, ""}}};
    if (!g.find("Out_Hum", "Hour", 1)) {
        CHECK_THROWS_AS(run_experiment(cfg), EditError);
    }
}

TEST_CASE("per-run discovery records one graph per run") {
    auto cfg = small_config();
    cfg.per_run_discovery = true;
    cfg.families = {ModelFamily::ols};
    const auto bundle = run_experiment(cfg);
    CHECK(bundle.per_run_graphs.size() == 2);
    CHECK(results_json(bundle).contains("per_run_graphs"));
}

TEST_CASE("quick-eval reproduces the batch OLS causal-lags cell") {
    auto cfg = small_config();
    cfg.n_runs = 1;
    cfg.families = {ModelFamily::ols};
    const auto bundle = run_experiment(cfg);
    auto spec = *cfg.simulator;
    spec.seed = cfg.seed;
    GraphService service(bundle.final_graph, simulate(spec).first);
    for (const auto& target : cfg.targets) {
        for (const auto* method : {"causal-lags", "all", "lasso"}) {
            CAPTURE(target);
            CAPTURE(method);
            const auto res = service.quick_eval(json{{"target", target}, {"method", method}, {"horizon", 5}}.dump());
            REQUIRE(res.status == 200);
            const auto& row = find_row(bundle, 0, target, method, "ols");
            CHECK(std::abs(res.body["mae"].get<double>() - row.metrics.mae) <= 1e-9);
            REQUIRE(row.metrics.mae_w);
            CHECK(std::abs(res.body["mae_w"].get<double>() - *row.metrics.mae_w) <= 1e-9);
            CHECK(res.body["n_features"].get<std::size_t>() == row.metrics.n_features);
        }
    }
}

TEST_CASE("quick-eval on the committed fixture") {
    const auto fx = testing::load_json(testing::source_path("tests/data/quick_eval_fixture.json"));
    const auto graph = graph_from_json(fx["graph"]);
    const auto data = simulate(default_spec(fx["scm_seed"].get<std::uint64_t>())).first;
    GraphService service(graph, data);
    for (const auto& [target, methods] : fx["expected"].items()) {
        for (const auto& [method, expected] : methods.items()) {
            CAPTURE(target);
            CAPTURE(method);
            const auto t0 = std::chrono::steady_clock::now();
            const auto res = service.quick_eval(json{{"target", target}, {"method", method}, {"horizon", 5}}.dump());
            const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            REQUIRE(res.status == 200);
            CHECK(seconds <= 2.0);
            for (const auto* key : {"mae", "mape", "mae_w", "mape_w", "n_features", "windows"}) {
                CHECK(res.body[key] == expected[key]);
            }
        }
        CHECK(methods["causal-lags"]["mae_w"].get<double>() <= methods["all"]["mae_w"].get<double>());
    }
}
