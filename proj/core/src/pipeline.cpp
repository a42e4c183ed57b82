#include "causalift/pipeline.hpp"

#include "causalift/error.hpp"
#include "causalift/parallel.hpp"
#include "text.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <set>
#include <sstream>

namespace causalift {

using nlohmann::json;
namespace fs = std::filesystem;

ExperimentConfig::ExperimentConfig() : simulator(default_spec(0)), selectors(all_selectors()) {}

void ExperimentConfig::validate() const {
    if (simulator.has_value() == data_dir.has_value()) {
        throw DataError("experiment: exactly one of simulator and data_dir must be set");
    }
    if (simulator) {
        simulator->validate();
    }
    if (data_dir && !fs::is_directory(*data_dir)) {
        throw DataError("experiment: data directory '" + data_dir->string() + "' does not exist");
    }
    if (n_runs < 1) {
        throw DataError("experiment: n_runs must be >= 1");
    }
    if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
        throw DataError("experiment: split_fraction must lie in (0, 1)");
    }
    if (targets.empty() || selectors.empty() || families.empty()) {
        throw DataError("experiment: need at least one target, selector and family");
    }
    if (std::set<std::string>(targets.begin(), targets.end()).size() != targets.size()) {
        throw DataError("experiment: duplicate target");
    }
    if (std::set<SelectorMethod>(selectors.begin(), selectors.end()).size() != selectors.size()) {
        throw DataError("experiment: duplicate selector");
    }
    if (std::set<ModelFamily>(families.begin(), families.end()).size() != families.size()) {
        throw DataError("experiment: duplicate family");
    }
    if (tuning_budget < 1 || k_folds < 2 || horizon < 1) {
        throw DataError("experiment: tuning_budget >= 1, k_folds >= 2 and horizon >= 1 required");
    }
    if (!(lasso_alpha >= 0.0) || !(pca_variance > 0.0 && pca_variance <= 1.0)) {
        throw DataError("experiment: lasso_alpha >= 0 and pca_variance in (0, 1] required");
    }
    discovery.validate();
}

namespace {

template <class T>
T read(const json& doc, const std::string& key, const std::string& path) {
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception&) {
        throw SchemaError(path + key, "wrong type");
    }
}

json load_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open '" + path.string() + "'");
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

fs::path resolve(const fs::path& p, const fs::path& base) {
    return p.is_relative() && !base.empty() ? base / p : p;
}

DiscoveryConfig discovery_from_json(const json& doc) {
    static const std::set<std::string> known = {"alpha",
                                                "max_scan_lag",
                                                "tau_max",
                                                "max_condition_size",
                                                "stationarity_threshold",
                                                "skip_deterministic_targets",
                                                "threads"};
    if (!doc.is_object()) {
        throw SchemaError("discovery", "expected an object");
    }
    for (const auto& [key, _] : doc.items()) {
        if (!known.contains(key)) {
            throw SchemaError("discovery." + key, "unknown key");
        }
    }
    DiscoveryConfig cfg;
    const std::string p = "discovery.";
    if (doc.contains("alpha")) cfg.alpha = read<double>(doc, "alpha", p);
    if (doc.contains("max_scan_lag")) cfg.max_scan_lag = read<int>(doc, "max_scan_lag", p);
    if (doc.contains("tau_max") && !doc["tau_max"].is_null()) cfg.tau_max = read<int>(doc, "tau_max", p);
    if (doc.contains("max_condition_size") && !doc["max_condition_size"].is_null()) {
        cfg.max_condition_size = read<int>(doc, "max_condition_size", p);
    }
    if (doc.contains("stationarity_threshold")) {
        cfg.stationarity_threshold = read<double>(doc, "stationarity_threshold", p);
    }
    if (doc.contains("skip_deterministic_targets")) {
        cfg.skip_deterministic_targets = read<bool>(doc, "skip_deterministic_targets", p);
    }
    if (doc.contains("threads")) cfg.threads = read<int>(doc, "threads", p);
    return cfg;
}

json to_json(const DiscoveryConfig& cfg) {
    return {{"alpha", cfg.alpha},
            {"max_scan_lag", cfg.max_scan_lag},
            {"tau_max", cfg.tau_max ? json(*cfg.tau_max) : json(nullptr)},
            {"max_condition_size", cfg.max_condition_size ? json(*cfg.max_condition_size) : json(nullptr)},
            {"stationarity_threshold", cfg.stationarity_threshold},
            {"skip_deterministic_targets", cfg.skip_deterministic_targets}};
}

std::string rule_name(ImportanceRule rule) {
    return rule == ImportanceRule::mean ? "mean" : "zero";
}

}  // namespace

ExperimentConfig experiment_config_from_json(const json& doc, const fs::path& base_dir) {
    static const std::set<std::string> known = {
        "simulator",   "data_dir",     "n_runs",      "split_fraction", "targets",           "discovery",
        "edits",       "selectors",    "families",    "tuning_budget",  "k_folds",           "horizon",
        "lasso_alpha", "pca_variance", "tree_rule",   "per_run_discovery", "output_dir",     "seed",
        "threads"};
    if (!doc.is_object()) {
        throw SchemaError("$", "experiment config must be an object");
    }
    for (const auto& [key, _] : doc.items()) {
        if (!known.contains(key)) {
            throw SchemaError(key, "unknown key");
        }
    }
    ExperimentConfig cfg;
    if (doc.contains("simulator") && doc.contains("data_dir")) {
        throw SchemaError("data_dir", "simulator and data_dir are mutually exclusive");
    }
    if (doc.contains("data_dir")) {
        cfg.simulator.reset();
        cfg.data_dir = resolve(read<std::string>(doc, "data_dir", ""), base_dir);
    }
    if (doc.contains("simulator")) {
        const auto& sim = doc["simulator"];
        if (sim.is_string()) {
            cfg.simulator = load_scm_spec(resolve(sim.get<std::string>(), base_dir));
        } else if (sim.is_object()) {
            try {
                cfg.simulator = scm_from_json(sim);
            } catch (const SchemaError& e) {
                throw SchemaError("simulator." + e.path(), e.message());
            }
        } else {
            throw SchemaError("simulator", "expected a path or an inline spec");
        }
    }
    if (doc.contains("n_runs")) cfg.n_runs = read<int>(doc, "n_runs", "");
    if (doc.contains("split_fraction")) cfg.split_fraction = read<double>(doc, "split_fraction", "");
    if (doc.contains("targets")) cfg.targets = read<std::vector<std::string>>(doc, "targets", "");
    if (doc.contains("discovery")) cfg.discovery = discovery_from_json(doc["discovery"]);
    if (doc.contains("edits") && !doc["edits"].is_null()) {
        const auto& e = doc["edits"];
        try {
            cfg.edits = e.is_string() ? edits_from_json(load_json_file(resolve(e.get<std::string>(), base_dir)))
                                      : edits_from_json(e);
        } catch (const SchemaError& err) {
            throw SchemaError("edits." + err.path(), err.message());
        }
    }
    if (doc.contains("selectors")) {
        cfg.selectors.clear();
        const auto names = read<std::vector<std::string>>(doc, "selectors", "");
        for (std::size_t i = 0; i < names.size(); ++i) {
            try {
                cfg.selectors.push_back(selector_from_string(names[i]));
            } catch (const Error& err) {
                throw SchemaError("selectors[" + std::to_string(i) + "]", err.what());
            }
        }
    }
    if (doc.contains("families")) {
        cfg.families.clear();
        const auto names = read<std::vector<std::string>>(doc, "families", "");
        for (std::size_t i = 0; i < names.size(); ++i) {
            try {
                cfg.families.push_back(family_from_string(names[i]));
            } catch (const Error& err) {
                throw SchemaError("families[" + std::to_string(i) + "]", err.what());
            }
        }
    }
    if (doc.contains("tuning_budget")) cfg.tuning_budget = read<int>(doc, "tuning_budget", "");
    if (doc.contains("k_folds")) cfg.k_folds = read<int>(doc, "k_folds", "");
    if (doc.contains("horizon")) cfg.horizon = read<int>(doc, "horizon", "");
    if (doc.contains("lasso_alpha")) cfg.lasso_alpha = read<double>(doc, "lasso_alpha", "");
    if (doc.contains("pca_variance")) cfg.pca_variance = read<double>(doc, "pca_variance", "");
    if (doc.contains("tree_rule")) {
        const auto rule = read<std::string>(doc, "tree_rule", "");
        if (rule == "mean") {
            cfg.tree_rule = ImportanceRule::mean;
        } else if (rule == "zero") {
            cfg.tree_rule = ImportanceRule::zero;
        } else {
            throw SchemaError("tree_rule", "expected mean or zero");
        }
    }
    if (doc.contains("per_run_discovery")) cfg.per_run_discovery = read<bool>(doc, "per_run_discovery", "");
    if (doc.contains("output_dir")) cfg.output_dir = resolve(read<std::string>(doc, "output_dir", ""), base_dir);
    if (doc.contains("seed")) cfg.seed = read<std::uint64_t>(doc, "seed", "");
    if (doc.contains("threads")) cfg.threads = read<int>(doc, "threads", "");
    cfg.validate();
    return cfg;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
    return experiment_config_from_json(load_json_file(path), path.parent_path());
}

json to_json(const ExperimentConfig& cfg) {
    json selectors = json::array();
    for (auto s : cfg.selectors) {
        selectors.push_back(to_string(s));
    }
    json families = json::array();
    for (auto f : cfg.families) {
        families.push_back(to_string(f));
    }
    json out = {{"n_runs", cfg.n_runs},
                {"split_fraction", cfg.split_fraction},
                {"targets", cfg.targets},
                {"discovery", to_json(cfg.discovery)},
                {"edits", cfg.edits ? to_json(*cfg.edits) : json(nullptr)},
                {"selectors", selectors},
                {"families", families},
                {"tuning_budget", cfg.tuning_budget},
                {"k_folds", cfg.k_folds},
                {"horizon", cfg.horizon},
                {"lasso_alpha", cfg.lasso_alpha},
                {"pca_variance", cfg.pca_variance},
                {"tree_rule", rule_name(cfg.tree_rule)},
                {"per_run_discovery", cfg.per_run_discovery},
                {"seed", cfg.seed}};
    if (cfg.simulator) {
        out["simulator"] = to_json(*cfg.simulator);
    } else {
        out["data_dir"] = cfg.data_dir->generic_string();
    }
    return out;
}

FeatureSet select_features(SelectorMethod method, const TimeSeriesGraph& graph, const TrainSplit& train,
                           const std::string& target, const ExperimentConfig& cfg, std::uint64_t seed) {
    switch (method) {
        case SelectorMethod::causal_lags: return causal_lags(graph, target);
        case SelectorMethod::causal_all: return causal_all(graph, target);
        case SelectorMethod::all: return all_features(graph.variables(), graph.tau_max(), target);
        default: break;
    }
    const auto design = build_lagged_design(train.data, target, graph.tau_max());
    switch (method) {
        case SelectorMethod::rfe: return rfe(design);
        case SelectorMethod::pca: return pca_select(design, cfg.pca_variance);
        case SelectorMethod::tree: return tree_select(design, cfg.tree_rule, seed);
        case SelectorMethod::lasso: return lasso_select(design, cfg.lasso_alpha);
        default: break;
    }
    throw Error("unhandled selector");
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Task {
    int run;
    std::size_t target;
    std::size_t selector;
};

struct TaskOutput {
    SelectionRecord selection;
    std::vector<EvalRow> rows;
};

TaskOutput run_task(const ExperimentConfig& cfg, const Task& task, const TimeSeriesGraph& graph,
                    const TrainSplit& train, const TestSplit& test) {
    const std::string& target = cfg.targets[task.target];
    const SelectorMethod method = cfg.selectors[task.selector];
    TaskOutput out;
    out.selection.run = task.run;
    out.selection.target = target;
    out.selection.selector = to_string(method);

    std::optional<FeatureSet> features;
    std::string failure;
    try {
        features = select_features(method, graph, train, target, cfg,
                                   derive_seed(cfg.seed, 1, task.run, task.target, task.selector));
        out.selection.features = to_json(*features);
        if (features->empty()) {
            failure = "empty feature set";
        }
    } catch (const std::exception& e) {
        failure = std::string("feature selection failed: ") + e.what();
        out.selection.features = nullptr;
    }
    if (!failure.empty()) {
        out.selection.error = failure;
    }

    for (std::size_t f = 0; f < cfg.families.size(); ++f) {
        const auto start = Clock::now();
        EvalRow row;
        row.run = task.run;
        row.target = target;
        row.selector = to_string(method);
        row.family = to_string(cfg.families[f]);
        row.hyperparams = nullptr;
        if (!failure.empty()) {
            row.error = failure;
            out.rows.push_back(std::move(row));
            continue;
        }
        try {
            const int tau = graph.tau_max();
            const auto train_in = model_input(*features, train.data, tau);
            const auto search = random_search_cv(cfg.families[f], train_in.X, train_in.y, train_in.schema,
                                                 cfg.tuning_budget, cfg.k_folds,
                                                 derive_seed(cfg.seed, 2, task.run, task.target, task.selector, f));
            row.hyperparams = to_json(search.best.params);
            row.features = train_in.schema;
            const auto test_in = model_input(*features, test.data, tau);
            row.metrics = evaluate(search.model, test_in, test.data.interventions(), cfg.horizon);
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        row.runtime_seconds = seconds_since(start);
        out.rows.push_back(std::move(row));
    }
    return out;
}

std::vector<TimeSeriesDataset> load_datasets(const ExperimentConfig& cfg) {
    std::vector<TimeSeriesDataset> out;
    if (cfg.simulator) {
        ScmSpec spec = *cfg.simulator;
        spec.seed = cfg.seed;
        for (auto& [ds, truth] : run_batch(spec, cfg.n_runs, cfg.threads)) {
            out.push_back(std::move(ds));
        }
        return out;
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(*cfg.data_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    if (files.size() < static_cast<std::size_t>(cfg.n_runs)) {
        throw DataError("experiment: need " + std::to_string(cfg.n_runs) + " CSV files in '" +
                        cfg.data_dir->string() + "', found " + std::to_string(files.size()));
    }
    for (int i = 0; i < cfg.n_runs; ++i) {
        out.push_back(read_csv(files[static_cast<std::size_t>(i)]));
    }
    return out;
}

std::optional<double> mean_of(const std::vector<double>& v) {
    if (v.empty()) {
        return std::nullopt;
    }
    double s = 0.0;
    for (double x : v) {
        s += x;
    }
    return s / static_cast<double>(v.size());
}

json opt(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

json aggregate_rows(const ExperimentConfig& cfg, const std::vector<EvalRow>& rows, json& profiles) {
    json targets = json::object();
    profiles = json::object();
    for (const auto& target : cfg.targets) {
        json cells = json::array();
        json target_profiles = json::object();
        for (auto sel : cfg.selectors) {
            for (auto fam : cfg.families) {
                const std::string s = to_string(sel);
                const std::string f = to_string(fam);
                std::vector<double> nf, mae, mape, mae_w, mape_w;
                std::vector<std::vector<double>> prof(static_cast<std::size_t>(cfg.horizon));
                int failed = 0;
                for (const auto& r : rows) {
                    if (r.target != target || r.selector != s || r.family != f) {
                        continue;
                    }
                    if (r.error) {
                        ++failed;
                        continue;
                    }
                    nf.push_back(static_cast<double>(r.metrics.n_features));
                    mae.push_back(r.metrics.mae);
                    if (r.metrics.mape) mape.push_back(*r.metrics.mape);
                    if (r.metrics.mae_w) mae_w.push_back(*r.metrics.mae_w);
                    if (r.metrics.mape_w) mape_w.push_back(*r.metrics.mape_w);
                    for (std::size_t j = 0; j < r.metrics.profile.size() && j < prof.size(); ++j) {
                        if (r.metrics.profile[j]) {
                            prof[j].push_back(*r.metrics.profile[j]);
                        }
                    }
                }
                cells.push_back({{"selector", s},
                                 {"family", f},
                                 {"runs", mae.size()},
                                 {"failed", failed},
                                 {"n_features", opt(mean_of(nf))},
                                 {"mae", opt(mean_of(mae))},
                                 {"mape", opt(mean_of(mape))},
                                 {"mae_w", opt(mean_of(mae_w))},
                                 {"mape_w", opt(mean_of(mape_w))}});
                json curve = json::array();
                for (const auto& p : prof) {
                    curve.push_back(opt(mean_of(p)));
                }
                target_profiles[s][f] = curve;
            }
        }
        json counts = json::object();
        for (auto metric : {Metric::mae, Metric::mape, Metric::mae_w, Metric::mape_w}) {
            const auto bc = best_counts(rows, metric, target);
            counts[to_string(metric)] = {{"wins", bc.wins}, {"runs", bc.runs}, {"tied_runs", bc.tied_runs}};
        }
        targets[target] = {{"cells", cells}, {"best_counts", counts}};
        profiles[target] = target_profiles;
    }
    return {{"n_runs", cfg.n_runs}, {"horizon", cfg.horizon}, {"targets", targets}};
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write '" + path.string() + "'");
    }
    out << text;
    if (!out) {
        throw DataError("write failed for '" + path.string() + "'");
    }
}

}  // namespace

ResultsBundle run_experiment(const ExperimentConfig& cfg, const ExperimentHooks& hooks) {
    cfg.validate();
    return run_experiment(cfg, load_datasets(cfg), hooks);
}

ResultsBundle run_experiment(const ExperimentConfig& cfg, std::vector<TimeSeriesDataset> datasets,
                             const ExperimentHooks& hooks) {
    cfg.validate();
    if (datasets.size() != static_cast<std::size_t>(cfg.n_runs)) {
        throw DataError("experiment: expected " + std::to_string(cfg.n_runs) + " datasets, got " +
                        std::to_string(datasets.size()));
    }
    for (const auto& t : cfg.targets) {
        for (const auto& ds : datasets) {
            if (!ds.find(t)) {
                throw DataError("experiment: target '" + t + "' missing from a dataset");
            }
        }
    }

    std::vector<TrainSplit> train;
    std::vector<TestSplit> test;
    for (std::size_t r = 0; r < datasets.size(); ++r) {
        auto [tr, te] = temporal_split(datasets[r], cfg.split_fraction);
        if (hooks.on_test_split) {
            hooks.on_test_split(static_cast<int>(r), te);
        }
        train.push_back({std::move(tr)});
        test.push_back({std::move(te)});
    }
    datasets.clear();

    DiscoveryConfig dcfg = cfg.discovery;
    if (dcfg.threads == 0) {
        dcfg.threads = cfg.threads;
    }
    auto finalize = [&](const TimeSeriesGraph& g) {
        if (!cfg.edits || cfg.edits->empty()) {
            return g;
        }
        return apply_edits(g, *cfg.edits);
    };
    auto discovered = discover_graph(train[0].data, dcfg);
    auto final_graph = finalize(discovered);
    ResultsBundle bundle{to_json(cfg), std::move(discovered), std::move(final_graph), {}, {}, {}, {}, {}, {}};

    std::vector<TimeSeriesGraph> graphs(train.size(), bundle.final_graph);
    if (cfg.per_run_discovery) {
        for (std::size_t r = 1; r < train.size(); ++r) {
            try {
                graphs[r] = finalize(discover_graph(train[r].data, dcfg));
            } catch (const EditError& e) {
                throw EditError("run " + std::to_string(r) + ": " + e.what(), e.path());
            }
        }
        bundle.per_run_graphs = graphs;
    }

    std::vector<Task> tasks;
    for (int r = 0; r < cfg.n_runs; ++r) {
        for (std::size_t t = 0; t < cfg.targets.size(); ++t) {
            for (std::size_t s = 0; s < cfg.selectors.size(); ++s) {
                tasks.push_back({r, t, s});
            }
        }
    }
    std::vector<TaskOutput> outputs(tasks.size());
    parallel_for(tasks.size(), cfg.threads, [&](std::size_t i) {
        const auto r = static_cast<std::size_t>(tasks[i].run);
        outputs[i] = run_task(cfg, tasks[i], graphs[r], train[r], test[r]);
    });

    for (auto& o : outputs) {
        bundle.selections.push_back(std::move(o.selection));
        for (auto& row : o.rows) {
            bundle.rows.push_back(std::move(row));
        }
    }
    const bool all_failed =
        std::all_of(bundle.rows.begin(), bundle.rows.end(), [](const EvalRow& r) { return r.error.has_value(); });
    if (all_failed) {
        std::set<std::string> reasons;
        for (const auto& r : bundle.rows) {
            reasons.insert(*r.error);
        }
        std::string summary;
        for (const auto& reason : reasons) {
            summary += "\n  " + reason;
        }
        throw Error("experiment: every cell failed:" + summary);
    }
    bundle.aggregate = aggregate_rows(cfg, bundle.rows, bundle.profiles);
    bundle.report = render_report(results_json(bundle), bundle.aggregate);
    return bundle;
}

json results_json(const ResultsBundle& bundle) {
    json rows = json::array();
    for (const auto& r : bundle.rows) {
        rows.push_back(to_json(r));
    }
    json selections = json::array();
    for (const auto& s : bundle.selections) {
        selections.push_back({{"run", s.run},
                              {"target", s.target},
                              {"selector", s.selector},
                              {"features", s.features},
                              {"error", s.error ? json(*s.error) : json(nullptr)}});
    }
    json out = {{"format", "causalift-results"},
                {"version", 1},
                {"config", bundle.config},
                {"metadata",
                 {{"standardized_inputs", {"lasso", "mlp"}},
                  {"cv_folds", "contiguous"},
                  {"prediction_scale", "original"},
                  {"tau_max", bundle.final_graph.tau_max()}}},
                {"rows", rows},
                {"selections", selections}};
    if (!bundle.per_run_graphs.empty()) {
        json graphs = json::array();
        for (const auto& g : bundle.per_run_graphs) {
            graphs.push_back(to_json(g));
        }
        out["per_run_graphs"] = graphs;
    }
    return out;
}

std::string results_csv(const std::vector<EvalRow>& rows) {
    std::vector<const EvalRow*> order;
    for (const auto& r : rows) {
        order.push_back(&r);
    }
    std::stable_sort(order.begin(), order.end(), [](const EvalRow* a, const EvalRow* b) {
        if (a->error.has_value() != b->error.has_value()) {
            return !a->error.has_value();
        }
        return !a->error && a->metrics.mae < b->metrics.mae;
    });
    auto num = [](const std::optional<double>& v) { return v ? detail::format_double(*v) : std::string(); };
    std::ostringstream out;
    out << "run,target,selector,family,n_features,mae,mape,mae_w,mape_w,windows,runtime_s\n";
    for (const EvalRow* r : order) {
        out << r->run << ',' << r->target << ',' << r->selector << ',' << r->family << ',';
        if (r->error) {
            out << ",,,,,,\n";
            continue;
        }
        // runtime_s stays empty here: wall-clock time lives in timings.json.
        out << r->metrics.n_features << ',' << detail::format_double(r->metrics.mae) << ',' << num(r->metrics.mape)
            << ',' << num(r->metrics.mae_w) << ',' << num(r->metrics.mape_w) << ',' << r->metrics.window_count
            << ",\n";
    }
    return out.str();
}

void write_bundle(const ResultsBundle& bundle, const fs::path& dir) {
    fs::create_directories(dir);
    write_text(dir / "graph.json", to_json(bundle.discovered).dump(2) + "\n");
    write_text(dir / "graph_final.json", to_json(bundle.final_graph).dump(2) + "\n");
    write_text(dir / "results.csv", results_csv(bundle.rows));
    write_text(dir / "results.json", results_json(bundle).dump(2) + "\n");
    write_text(dir / "aggregate.json", bundle.aggregate.dump(2) + "\n");
    write_text(dir / "profiles.json", bundle.profiles.dump(2) + "\n");
    write_text(dir / "report.md", bundle.report);

    json timings = json::array();
    for (const auto& r : bundle.rows) {
        timings.push_back({{"run", r.run},
                           {"target", r.target},
                           {"selector", r.selector},
                           {"family", r.family},
                           {"runtime_s", r.runtime_seconds}});
    }
    write_text(dir / "timings.json", timings.dump(2) + "\n");
}

}  // namespace causalift
