// causalift command-line front end.
//
// Exit codes: 0 success, 1 usage error, 2 runtime failure.

#include "causalift/dataset.hpp"
#include "causalift/discovery.hpp"
#include "causalift/error.hpp"
#include "causalift/features.hpp"
#include "causalift/graph.hpp"
#include "causalift/pipeline.hpp"
#include "causalift/scm.hpp"
#include "causalift/service.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace causalift;

namespace {

json read_json(const fs::path& path) {
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

/// Writes to `out`, or stdout when `out` is empty.
void emit(const std::string& text, const std::string& out) {
    if (out.empty()) {
        std::cout << text;
        return;
    }
    if (const auto parent = fs::path(out).parent_path(); !parent.empty()) {
        fs::create_directories(parent);
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) {
        throw DataError("cannot write '" + out + "'");
    }
    f << text;
}

TimeSeriesGraph load_graph(const fs::path& path) {
    return graph_from_json(read_json(path));
}

HttpServer* g_server = nullptr;

void on_signal(int) {
    if (g_server) {
        g_server->stop();
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Causal feature selection for multivariate time series"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "Simulate datasets from a structural causal model");
    std::string sim_spec, sim_out = "data";
    std::uint64_t sim_seed = 0;
    int sim_runs = 1, sim_threads = 0;
    std::optional<int> sim_steps;
    sim->add_option("--spec", sim_spec, "SCM spec JSON (default: built-in data-center model)")->check(CLI::ExistingFile);
    sim->add_option("--seed", sim_seed, "Seed of the first run; run i uses seed + i");
    sim->add_option("--runs", sim_runs, "Number of runs")->check(CLI::PositiveNumber);
    sim->add_option("--steps", sim_steps, "Override the number of simulated steps")->check(CLI::PositiveNumber);
    sim->add_option("--out", sim_out, "Output directory");
    sim->add_option("--threads", sim_threads, "Worker threads (0 = all cores)");

    // discover
    auto* disc = app.add_subcommand("discover", "Run causal discovery on a CSV dataset");
    std::string disc_data, disc_out;
    DiscoveryConfig dcfg;
    std::optional<int> disc_tau;
    disc->add_option("--data", disc_data, "Input CSV")->required()->check(CLI::ExistingFile);
    disc->add_option("--alpha", dcfg.alpha, "Significance level");
    disc->add_option("--max-lag", dcfg.max_scan_lag, "Largest lag scanned when choosing tau_max");
    disc->add_option("--tau-max", disc_tau, "Fix tau_max instead of choosing it from the data");
    disc->add_option("--max-conds", dcfg.max_condition_size, "Cap on the conditioning-set size");
    disc->add_option("--stationarity-threshold", dcfg.stationarity_threshold, "ADF p-value threshold");
    disc->add_option("--threads", dcfg.threads, "Worker threads (0 = all cores)");
    disc->add_option("--out", disc_out, "Output graph JSON (default: stdout)");

    // edit
    auto* edit = app.add_subcommand("edit", "Apply an edit spec to a graph");
    std::string edit_graph, edit_spec, edit_out;
    edit->add_option("--graph", edit_graph, "Graph JSON")->required()->check(CLI::ExistingFile);
    edit->add_option("--edits", edit_spec, "Edit spec JSON")->required()->check(CLI::ExistingFile);
    edit->add_option("--out", edit_out, "Output graph JSON (default: stdout)");

    // features
    auto* feat = app.add_subcommand("features", "Print the feature set of one selector");
    std::string feat_graph, feat_target, feat_method, feat_data, feat_out;
    double feat_split = 0.5;
    feat->add_option("--graph", feat_graph, "Graph JSON")->required()->check(CLI::ExistingFile);
    feat->add_option("--target", feat_target, "Target variable")->required();
    feat->add_option("--method", feat_method, "causal-lags, causal-all, all, rfe, pca, tree or lasso")->required();
    feat->add_option("--data", feat_data, "CSV for data-driven selectors (training half is used)")
        ->check(CLI::ExistingFile);
    feat->add_option("--split", feat_split, "Training fraction of --data");
    feat->add_option("--out", feat_out, "Output JSON (default: stdout)");

    // run
    auto* run = app.add_subcommand("run", "Run a full experiment and write the results bundle");
    std::string run_config, run_out;
    std::optional<int> run_runs, run_threads;
    run->add_option("--config", run_config, "Experiment config JSON")->required()->check(CLI::ExistingFile);
    run->add_option("--out", run_out, "Bundle directory (overrides output_dir)");
    run->add_option("--runs", run_runs, "Override n_runs")->check(CLI::PositiveNumber);
    run->add_option("--threads", run_threads, "Override threads");

    // report
    auto* rep = app.add_subcommand("report", "Render the tables of a results bundle");
    std::string rep_bundle, rep_out;
    rep->add_option("--bundle", rep_bundle, "Bundle directory")->required()->check(CLI::ExistingDirectory);
    rep->add_option("--out", rep_out, "Output markdown (default: stdout)");

    // serve
    auto* srv = app.add_subcommand("serve", "Serve the graph-editing HTTP API");
    std::string srv_graph, srv_data, srv_host = "127.0.0.1", srv_persist;
    int srv_port = 8080;
    double srv_split = 0.5;
    srv->add_option("--graph", srv_graph, "Graph JSON")->required()->check(CLI::ExistingFile);
    srv->add_option("--data", srv_data, "Dataset CSV")->required()->check(CLI::ExistingFile);
    srv->add_option("--host", srv_host, "Bind address");
    srv->add_option("--port", srv_port, "Port (0 picks a free one)");
    srv->add_option("--split", srv_split, "Training fraction used by quick-eval");
    srv->add_option("--persist", srv_persist, "Where committed graphs go (default: <graph>.edited.json)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return 1;
    }

    try {
        if (*sim) {
            ScmSpec spec = sim_spec.empty() ? default_spec(sim_seed) : load_scm_spec(sim_spec);
            spec.seed = sim_seed;
            if (sim_steps) {
                spec.horizon_steps = *sim_steps;
            }
            fs::create_directories(sim_out);
            const auto runs = run_batch(spec, sim_runs, sim_threads);
            char name[32];
            for (std::size_t i = 0; i < runs.size(); ++i) {
                std::snprintf(name, sizeof(name), "run%03zu.csv", i);
                write_csv(runs[i].first, fs::path(sim_out) / name);
            }
            emit(to_json(truth_graph(spec)).dump(2) + "\n", (fs::path(sim_out) / "truth_graph.json").string());
            emit(to_json(spec).dump(2) + "\n", (fs::path(sim_out) / "scm.json").string());
            std::cerr << "wrote " << runs.size() << " run(s) to " << sim_out << "\n";
        } else if (*disc) {
            dcfg.tau_max = disc_tau;
            dcfg.validate();
            const auto graph = discover_graph(read_csv(disc_data), dcfg);
            emit(to_json(graph).dump(2) + "\n", disc_out);
        } else if (*edit) {
            const auto graph = apply_edits(load_graph(edit_graph), edits_from_json(read_json(edit_spec)));
            emit(to_json(graph).dump(2) + "\n", edit_out);
        } else if (*feat) {
            const auto graph = load_graph(feat_graph);
            const auto method = selector_from_string(feat_method);
            FeatureSet fs_out;
            if (is_causal(method) || method == SelectorMethod::all) {
                fs_out = method == SelectorMethod::causal_lags  ? causal_lags(graph, feat_target)
                         : method == SelectorMethod::causal_all ? causal_all(graph, feat_target)
                                                                : all_features(graph.variables(), graph.tau_max(),
                                                                               feat_target);
            } else {
                if (feat_data.empty()) {
                    throw DataError("--data is required for the " + feat_method + " selector");
                }
                const TrainSplit train{temporal_split(read_csv(feat_data), feat_split).first};
                fs_out = select_features(method, graph, train, feat_target, ExperimentConfig{}, 0);
            }
            emit(to_json(fs_out).dump(2) + "\n", feat_out);
        } else if (*run) {
            auto cfg = load_experiment_config(run_config);
            if (run_runs) cfg.n_runs = *run_runs;
            if (run_threads) cfg.threads = *run_threads;
            if (!run_out.empty()) cfg.output_dir = run_out;
            const auto bundle = run_experiment(cfg);
            write_bundle(bundle, cfg.output_dir);
            std::size_t failed = 0;
            for (const auto& r : bundle.rows) {
                failed += r.error ? 1 : 0;
            }
            std::cerr << "wrote " << cfg.output_dir.string() << " (" << bundle.rows.size() << " cells, " << failed
                      << " failed)\n";
        } else if (*rep) {
            const auto results = read_json(fs::path(rep_bundle) / "results.json");
            const auto aggregate = read_json(fs::path(rep_bundle) / "aggregate.json");
            emit(render_report(results, aggregate), rep_out);
        } else if (*srv) {
            fs::path persist = srv_persist;
            if (persist.empty()) {
                persist = fs::path(srv_graph);
                persist.replace_extension(".edited.json");
            }
            GraphService service(load_graph(srv_graph), read_csv(srv_data), persist, srv_split);
            HttpServer server(service);
            const int port = server.bind(srv_host, srv_port);
            if (port < 0) {
                throw Error("cannot bind " + srv_host + ":" + std::to_string(srv_port));
            }
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cerr << "serving on http://" << srv_host << ":" << port << "\n";
            server.listen_after_bind();
            g_server = nullptr;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
