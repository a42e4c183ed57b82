#include "causalift/discovery.hpp"

#include "causalift/error.hpp"
#include "causalift/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace causalift {

using nlohmann::json;

void DiscoveryConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw DataError("discovery: alpha must be in (0, 1)");
    }
    if (max_scan_lag < 1) {
        throw DataError("discovery: max_scan_lag must be >= 1");
    }
    if (tau_max && *tau_max < 1) {
        throw DataError("discovery: tau_max must be >= 1");
    }
    if (max_condition_size && *max_condition_size < 0) {
        throw DataError("discovery: max_condition_size must be >= 0");
    }
    if (!(stationarity_threshold > 0.0 && stationarity_threshold < 1.0)) {
        throw DataError("discovery: stationarity_threshold must be in (0, 1)");
    }
}

std::vector<CandidateState> Pc1Result::parents() const {
    std::vector<CandidateState> out;
    std::copy_if(candidates.begin(), candidates.end(), std::back_inserter(out),
                 [](const CandidateState& c) { return c.alive; });
    return out;
}

namespace {

bool is_constant(const Vector& v) {
    return v.size() == 0 || (v.array() == v(0)).all();
}

}  // namespace

int select_tau_max(const TimeSeriesDataset& ds, int max_scan_lag) {
    const auto V = ds.cols();
    const auto T = ds.rows();
    if (V < 2) {
        throw DataError("select_tau_max: need at least two variables");
    }
    if (max_scan_lag < 1 || T <= max_scan_lag + 2) {
        throw DataError("select_tau_max: need T > max_scan_lag + 2");
    }
    const Eigen::Index n = T - max_scan_lag;
    std::vector<bool> usable(static_cast<std::size_t>(V));
    for (Eigen::Index v = 0; v < V; ++v) {
        usable[static_cast<std::size_t>(v)] = !is_constant(ds.values().col(v));
    }
    long sum = 0;
    long pairs = 0;
    for (Eigen::Index i = 0; i < V; ++i) {
        if (!usable[static_cast<std::size_t>(i)]) {
            continue;
        }
        for (Eigen::Index j = 0; j < V; ++j) {
            if (i == j || !usable[static_cast<std::size_t>(j)]) {
                continue;
            }
            const Vector y = ds.values().col(j).segment(max_scan_lag, n);
            double best = -1.0;
            int best_lag = 0;
            for (int lag = 1; lag <= max_scan_lag; ++lag) {
                const Vector x = ds.values().col(i).segment(max_scan_lag - lag, n);
                double r = 0.0;
                try {
                    r = std::abs(pearson(x, y));
                } catch (const DegenerateError&) {
                    continue;
                }
                if (r > best) {
                    best = r;
                    best_lag = lag;
                }
            }
            if (best_lag > 0) {
                sum += best_lag;
                ++pairs;
            }
        }
    }
    if (pairs == 0) {
        throw DataError("select_tau_max: every variable pair is degenerate");
    }
    const auto rounded = static_cast<int>(std::floor(static_cast<double>(sum) / static_cast<double>(pairs) + 0.5));
    return std::max(1, rounded);
}

std::optional<int> exact_period(const Vector& series, int max_period) {
    const auto n = series.size();
    for (int P = 1; P <= max_period && P < n; ++P) {
        if ((series.tail(n - P).array() == series.head(n - P).array()).all()) {
            return P;
        }
    }
    return std::nullopt;
}

Pc1Result pc1_parents(const TimeSeriesDataset& ds, const std::string& target, const DiscoveryConfig& cfg,
                      int tau_max) {
    cfg.validate();
    if (!ds.find(target)) {
        throw DataError("pc1: unknown target '" + target + "'");
    }
    if (tau_max < 1) {
        throw DataError("pc1: tau_max must be >= 1");
    }
    if (ds.rows() <= tau_max + 10) {
        throw DataError("pc1: need T > tau_max + 10");
    }
    const auto names = ds.names();
    const LaggedDesign design = build_lagged_design(ds, target, tau_max);
    const long n = static_cast<long>(design.y.size());

    Pc1Result result;
    result.target = target;
    const std::size_t C = design.columns.size();
    std::vector<CandidateState> states(C);
    std::vector<std::size_t> var_index(C);
    for (std::size_t c = 0; c < C; ++c) {
        states[c].link = design.columns[c];
        var_index[c] = static_cast<std::size_t>(ds.index_of(design.columns[c].variable));
    }

    auto run_test = [&](std::size_t c, const std::vector<std::size_t>& conds) -> CiResult {
        Matrix Z(design.X.rows(), static_cast<Eigen::Index>(conds.size()));
        for (std::size_t k = 0; k < conds.size(); ++k) {
            Z.col(static_cast<Eigen::Index>(k)) = design.X.col(static_cast<Eigen::Index>(conds[k]));
        }
        double r = 0.0;
        try {
            r = partial_corr(design.X.col(static_cast<Eigen::Index>(c)), design.y, Z);
        } catch (const DegenerateError&) {
            // Nothing left to explain: the candidate carries no information beyond Z.
            return CiResult{0.0, 0.0, 1.0, n, static_cast<long>(conds.size())};
        }
        return parcorr_test(r, n, static_cast<long>(conds.size()));
    };

    // Ranking: min_abs_stat descending, ties by (variable index, lag).
    auto ranked_alive = [&] {
        std::vector<std::size_t> order;
        for (std::size_t c = 0; c < C; ++c) {
            if (states[c].alive) {
                order.push_back(c);
            }
        }
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (states[a].min_abs_stat != states[b].min_abs_stat) {
                return states[a].min_abs_stat > states[b].min_abs_stat;
            }
            if (var_index[a] != var_index[b]) {
                return var_index[a] < var_index[b];
            }
            return states[a].link.lag < states[b].link.lag;
        });
        return order;
    };

    auto record = [](CandidateState& s, const CiResult& res, int p, double alpha) {
        s.last_p = res.p_value;
        s.last_r = res.r;
        s.last_condition_size = p;
        s.min_abs_stat = p == 0 ? std::abs(res.r) : std::min(s.min_abs_stat, std::abs(res.r));
        if (res.p_value > alpha) {
            s.alive = false;
        }
    };

    // p = 0: unconditional screening.
    for (std::size_t c = 0; c < C; ++c) {
        record(states[c], run_test(c, {}), 0, cfg.alpha);
    }
    result.iterations = 1;

    for (int p = 1;; ++p) {
        auto order = ranked_alive();
        if (p > static_cast<int>(order.size()) - 1) {
            break;
        }
        if (cfg.max_condition_size && p > *cfg.max_condition_size) {
            break;
        }
        // Conditions come from the ranking at the start of the pass; kills apply afterwards.
        std::vector<CandidateState> next = states;
        for (std::size_t c : order) {
            std::vector<std::size_t> conds;
            for (std::size_t o : order) {
                if (o != c && static_cast<int>(conds.size()) < p) {
                    conds.push_back(o);
                }
            }
            CiResult res;
            try {
                res = run_test(c, conds);
            } catch (const CollinearityError&) {
                const std::size_t dropped = conds.back();
                conds.pop_back();
                json detail = {{"target", target},
                               {"candidate", to_string(states[c].link)},
                               {"condition_size", p},
                               {"dropped", to_string(states[dropped].link)}};
                try {
                    res = run_test(c, conds);
                    detail["resolved"] = true;
                    result.audit.push_back({"collinearity_retry", std::move(detail)});
                } catch (const CollinearityError&) {
                    detail["resolved"] = false;
                    result.audit.push_back({"collinearity_retry", std::move(detail)});
                    continue;
                }
            }
            record(next[c], res, static_cast<int>(conds.size()), cfg.alpha);
        }
        states = std::move(next);
        ++result.iterations;
    }

    // Report in final rank order, dead candidates after the living in their index order.
    const auto order = ranked_alive();
    for (std::size_t c : order) {
        result.candidates.push_back(states[c]);
    }
    for (std::size_t c = 0; c < C; ++c) {
        if (!states[c].alive) {
            result.candidates.push_back(states[c]);
        }
    }
    return result;
}

TimeSeriesGraph discover_graph(const TimeSeriesDataset& ds, const DiscoveryConfig& cfg) {
    cfg.validate();
    auto [stationary, report] = make_stationary(ds, cfg.stationarity_threshold);
    const auto names = stationary.names();

    std::vector<AuditEntry> audit;
    audit.push_back({"config",
                     {{"alpha", cfg.alpha},
                      {"max_scan_lag", cfg.max_scan_lag},
                      {"tau_max", cfg.tau_max ? json(*cfg.tau_max) : json(nullptr)},
                      {"max_condition_size", cfg.max_condition_size ? json(*cfg.max_condition_size) : json(nullptr)},
                      {"stationarity_threshold", cfg.stationarity_threshold},
                      {"skip_deterministic_targets", cfg.skip_deterministic_targets}}});
    audit.push_back({"stationarity", to_json(report)});

    int tau_max = 1;
    if (cfg.tau_max) {
        tau_max = *cfg.tau_max;
        audit.push_back({"tau_max", {{"value", tau_max}, {"source", "override"}}});
    } else if (names.size() >= 2) {
        const int scan = std::min<int>(cfg.max_scan_lag, static_cast<int>(stationary.rows()) - 3);
        tau_max = select_tau_max(stationary, std::max(1, scan));
        audit.push_back({"tau_max", {{"value", tau_max}, {"source", "lagged correlations"}, {"series", "transformed"}}});
    } else {
        audit.push_back({"tau_max", {{"value", tau_max}, {"source", "single variable"}}});
    }

    std::vector<bool> searched(names.size(), true);
    if (cfg.skip_deterministic_targets) {
        for (std::size_t v = 0; v < names.size(); ++v) {
            const auto period = exact_period(stationary.values().col(static_cast<Eigen::Index>(v)), cfg.max_scan_lag);
            if (period) {
                searched[v] = false;
                audit.push_back({"deterministic_target", {{"variable", names[v]}, {"period", *period}}});
            }
        }
    }

    std::vector<std::optional<Pc1Result>> results(names.size());
    parallel_for(names.size(), cfg.threads, [&](std::size_t v) {
        if (searched[v]) {
            results[v] = pc1_parents(stationary, names[v], cfg, tau_max);
        }
    });

    std::vector<Link> links;
    for (std::size_t v = 0; v < names.size(); ++v) {
        if (!results[v]) {
            continue;
        }
        for (const auto& c : results[v]->parents()) {
            links.push_back({c.link.variable, names[v], c.link.lag, std::clamp(c.last_r, -1.0, 1.0),
                             Provenance::discovered});
        }
        for (auto& entry : results[v]->audit) {
            audit.push_back(std::move(entry));
        }
    }
    return TimeSeriesGraph(names, tau_max, cfg.alpha, std::move(links), std::move(audit));
}

}  // namespace causalift
