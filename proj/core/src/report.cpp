#include "causalift/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace causalift {

using nlohmann::json;

namespace {

std::string fixed(const json& v, int digits) {
    if (!v.is_number()) {
        return "n/a";
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v.get<double>());
    return buf;
}

std::string feature_count(const json& v) {
    if (!v.is_number()) {
        return "n/a";
    }
    const double n = v.get<double>();
    return n == std::floor(n) ? std::to_string(static_cast<long>(n)) : fixed(v, 1);
}

/// Cells with a value for `key` ascending, then cells without one.
std::vector<json> sorted_cells(const json& cells, const std::string& key) {
    std::vector<json> out(cells.begin(), cells.end());
    std::stable_sort(out.begin(), out.end(), [&](const json& a, const json& b) {
        const bool ha = a[key].is_number();
        const bool hb = b[key].is_number();
        if (ha != hb) {
            return ha;
        }
        return ha && a[key].get<double>() < b[key].get<double>();
    });
    return out;
}

std::string status(const json& cell, int n_runs) {
    const int failed = cell["failed"].get<int>();
    return failed == 0 ? std::string() : " (failed " + std::to_string(failed) + "/" + std::to_string(n_runs) + ")";
}

void table(std::ostringstream& out, const json& cells, const std::string& mae_key, const std::string& mape_key,
           const std::string& mae_label, const std::string& mape_label, int n_runs) {
    out << "| Selector | Model | N° F | " << mae_label << " | " << mape_label << " |\n";
    out << "|---|---|---:|---:|---:|\n";
    for (const auto& c : sorted_cells(cells, mae_key)) {
        out << "| " << c["selector"].get<std::string>() << " | " << c["family"].get<std::string>()
            << status(c, n_runs) << " | " << feature_count(c["n_features"]) << " | " << fixed(c[mae_key], 4)
            << " | " << fixed(c[mape_key], 2) << " |\n";
    }
}

}  // namespace

std::string render_report(const json& results, const json& aggregate) {
    const int n_runs = aggregate["n_runs"].get<int>();
    const int horizon = aggregate["horizon"].get<int>();
    std::ostringstream out;
    out << "# Feature selection results\n\n";
    out << "Runs: " << n_runs << ". Metrics are means over runs; rows are sorted by MAE.";
    if (results.contains("metadata") && results["metadata"].contains("tau_max")) {
        out << " tau_max: " << results["metadata"]["tau_max"].get<int>() << ".";
    }
    if (results.contains("config") && results["config"].contains("tuning_budget")) {
        out << " Random search: " << results["config"]["tuning_budget"].get<int>() << " draws, "
            << results["config"]["k_folds"].get<int>() << " contiguous folds.";
    }
    out << "\n";

    for (const auto& [target, data] : aggregate["targets"].items()) {
        const auto& cells = data["cells"];
        out << "\n## " << target << "\n\n### Full test set\n\n";
        table(out, cells, "mae", "mape", "MAE", "MAPE", n_runs);
        out << "\n### After interventions (t+1..t+" << horizon << ")\n\n";
        table(out, cells, "mae_w", "mape_w", "MAE_w", "MAPE_w", n_runs);

        out << "\n### Best selector per run\n\n| Selector | MAE wins | MAE_w wins |\n|---|---:|---:|\n";
        const auto& counts = data["best_counts"];
        for (const auto& [selector, wins] : counts["mae"]["wins"].items()) {
            const auto& w = counts["mae_w"]["wins"];
            out << "| " << selector << " | " << fixed(wins, 1) << " | "
                << fixed(w.contains(selector) ? w[selector] : json(0.0), 1) << " |\n";
        }
        out << "\nTied runs: " << counts["mae"]["tied_runs"].get<int>() << " (MAE), "
            << counts["mae_w"]["tied_runs"].get<int>() << " (MAE_w).\n";
    }
    return out.str();
}

}  // namespace causalift
