#include "causalift/service.hpp"

#include "causalift/error.hpp"
#include "causalift/evaluation.hpp"
#include "causalift/features.hpp"
#include "causalift/models.hpp"
#include "causalift/pipeline.hpp"

#include <fstream>
#include <mutex>
#include <variant>

namespace causalift {

using nlohmann::json;

namespace {

ServiceResponse error_response(int status, const std::string& message, json errors = json::array()) {
    return {status, {{"error", message}, {"errors", std::move(errors)}}};
}

json field_error(const std::string& path, const std::string& message) {
    return json::array({{{"path", path}, {"message", message}}});
}

void persist(const TimeSeriesGraph& graph, const std::filesystem::path& path) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) {
            throw DataError("cannot write '" + tmp.string() + "'");
        }
        out << to_json(graph).dump(2) << "\n";
    }
    std::filesystem::rename(tmp, path);
}

/// Resolves the feature set for (target, method) on the given graph, or an error response.
std::variant<FeatureSet, ServiceResponse> features_for(const TimeSeriesGraph& graph, const TrainSplit& train,
                                                       const std::string& target, const std::string& method) {
    if (target.empty() || method.empty()) {
        return error_response(400, "target and method are required");
    }
    if (!graph.has_variable(target)) {
        return error_response(400, "unknown target '" + target + "'", field_error("target", "not a graph variable"));
    }
    SelectorMethod m;
    try {
        m = selector_from_string(method);
    } catch (const Error& e) {
        return error_response(400, e.what(), field_error("method", e.what()));
    }
    try {
        return select_features(m, graph, train, target, ExperimentConfig{}, 0);
    } catch (const Error& e) {
        return error_response(422, e.what());
    }
}

}  // namespace

GraphService::GraphService(TimeSeriesGraph graph, TimeSeriesDataset dataset,
                           std::optional<std::filesystem::path> persist_path, double split_fraction)
    : graph_(std::move(graph)),
      dataset_(std::move(dataset)),
      persist_path_(std::move(persist_path)),
      split_fraction_(split_fraction) {
    for (const auto& v : graph_.variables()) {
        if (!dataset_.find(v)) {
            throw DataError("service: graph variable '" + v + "' missing from the dataset");
        }
    }
    if (!(split_fraction_ > 0.0 && split_fraction_ < 1.0)) {
        throw DataError("service: split fraction must lie in (0, 1)");
    }
}

TimeSeriesGraph GraphService::current_graph() const {
    std::shared_lock lock(mutex_);
    return graph_;
}

long GraphService::version() const {
    std::shared_lock lock(mutex_);
    return version_;
}

ServiceResponse GraphService::get_graph() const {
    return {200, to_json(current_graph())};
}

ServiceResponse GraphService::get_summary() const {
    std::shared_lock lock(mutex_);
    const TimeSeriesGraph g = graph_;
    const long v = version_;
    lock.unlock();
    return {200,
            {{"version", v},
             {"variables", g.variables()},
             {"tau_max", g.tau_max()},
             {"summary", to_json(summary_graph(g))}}};
}

ServiceResponse GraphService::post_edits(const std::string& body) {
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::parse_error& e) {
        return error_response(400, std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        return error_response(422, "edit spec must be an object", field_error("$", "expected an object"));
    }
    bool commit = true;
    std::optional<long> base_version;
    if (doc.contains("commit")) {
        if (!doc["commit"].is_boolean()) {
            return error_response(422, "invalid edit spec", field_error("commit", "expected a boolean"));
        }
        commit = doc["commit"].get<bool>();
        doc.erase("commit");
    }
    if (doc.contains("base_version")) {
        if (!doc["base_version"].is_number_integer()) {
            return error_response(422, "invalid edit spec", field_error("base_version", "expected an integer"));
        }
        base_version = doc["base_version"].get<long>();
        doc.erase("base_version");
    }
    EditSpec edits;
    try {
        edits = edits_from_json(doc);
    } catch (const SchemaError& e) {
        return error_response(422, "invalid edit spec", field_error(e.path(), e.message()));
    }

    std::unique_lock lock(mutex_);
    if (base_version && *base_version != version_) {
        return {409,
                {{"error", "graph changed since version " + std::to_string(*base_version)},
                 {"errors", json::array()},
                 {"version", version_}}};
    }
    TimeSeriesGraph edited = graph_;
    try {
        edited = apply_edits(graph_, edits);
    } catch (const EditError& e) {
        return error_response(422, "edit does not apply", field_error(e.path().empty() ? "$" : e.path(), e.what()));
    }
    if (commit) {
        if (persist_path_) {
            try {
                persist(edited, *persist_path_);
            } catch (const std::exception& e) {
                return error_response(500, std::string("persisting the graph failed: ") + e.what());
            }
        }
        graph_ = edited;
        ++version_;
    }
    return {200, {{"graph", to_json(edited)}, {"version", version_}, {"committed", commit}}};
}

ServiceResponse GraphService::get_features(const std::string& target, const std::string& method) const {
    const TimeSeriesGraph g = current_graph();
    const TrainSplit train{temporal_split(dataset_, split_fraction_).first};
    auto result = features_for(g, train, target, method);
    if (auto* err = std::get_if<ServiceResponse>(&result)) {
        return *err;
    }
    const auto& fs = std::get<FeatureSet>(result);
    json body = to_json(fs);
    body["count"] = fs.size();
    return {200, body};
}

ServiceResponse GraphService::quick_eval(const std::string& body) const {
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::parse_error& e) {
        return error_response(400, std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("target") || !doc["target"].is_string() || !doc.contains("method") ||
        !doc["method"].is_string()) {
        return error_response(400, "body must be {target, method, horizon}");
    }
    int horizon = 5;
    if (doc.contains("horizon")) {
        if (!doc["horizon"].is_number_integer() || doc["horizon"].get<int>() < 1) {
            return error_response(400, "horizon must be an integer >= 1", field_error("horizon", "expected >= 1"));
        }
        horizon = doc["horizon"].get<int>();
    }
    const TimeSeriesGraph g = current_graph();
    auto [train_ds, test_ds] = temporal_split(dataset_, split_fraction_);
    const TrainSplit train{std::move(train_ds)};
    const TestSplit test{std::move(test_ds)};
    auto result = features_for(g, train, doc["target"].get<std::string>(), doc["method"].get<std::string>());
    if (auto* err = std::get_if<ServiceResponse>(&result)) {
        return *err;
    }
    const auto& fs = std::get<FeatureSet>(result);
    if (fs.empty()) {
        return error_response(409, "the " + doc["method"].get<std::string>() + " feature set for " + fs.target +
                                       " is empty; add a parent link or pick another method");
    }
    try {
        const auto train_in = model_input(fs, train.data, g.tau_max());
        const auto model = fit_ols(train_in.X, train_in.y, train_in.schema);
        const auto test_in = model_input(fs, test.data, g.tau_max());
        const auto m = evaluate(model, test_in, test.data.interventions(), horizon);
        auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
        return {200,
                {{"mae", m.mae},
                 {"mape", opt(m.mape)},
                 {"mae_w", opt(m.mae_w)},
                 {"mape_w", opt(m.mape_w)},
                 {"n_features", m.n_features},
                 {"windows", m.window_count}}};
    } catch (const Error& e) {
        return error_response(422, e.what());
    }
}

}  // namespace causalift
