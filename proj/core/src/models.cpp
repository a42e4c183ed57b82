#include "causalift/error.hpp"
#include "causalift/models.hpp"
#include "model_detail.hpp"

#include <type_traits>

namespace causalift {

using nlohmann::json;

std::string to_string(ModelFamily family) {
    switch (family) {
        case ModelFamily::ols: return "ols";
        case ModelFamily::lasso: return "lasso";
        case ModelFamily::forest: return "forest";
        case ModelFamily::gbt: return "gbt";
        case ModelFamily::mlp: return "mlp";
    }
    return "ols";
}

ModelFamily family_from_string(const std::string& text) {
    for (auto f : {ModelFamily::ols, ModelFamily::lasso, ModelFamily::forest, ModelFamily::gbt, ModelFamily::mlp}) {
        if (to_string(f) == text) {
            return f;
        }
    }
    throw DataError("unknown model family '" + text + "' (expected ols, lasso, forest, gbt or mlp)");
}

ModelFamily ModelSpec::family() const {
    return static_cast<ModelFamily>(params.index());
}

json to_json(const Hyperparams& params) {
    return std::visit(
        [](const auto& p) -> json {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, OlsParams>) {
                return json::object();
            } else if constexpr (std::is_same_v<T, LassoParams>) {
                return {{"alpha", p.alpha}, {"max_sweeps", p.max_sweeps}, {"tolerance", p.tolerance}};
            } else if constexpr (std::is_same_v<T, ForestParams>) {
                return {{"trees", p.trees},
                        {"max_depth", p.max_depth},
                        {"feature_fraction", p.feature_fraction},
                        {"min_samples_leaf", p.min_samples_leaf},
                        {"max_bins", p.max_bins}};
            } else if constexpr (std::is_same_v<T, GbtParams>) {
                return {{"trees", p.trees},
                        {"max_depth", p.max_depth},
                        {"learning_rate", p.learning_rate},
                        {"min_samples_leaf", p.min_samples_leaf},
                        {"subsample", p.subsample},
                        {"max_bins", p.max_bins}};
            } else {
                return {{"hidden", p.hidden},
                        {"learning_rate", p.learning_rate},
                        {"epochs", p.epochs},
                        {"batch_size", p.batch_size},
                        {"l2", p.l2}};
            }
        },
        params);
}

Hyperparams hyperparams_from_json(ModelFamily family, const json& doc) {
    if (!doc.is_object()) {
        throw SchemaError("hyperparams", "expected an object");
    }
    try {
        switch (family) {
            case ModelFamily::ols:
                return OlsParams{};
            case ModelFamily::lasso: {
                LassoParams p;
                p.alpha = doc.value("alpha", p.alpha);
                p.max_sweeps = doc.value("max_sweeps", p.max_sweeps);
                p.tolerance = doc.value("tolerance", p.tolerance);
                return p;
            }
            case ModelFamily::forest: {
                ForestParams p;
                p.trees = doc.value("trees", p.trees);
                p.max_depth = doc.value("max_depth", p.max_depth);
                p.feature_fraction = doc.value("feature_fraction", p.feature_fraction);
                p.min_samples_leaf = doc.value("min_samples_leaf", p.min_samples_leaf);
                p.max_bins = doc.value("max_bins", p.max_bins);
                return p;
            }
            case ModelFamily::gbt: {
                GbtParams p;
                p.trees = doc.value("trees", p.trees);
                p.max_depth = doc.value("max_depth", p.max_depth);
                p.learning_rate = doc.value("learning_rate", p.learning_rate);
                p.min_samples_leaf = doc.value("min_samples_leaf", p.min_samples_leaf);
                p.subsample = doc.value("subsample", p.subsample);
                p.max_bins = doc.value("max_bins", p.max_bins);
                return p;
            }
            case ModelFamily::mlp: {
                MlpParams p;
                p.hidden = doc.value("hidden", p.hidden);
                p.learning_rate = doc.value("learning_rate", p.learning_rate);
                p.epochs = doc.value("epochs", p.epochs);
                p.batch_size = doc.value("batch_size", p.batch_size);
                p.l2 = doc.value("l2", p.l2);
                return p;
            }
        }
    } catch (const json::exception& e) {
        throw SchemaError("hyperparams", e.what());
    }
    return OlsParams{};
}

Vector predict(const TrainedModel& model, const Matrix& X) {
    if (static_cast<std::size_t>(X.cols()) != model.input_schema.size()) {
        throw DataError("predict: model expects " + std::to_string(model.input_schema.size()) +
                        " input columns, got " + std::to_string(X.cols()));
    }
    const Matrix scaled = model.input_scaling ? model.input_scaling->apply(X) : X;
    return std::visit(
        [&](const auto& p) -> Vector {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, LinearModel>) {
                return ((scaled * p.coefficients).array() + p.intercept).matrix();
            } else if constexpr (std::is_same_v<T, TreeEnsemble>) {
                return detail::predict_ensemble(p, scaled);
            } else {
                return detail::predict_mlp(p, scaled);
            }
        },
        model.params);
}

TrainedModel fit_model(const ModelSpec& spec, const Matrix& X, const Vector& y, std::vector<std::string> schema) {
    switch (spec.family()) {
        case ModelFamily::ols:
            return fit_ols(X, y, std::move(schema));
        case ModelFamily::forest:
            return fit_forest(X, y, std::get<ForestParams>(spec.params), spec.seed, std::move(schema));
        case ModelFamily::gbt:
            return fit_gbt(X, y, std::get<GbtParams>(spec.params), spec.seed, std::move(schema));
        case ModelFamily::lasso:
        case ModelFamily::mlp: {
            auto scaling = Standardizer::fit(X);
            const Matrix Xs = scaling.apply(X);
            TrainedModel model = spec.family() == ModelFamily::lasso
                                     ? fit_lasso(Xs, y, std::get<LassoParams>(spec.params), std::move(schema))
                                     : fit_mlp(Xs, y, std::get<MlpParams>(spec.params), spec.seed, std::move(schema));
            model.spec = spec;
            model.input_scaling = std::move(scaling);
            return model;
        }
    }
    throw DataError("fit_model: unknown family");
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr int kModelFormatVersion = 1;

json vec(const Vector& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

Vector vec_from(const json& doc, const std::string& path) {
    try {
        const auto values = doc.get<std::vector<double>>();
        return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
    } catch (const json::exception&) {
        throw SchemaError(path, "expected an array of numbers");
    }
}

json mat(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        rows.push_back(vec(m.row(r).transpose()));
    }
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", rows}};
}

Matrix mat_from(const json& doc, const std::string& path) {
    const auto r = doc.at("rows").get<Eigen::Index>();
    const auto c = doc.at("cols").get<Eigen::Index>();
    const auto& data = doc.at("data");
    if (static_cast<Eigen::Index>(data.size()) != r) {
        throw SchemaError(path + ".data", "row count mismatch");
    }
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        const Vector row = vec_from(data[static_cast<std::size_t>(i)], path + ".data");
        if (row.size() != c) {
            throw SchemaError(path + ".data", "column count mismatch");
        }
        m.row(i) = row.transpose();
    }
    return m;
}

json params_json(const FittedParams& params) {
    return std::visit(
        [](const auto& p) -> json {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, LinearModel>) {
                return {{"kind", "linear"}, {"intercept", p.intercept}, {"coefficients", vec(p.coefficients)}};
            } else if constexpr (std::is_same_v<T, TreeEnsemble>) {
                json trees = json::array();
                for (const auto& t : p.trees) {
                    json nodes = json::array();
                    for (const auto& n : t.nodes) {
                        nodes.push_back(json::array({n.feature, n.threshold, n.left, n.right, n.value}));
                    }
                    trees.push_back(std::move(nodes));
                }
                return {{"kind", "trees"}, {"base", p.base}, {"scale", p.scale}, {"average", p.average}, {"trees", trees}};
            } else {
                json layers = json::array();
                for (const auto& l : p.layers) {
                    layers.push_back({{"weights", mat(l.weights)}, {"bias", vec(l.bias)}});
                }
                return {{"kind", "mlp"}, {"y_center", p.y_center}, {"y_scale", p.y_scale}, {"layers", layers}};
            }
        },
        params);
}

FittedParams params_from(const json& doc) {
    const auto kind = doc.at("kind").get<std::string>();
    if (kind == "linear") {
        return LinearModel{doc.at("intercept").get<double>(), vec_from(doc.at("coefficients"), "params.coefficients")};
    }
    if (kind == "trees") {
        TreeEnsemble e;
        e.base = doc.at("base").get<double>();
        e.scale = doc.at("scale").get<double>();
        e.average = doc.at("average").get<bool>();
        for (const auto& jt : doc.at("trees")) {
            RegressionTree t;
            for (const auto& jn : jt) {
                t.nodes.push_back({jn.at(0).get<int>(), jn.at(1).get<double>(), jn.at(2).get<int>(), jn.at(3).get<int>(),
                                   jn.at(4).get<double>()});
            }
            const auto count = static_cast<int>(t.nodes.size());
            for (const auto& n : t.nodes) {
                if (n.feature >= 0 && (n.left <= 0 || n.right <= 0 || n.left >= count || n.right >= count)) {
                    throw SchemaError("params.trees", "child index out of range");
                }
            }
            if (t.nodes.empty()) {
                throw SchemaError("params.trees", "empty tree");
            }
            e.trees.push_back(std::move(t));
        }
        return e;
    }
    if (kind == "mlp") {
        MlpModel net;
        net.y_center = doc.at("y_center").get<double>();
        net.y_scale = doc.at("y_scale").get<double>();
        for (const auto& jl : doc.at("layers")) {
            net.layers.push_back({mat_from(jl.at("weights"), "params.layers"), vec_from(jl.at("bias"), "params.layers.bias")});
        }
        return net;
    }
    throw SchemaError("params.kind", "unknown kind '" + kind + "'");
}

}  // namespace

json to_json(const TrainedModel& model) {
    json out = {{"format", "causalift-model"},
                {"version", kModelFormatVersion},
                {"family", to_string(model.spec.family())},
                {"seed", model.spec.seed},
                {"hyperparams", to_json(model.spec.params)},
                {"input_schema", model.input_schema},
                {"params", params_json(model.params)},
                {"training_loss", model.training_loss},
                {"importances", model.importances},
                {"notes", model.notes},
                {"loss_flagged", model.loss_flagged}};
    if (model.input_scaling) {
        out["input_scaling"] = {{"center", vec(model.input_scaling->center)}, {"scale", vec(model.input_scaling->scale)}};
    } else {
        out["input_scaling"] = nullptr;
    }
    return out;
}

TrainedModel model_from_json(const json& doc) {
    if (!doc.is_object() || doc.value("format", "") != "causalift-model") {
        throw SchemaError("format", "not a causalift model document");
    }
    if (doc.value("version", 0) != kModelFormatVersion) {
        throw SchemaError("version", "unsupported model format version");
    }
    try {
        TrainedModel m;
        const auto family = family_from_string(doc.at("family").get<std::string>());
        m.spec = {hyperparams_from_json(family, doc.at("hyperparams")), doc.at("seed").get<std::uint64_t>()};
        m.input_schema = doc.at("input_schema").get<std::vector<std::string>>();
        m.params = params_from(doc.at("params"));
        m.training_loss = doc.value("training_loss", std::vector<double>{});
        m.importances = doc.value("importances", std::vector<double>{});
        m.notes = doc.value("notes", std::vector<std::string>{});
        m.loss_flagged = doc.value("loss_flagged", false);
        if (!doc.at("input_scaling").is_null()) {
            m.input_scaling = Standardizer{vec_from(doc.at("input_scaling").at("center"), "input_scaling.center"),
                                           vec_from(doc.at("input_scaling").at("scale"), "input_scaling.scale")};
        }
        return m;
    } catch (const json::exception& e) {
        throw SchemaError("$", e.what());
    } catch (const DataError& e) {
        throw SchemaError("family", e.what());
    }
}

}  // namespace causalift
