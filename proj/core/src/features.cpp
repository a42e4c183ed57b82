#include "causalift/features.hpp"

#include "causalift/error.hpp"
#include "causalift/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace causalift {

using nlohmann::json;

std::string to_string(SelectorMethod method) {
    switch (method) {
        case SelectorMethod::causal_lags: return "causal-lags";
        case SelectorMethod::causal_all: return "causal-all";
        case SelectorMethod::all: return "all";
        case SelectorMethod::rfe: return "rfe";
        case SelectorMethod::pca: return "pca";
        case SelectorMethod::tree: return "tree";
        case SelectorMethod::lasso: return "lasso";
    }
    return "all";
}

SelectorMethod selector_from_string(const std::string& text) {
    for (auto m : all_selectors()) {
        if (to_string(m) == text) {
            return m;
        }
    }
    throw DataError("unknown selector '" + text +
                    "' (expected causal-lags, causal-all, all, rfe, pca, tree or lasso)");
}

const std::vector<SelectorMethod>& all_selectors() {
    static const std::vector<SelectorMethod> methods = {
        SelectorMethod::causal_lags, SelectorMethod::causal_all, SelectorMethod::all, SelectorMethod::rfe,
        SelectorMethod::pca,         SelectorMethod::tree,       SelectorMethod::lasso};
    return methods;
}

bool is_causal(SelectorMethod method) {
    return method == SelectorMethod::causal_lags || method == SelectorMethod::causal_all;
}

std::size_t FeatureSet::size() const {
    return pca ? static_cast<std::size_t>(pca->loadings.cols()) : columns.size();
}

std::vector<std::string> FeatureSet::schema() const {
    std::vector<std::string> out;
    if (pca) {
        for (Eigen::Index k = 0; k < pca->loadings.cols(); ++k) {
            out.push_back("PC" + std::to_string(k + 1));
        }
        return out;
    }
    for (const auto& c : columns) {
        out.push_back(to_string(c));
    }
    return out;
}

namespace {

void require_target(const TimeSeriesGraph& graph, const std::string& target) {
    if (!graph.has_variable(target)) {
        throw DataError("target '" + target + "' is not a graph variable");
    }
}

void flag_if_empty(FeatureSet& fs) {
    if (fs.empty()) {
        fs.notes.push_back("selector returned no features");
    }
}

// Canonical order: variable index in the graph, then lag.
void sort_columns(std::vector<LagColumn>& cols, const std::vector<std::string>& variables) {
    auto idx = [&](const std::string& v) { return std::find(variables.begin(), variables.end(), v) - variables.begin(); };
    std::sort(cols.begin(), cols.end(), [&](const LagColumn& a, const LagColumn& b) {
        const auto ia = idx(a.variable);
        const auto ib = idx(b.variable);
        return ia != ib ? ia < ib : a.lag < b.lag;
    });
}

std::vector<LagColumn> pick(const LaggedDesign& design, const std::vector<Eigen::Index>& keep) {
    std::vector<LagColumn> out;
    for (auto c : keep) {
        out.push_back(design.columns[static_cast<std::size_t>(c)]);
    }
    return out;
}

}  // namespace

FeatureSet causal_lags(const TimeSeriesGraph& graph, const std::string& target) {
    require_target(graph, target);
    FeatureSet fs;
    fs.method = SelectorMethod::causal_lags;
    fs.target = target;
    for (const auto& link : graph.links_into(target)) {
        fs.columns.push_back({link.source, link.lag});
    }
    sort_columns(fs.columns, graph.variables());
    fs.params = {{"tau_max", graph.tau_max()}};
    flag_if_empty(fs);
    return fs;
}

FeatureSet causal_all(const TimeSeriesGraph& graph, const std::string& target) {
    require_target(graph, target);
    std::set<std::string> parents;
    for (const auto& link : graph.links_into(target)) {
        parents.insert(link.source);
    }
    FeatureSet fs;
    fs.method = SelectorMethod::causal_all;
    fs.target = target;
    for (const auto& v : graph.variables()) {
        if (parents.contains(v)) {
            for (int lag = 1; lag <= graph.tau_max(); ++lag) {
                fs.columns.push_back({v, lag});
            }
        }
    }
    fs.params = {{"tau_max", graph.tau_max()}, {"parent_variables", parents.size()}};
    flag_if_empty(fs);
    return fs;
}

FeatureSet all_features(const std::vector<std::string>& variables, int tau_max, const std::string& target) {
    if (std::find(variables.begin(), variables.end(), target) == variables.end()) {
        throw DataError("target '" + target + "' is not a variable");
    }
    if (tau_max < 1) {
        throw DataError("tau_max must be >= 1");
    }
    FeatureSet fs;
    fs.method = SelectorMethod::all;
    fs.target = target;
    fs.columns = full_lag_columns(variables, tau_max);
    fs.params = {{"tau_max", tau_max}};
    return fs;
}

FeatureSet rfe(const LaggedDesign& design, std::optional<int> n_keep) {
    const auto p = design.X.cols();
    const auto n = design.X.rows();
    const int keep = n_keep.value_or(static_cast<int>(p / 2));
    if (keep < 0 || keep > p) {
        throw DataError("rfe: n_keep must be in [0, " + std::to_string(p) + "]");
    }
    FeatureSet fs;
    fs.method = SelectorMethod::rfe;
    fs.target = design.target;

    const auto st = Standardizer::fit(design.X);
    const Matrix Xs = st.apply(design.X);
    const Vector yc = design.y.array() - design.y.mean();
    const Matrix G = Xs.transpose() * Xs;
    const Vector b = Xs.transpose() * yc;

    std::vector<Eigen::Index> active;
    std::vector<std::string> dropped_constant;
    for (Eigen::Index c = 0; c < p; ++c) {
        if (st.is_constant(c)) {
            dropped_constant.push_back(to_string(design.columns[static_cast<std::size_t>(c)]));
        } else {
            active.push_back(c);
        }
    }
    // Constant columns go first; when more must stay than are informative, keep them in column order.
    if (static_cast<int>(active.size()) < keep) {
        active.resize(static_cast<std::size_t>(p));
        std::iota(active.begin(), active.end(), Eigen::Index{0});
    }
    for (const auto& name : dropped_constant) {
        fs.notes.push_back("dropped constant column " + name);
    }

    bool ridge = false;
    while (static_cast<int>(active.size()) > keep) {
        const auto k = static_cast<Eigen::Index>(active.size());
        Matrix Gs(k, k);
        Vector bs(k);
        for (Eigen::Index i = 0; i < k; ++i) {
            bs(i) = b(active[static_cast<std::size_t>(i)]);
            for (Eigen::Index j = 0; j < k; ++j) {
                Gs(i, j) = G(active[static_cast<std::size_t>(i)], active[static_cast<std::size_t>(j)]);
            }
        }
        if (n <= k + 1) {
            // Underdetermined: a tiny ridge keeps the ranking defined.
            Gs.diagonal().array() += 1e-6 * std::max(Gs.trace() / static_cast<double>(k), 1.0);
            ridge = true;
        }
        Eigen::LDLT<Matrix> ldlt(Gs);
        Vector beta = ldlt.solve(bs);
        if (ldlt.info() != Eigen::Success || !beta.allFinite()) {
            Eigen::CompleteOrthogonalDecomposition<Matrix> cod(Gs);
            beta = cod.solve(bs);
        }
        Eigen::Index worst = 0;
        for (Eigen::Index i = 1; i < k; ++i) {
            if (std::abs(beta(i)) < std::abs(beta(worst))) {
                worst = i;
            }
        }
        active.erase(active.begin() + worst);
    }
    if (ridge) {
        fs.notes.push_back("ridge fallback: fewer rows than columns during elimination");
    }
    fs.columns = pick(design, active);
    fs.params = {{"n_keep", keep}, {"estimator", "least squares on standardized columns"}, {"step", 1}};
    flag_if_empty(fs);
    return fs;
}

FeatureSet pca_select(const LaggedDesign& design, double variance_target) {
    if (!(variance_target > 0.0 && variance_target <= 1.0)) {
        throw DataError("pca: variance target must be in (0, 1]");
    }
    const auto n = design.X.rows();
    const auto p = design.X.cols();
    FeatureSet fs;
    fs.method = SelectorMethod::pca;
    fs.target = design.target;
    fs.params = {{"variance_target", variance_target}};

    const auto st = Standardizer::fit(design.X);
    const Matrix Xs = st.apply(design.X);
    PcaComponents pc;
    pc.basis = design.columns;
    pc.center = st.center;
    pc.scale = st.scale;
    if (p == 0 || n < 2) {
        pc.loadings = Matrix(p, 0);
        fs.pca = std::move(pc);
        flag_if_empty(fs);
        return fs;
    }
    const Matrix C = (Xs.transpose() * Xs) / static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(C);
    // Eigen returns ascending eigenvalues.
    Vector values = eig.eigenvalues().reverse().cwiseMax(0.0);
    Matrix vectors = eig.eigenvectors().rowwise().reverse();
    const double total = values.sum();
    if (!(total > 0.0)) {
        pc.loadings = Matrix(p, 0);
        fs.pca = std::move(pc);
        fs.notes.push_back("all columns constant");
        flag_if_empty(fs);
        return fs;
    }
    Eigen::Index k = 0;
    double cumulative = 0.0;
    while (k < p) {
        cumulative += values(k) / total;
        pc.explained_ratio.push_back(values(k) / total);
        ++k;
        if (cumulative >= variance_target - 1e-12) {
            break;
        }
    }
    pc.loadings = vectors.leftCols(k);
    // Sign convention: the largest-magnitude loading of each component is positive.
    for (Eigen::Index j = 0; j < k; ++j) {
        Eigen::Index arg = 0;
        pc.loadings.col(j).cwiseAbs().maxCoeff(&arg);
        if (pc.loadings(arg, j) < 0.0) {
            pc.loadings.col(j) *= -1.0;
        }
    }
    fs.params["components"] = k;
    fs.params["explained_variance"] = cumulative;
    fs.pca = std::move(pc);
    return fs;
}

FeatureSet tree_select(const LaggedDesign& design, ImportanceRule rule, std::uint64_t seed) {
    FeatureSet fs;
    fs.method = SelectorMethod::tree;
    fs.target = design.target;
    const ForestParams params;
    fs.params = {{"rule", rule == ImportanceRule::mean ? "mean" : "zero"},
                 {"forest", to_json(Hyperparams{params})},
                 {"seed", seed}};
    const auto p = design.X.cols();
    if (p == 0) {
        flag_if_empty(fs);
        return fs;
    }
    const auto model = fit_forest(design.X, design.y, params, seed);
    const auto& imp = model.importances;
    const double total = std::accumulate(imp.begin(), imp.end(), 0.0);
    std::vector<Eigen::Index> keep;
    if (total > 0.0) {
        const double threshold = rule == ImportanceRule::mean ? 1.0 / static_cast<double>(p) : 0.0;
        for (Eigen::Index c = 0; c < p; ++c) {
            if (imp[static_cast<std::size_t>(c)] / total > threshold) {
                keep.push_back(c);
            }
        }
    } else {
        fs.notes.push_back("all importances are zero");
    }
    fs.columns = pick(design, keep);
    flag_if_empty(fs);
    return fs;
}

FeatureSet lasso_select(const LaggedDesign& design, double alpha) {
    if (!(alpha > 0.0)) {
        throw DataError("lasso: alpha must be > 0");
    }
    FeatureSet fs;
    fs.method = SelectorMethod::lasso;
    fs.target = design.target;
    fs.params = {{"alpha", alpha}, {"standardized", true}};
    if (design.X.cols() == 0) {
        flag_if_empty(fs);
        return fs;
    }
    const auto st = Standardizer::fit(design.X);
    const Matrix Xs = st.apply(design.X);
    const Vector yc = design.y.array() - design.y.mean();
    LassoParams lp;
    lp.alpha = alpha;
    const auto model = fit_lasso(Xs, yc, lp);
    const auto& coef = std::get<LinearModel>(model.params).coefficients;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index c = 0; c < coef.size(); ++c) {
        if (std::abs(coef(c)) > 1e-10) {
            keep.push_back(c);
        }
    }
    fs.columns = pick(design, keep);
    flag_if_empty(fs);
    return fs;
}

ModelInput model_input(const FeatureSet& features, const TimeSeriesDataset& ds, int tau_max) {
    ModelInput in;
    in.schema = features.schema();
    if (features.pca) {
        const auto& pc = *features.pca;
        const auto design = build_lagged_design(ds, features.target, tau_max, std::span<const LagColumn>(pc.basis));
        Standardizer st{pc.center, pc.scale};
        in.X = st.apply(design.X) * pc.loadings;
        in.y = design.y;
        in.row_time_index = design.row_time_index;
        return in;
    }
    auto design = build_lagged_design(ds, features.target, tau_max, std::span<const LagColumn>(features.columns));
    in.X = std::move(design.X);
    in.y = std::move(design.y);
    in.row_time_index = std::move(design.row_time_index);
    return in;
}

namespace {

json columns_json(const std::vector<LagColumn>& cols) {
    json out = json::array();
    for (const auto& c : cols) {
        out.push_back(json::array({c.variable, c.lag}));
    }
    return out;
}

std::vector<LagColumn> columns_from(const json& doc, const std::string& path) {
    if (!doc.is_array()) {
        throw SchemaError(path, "expected an array of [variable, lag] pairs");
    }
    std::vector<LagColumn> out;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& e = doc[i];
        const std::string p = path + "[" + std::to_string(i) + "]";
        if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_number_integer()) {
            throw SchemaError(p, "expected [variable, lag]");
        }
        if (e[1].get<int>() < 1) {
            throw SchemaError(p, "lag must be >= 1");
        }
        out.push_back({e[0].get<std::string>(), e[1].get<int>()});
    }
    return out;
}

json vector_json(const Vector& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

Vector vector_from(const json& doc, const std::string& path) {
    try {
        const auto values = doc.get<std::vector<double>>();
        return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
    } catch (const json::exception&) {
        throw SchemaError(path, "expected an array of numbers");
    }
}

}  // namespace

json to_json(const FeatureSet& features) {
    json out = {{"method", to_string(features.method)},
                {"target", features.target},
                {"size", features.size()},
                {"params", features.params},
                {"notes", features.notes}};
    if (features.pca) {
        const auto& pc = *features.pca;
        json components = json::array();
        for (Eigen::Index k = 0; k < pc.loadings.cols(); ++k) {
            components.push_back(vector_json(pc.loadings.col(k)));
        }
        out["loadings"] = {{"basis", columns_json(pc.basis)},
                           {"center", vector_json(pc.center)},
                           {"scale", vector_json(pc.scale)},
                           {"components", components},
                           {"explained_ratio", pc.explained_ratio}};
    } else {
        out["columns"] = columns_json(features.columns);
    }
    return out;
}

FeatureSet feature_set_from_json(const json& doc) {
    if (!doc.is_object()) {
        throw SchemaError("$", "feature set must be an object");
    }
    FeatureSet fs;
    try {
        fs.method = selector_from_string(doc.at("method").get<std::string>());
        fs.target = doc.at("target").get<std::string>();
    } catch (const json::exception&) {
        throw SchemaError("method", "method and target are required strings");
    } catch (const DataError& e) {
        throw SchemaError("method", e.what());
    }
    fs.params = doc.value("params", json::object());
    fs.notes = doc.value("notes", std::vector<std::string>{});
    if (doc.contains("loadings")) {
        const auto& l = doc.at("loadings");
        PcaComponents pc;
        pc.basis = columns_from(l.value("basis", json::array()), "loadings.basis");
        pc.center = vector_from(l.value("center", json::array()), "loadings.center");
        pc.scale = vector_from(l.value("scale", json::array()), "loadings.scale");
        const auto p = static_cast<Eigen::Index>(pc.basis.size());
        if (pc.center.size() != p || pc.scale.size() != p) {
            throw SchemaError("loadings", "center/scale length must match basis");
        }
        const auto comps = l.value("components", json::array());
        pc.loadings = Matrix(p, static_cast<Eigen::Index>(comps.size()));
        for (std::size_t k = 0; k < comps.size(); ++k) {
            const Vector v = vector_from(comps[k], "loadings.components[" + std::to_string(k) + "]");
            if (v.size() != p) {
                throw SchemaError("loadings.components[" + std::to_string(k) + "]", "length must match basis");
            }
            pc.loadings.col(static_cast<Eigen::Index>(k)) = v;
        }
        pc.explained_ratio = l.value("explained_ratio", std::vector<double>{});
        fs.pca = std::move(pc);
    } else {
        fs.columns = columns_from(doc.value("columns", json::array()), "columns");
        std::set<LagColumn> seen(fs.columns.begin(), fs.columns.end());
        if (seen.size() != fs.columns.size()) {
            throw SchemaError("columns", "duplicate column");
        }
    }
    return fs;
}

}  // namespace causalift
