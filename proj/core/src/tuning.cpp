#include "causalift/error.hpp"
#include "causalift/models.hpp"
#include "causalift/parallel.hpp"

#include <cmath>
#include <limits>

namespace causalift {

std::vector<std::pair<std::size_t, std::size_t>> contiguous_folds(std::size_t n, int k) {
    if (k < 2 || n < static_cast<std::size_t>(k)) {
        throw DataError("folds: need k >= 2 and at least k rows");
    }
    std::vector<std::pair<std::size_t, std::size_t>> folds;
    const std::size_t base = n / static_cast<std::size_t>(k);
    const std::size_t extra = n % static_cast<std::size_t>(k);
    std::size_t begin = 0;
    for (std::size_t i = 0; i < static_cast<std::size_t>(k); ++i) {
        const std::size_t size = base + (i < extra ? 1 : 0);
        folds.emplace_back(begin, begin + size);
        begin += size;
    }
    return folds;
}

namespace {

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    return std::exp(u(rng));
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace

// Search ranges. MLP sizes are kept small so the full experiment stays desk-scale.
Hyperparams sample_hyperparams(ModelFamily family, std::mt19937_64& rng) {
    switch (family) {
        case ModelFamily::ols:
            return OlsParams{};
        case ModelFamily::lasso: {
            LassoParams p;
            p.alpha = log_uniform(rng, 1e-4, 1.0);
            return p;
        }
        case ModelFamily::forest: {
            ForestParams p;
            p.trees = uniform_int(rng, 20, 100);
            p.max_depth = uniform_int(rng, 3, 10);
            p.feature_fraction = uniform(rng, 0.2, 1.0);
            p.min_samples_leaf = uniform_int(rng, 1, 20);
            return p;
        }
        case ModelFamily::gbt: {
            GbtParams p;
            p.trees = uniform_int(rng, 20, 100);
            p.max_depth = uniform_int(rng, 1, 6);
            p.learning_rate = log_uniform(rng, 0.05, 0.3);
            p.min_samples_leaf = uniform_int(rng, 5, 50);
            p.subsample = uniform(rng, 0.5, 1.0);
            return p;
        }
        case ModelFamily::mlp: {
            static const int widths[] = {8, 16, 32};
            MlpParams p;
            const int layers = uniform_int(rng, 1, 2);
            p.hidden.clear();
            for (int l = 0; l < layers; ++l) {
                p.hidden.push_back(widths[uniform_int(rng, 0, 2)]);
            }
            p.learning_rate = log_uniform(rng, 1e-3, 3e-2);
            p.epochs = uniform_int(rng, 5, 20);
            static const int batches[] = {64, 128, 256};
            p.batch_size = batches[uniform_int(rng, 0, 2)];
            p.l2 = log_uniform(rng, 1e-6, 1e-2);
            return p;
        }
    }
    return OlsParams{};
}

SearchResult random_search_cv(ModelFamily family, const Matrix& X, const Vector& y,
                              const std::vector<std::string>& schema, int budget, int k_folds, std::uint64_t seed) {
    if (budget < 1) {
        throw DataError("random search: budget must be >= 1");
    }
    if (X.rows() < 3 * k_folds) {
        throw DataError("random search: need at least 3 x k_folds rows");
    }
    SearchResult result;
    if (family == ModelFamily::ols) {
        result.best = {OlsParams{}, seed};
        result.model = fit_model(result.best, X, y, schema);
        return result;
    }
    const auto folds = contiguous_folds(static_cast<std::size_t>(X.rows()), k_folds);
    std::vector<ModelSpec> specs;
    for (int d = 0; d < budget; ++d) {
        std::mt19937_64 rng(derive_seed(seed, d));
        specs.push_back({sample_hyperparams(family, rng), derive_seed(seed, d, 1)});
    }
    const auto p = X.cols();
    int best = -1;
    double best_score = std::numeric_limits<double>::infinity();
    for (int d = 0; d < budget; ++d) {
        CvRow row;
        row.draw = d;
        row.hyperparams = to_json(specs[static_cast<std::size_t>(d)].params);
        try {
            for (const auto& [begin, end] : folds) {
                const auto b = static_cast<Eigen::Index>(begin);
                const auto e = static_cast<Eigen::Index>(end);
                const Eigen::Index n_train = X.rows() - (e - b);
                Matrix Xt(n_train, p);
                Vector yt(n_train);
                Xt.topRows(b) = X.topRows(b);
                Xt.bottomRows(X.rows() - e) = X.bottomRows(X.rows() - e);
                yt.head(b) = y.head(b);
                yt.tail(X.rows() - e) = y.tail(X.rows() - e);
                const auto model = fit_model(specs[static_cast<std::size_t>(d)], Xt, yt, schema);
                const Vector pred = predict(model, X.middleRows(b, e - b));
                row.fold_mae.push_back((pred - y.segment(b, e - b)).cwiseAbs().mean());
            }
            double s = 0.0;
            for (double m : row.fold_mae) {
                s += m;
            }
            row.mean_mae = s / static_cast<double>(row.fold_mae.size());
            if (!std::isfinite(row.mean_mae)) {
                throw DivergenceError("non-finite validation error", 0);
            }
            if (row.mean_mae < best_score) {
                best_score = row.mean_mae;
                best = d;
            }
        } catch (const Error& e) {
            row.failed = true;
            row.error = e.what();
        }
        result.table.push_back(std::move(row));
    }
    if (best < 0) {
        std::string message = "random search: all " + std::to_string(budget) + " draws failed";
        for (const auto& row : result.table) {
            message += "\n  draw " + std::to_string(row.draw) + ": " + row.error;
        }
        throw Error(message);
    }
    result.best = specs[static_cast<std::size_t>(best)];
    result.model = fit_model(result.best, X, y, schema);
    return result;
}

}  // namespace causalift
