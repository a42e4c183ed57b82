#pragma once

#include "causalift/linalg.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace causalift {

enum class ModelFamily { ols, lasso, forest, gbt, mlp };

std::string to_string(ModelFamily family);
ModelFamily family_from_string(const std::string& text);

struct OlsParams {};

struct LassoParams {
    double alpha = 0.1;
    int max_sweeps = 10000;
    double tolerance = 1e-7;
};

struct ForestParams {
    int trees = 100;
    int max_depth = 8;
    double feature_fraction = 1.0 / 3.0;
    int min_samples_leaf = 5;
    int max_bins = 64;
};

struct GbtParams {
    int trees = 100;
    int max_depth = 3;
    double learning_rate = 0.1;
    int min_samples_leaf = 20;
    double subsample = 1.0;
    int max_bins = 64;
};

struct MlpParams {
    std::vector<int> hidden = {32};
    double learning_rate = 1e-3;
    int epochs = 30;
    int batch_size = 64;
    double l2 = 1e-4;
};

using Hyperparams = std::variant<OlsParams, LassoParams, ForestParams, GbtParams, MlpParams>;

struct ModelSpec {
    Hyperparams params = OlsParams{};
    std::uint64_t seed = 0;

    ModelFamily family() const;
};

nlohmann::json to_json(const Hyperparams& params);
Hyperparams hyperparams_from_json(ModelFamily family, const nlohmann::json& doc);

struct LinearModel {
    double intercept = 0.0;
    Vector coefficients;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;  // go left when x <= threshold
    int left = -1;
    int right = -1;
    double value = 0.0;
};

struct RegressionTree {
    std::vector<TreeNode> nodes;

    double predict_row(const double* row, Eigen::Index stride) const;
};

/// prediction = base + scale * sum(tree outputs), divided by tree count when averaging.
struct TreeEnsemble {
    double base = 0.0;
    double scale = 1.0;
    bool average = false;
    std::vector<RegressionTree> trees;
};

struct DenseLayer {
    Matrix weights;  // outputs x inputs
    Vector bias;
};

/// Softplus hidden layers, linear output; trained on a standardized target.
struct MlpModel {
    std::vector<DenseLayer> layers;
    double y_center = 0.0;
    double y_scale = 1.0;
};

using FittedParams = std::variant<LinearModel, TreeEnsemble, MlpModel>;

struct TrainedModel {
    ModelSpec spec;
    std::optional<Standardizer> input_scaling;
    FittedParams params;
    std::vector<std::string> input_schema;
    std::vector<double> training_loss;
    std::vector<double> importances;
    std::vector<std::string> notes;
    /// MLP only: loss rose across some 10-epoch window.
    bool loss_flagged = false;
};

/// Rejects inputs whose column count differs from the training schema.
Vector predict(const TrainedModel& model, const Matrix& X);

TrainedModel fit_ols(const Matrix& X, const Vector& y, std::vector<std::string> schema = {});

/// Cyclic coordinate descent on (1/2n)||y - X b||^2 + alpha ||b||_1.
/// Expects standardized X; an intercept absorbs any remaining means.
TrainedModel fit_lasso(const Matrix& X, const Vector& y, const LassoParams& params,
                       std::vector<std::string> schema = {});

TrainedModel fit_forest(const Matrix& X, const Vector& y, const ForestParams& params, std::uint64_t seed,
                        std::vector<std::string> schema = {});
TrainedModel fit_gbt(const Matrix& X, const Vector& y, const GbtParams& params, std::uint64_t seed,
                     std::vector<std::string> schema = {});
/// Expects standardized X.
TrainedModel fit_mlp(const Matrix& X, const Vector& y, const MlpParams& params, std::uint64_t seed,
                     std::vector<std::string> schema = {});

/// Family dispatch. Lasso and MLP inputs are standardized inside the model.
TrainedModel fit_model(const ModelSpec& spec, const Matrix& X, const Vector& y,
                       std::vector<std::string> schema = {});

/// Versioned JSON encoding; doubles are written with round-trip precision.
nlohmann::json to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& doc);

struct CvRow {
    int draw = 0;
    nlohmann::json hyperparams;
    std::vector<double> fold_mae;
    double mean_mae = 0.0;
    bool failed = false;
    std::string error;
};

struct SearchResult {
    ModelSpec best;
    std::vector<CvRow> table;
    TrainedModel model;
};

/// Contiguous [begin, end) validation blocks; the first n % k blocks get one extra row.
std::vector<std::pair<std::size_t, std::size_t>> contiguous_folds(std::size_t n, int k);

Hyperparams sample_hyperparams(ModelFamily family, std::mt19937_64& rng);

/// Random search over documented ranges with contiguous K-fold CV scored by
/// mean validation MAE; ties go to the lower draw index. The winner is refit
/// on all rows. OLS has nothing to tune and is fit directly.
SearchResult random_search_cv(ModelFamily family, const Matrix& X, const Vector& y,
                              const std::vector<std::string>& schema, int budget = 20, int k_folds = 3,
                              std::uint64_t seed = 0);

namespace detail {

/// Loss (1/2n)||f(X) - y||^2 + (l2/2) sum ||W||^2 of the network on already
/// scaled inputs/targets; fills `gradient` with the same layer shapes.
double mlp_loss_and_gradient(const MlpModel& net, const Matrix& X, const Vector& y, double l2,
                             MlpModel& gradient);

MlpModel init_mlp(Eigen::Index inputs, const std::vector<int>& hidden, std::uint64_t seed);

}  // namespace detail

}  // namespace causalift
