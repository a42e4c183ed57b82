#include "causalift/error.hpp"
#include "causalift/models.hpp"
#include "model_detail.hpp"

#include <algorithm>
#include <cmath>

namespace causalift {

namespace detail {

std::vector<std::string> default_schema(Eigen::Index columns) {
    std::vector<std::string> out;
    for (Eigen::Index c = 0; c < columns; ++c) {
        out.push_back("x" + std::to_string(c));
    }
    return out;
}

void check_training_data(const Matrix& X, const Vector& y, std::vector<std::string>& schema, const char* who) {
    if (X.rows() != y.size()) {
        throw DataError(std::string(who) + ": X has " + std::to_string(X.rows()) + " rows but y has " +
                        std::to_string(y.size()));
    }
    if (X.rows() == 0) {
        throw DataError(std::string(who) + ": no training rows");
    }
    if (!X.allFinite() || !y.allFinite()) {
        throw DataError(std::string(who) + ": non-finite training data");
    }
    if (schema.empty()) {
        schema = default_schema(X.cols());
    } else if (static_cast<Eigen::Index>(schema.size()) != X.cols()) {
        throw DataError(std::string(who) + ": schema has " + std::to_string(schema.size()) + " names for " +
                        std::to_string(X.cols()) + " columns");
    }
}

}  // namespace detail

TrainedModel fit_ols(const Matrix& X, const Vector& y, std::vector<std::string> schema) {
    detail::check_training_data(X, y, schema, "ols");
    TrainedModel model;
    model.spec.params = OlsParams{};
    model.input_schema = std::move(schema);
    const auto fit = least_squares(X, y);
    if (fit.rank_deficient) {
        model.notes.push_back("rank-deficient design: minimum-norm solution");
    }
    LinearModel lm{fit.intercept, fit.coefficients};
    const Vector resid = y - ((X * lm.coefficients).array() + lm.intercept).matrix();
    model.training_loss.push_back(resid.squaredNorm() / static_cast<double>(y.size()));
    model.params = std::move(lm);
    return model;
}

TrainedModel fit_lasso(const Matrix& X, const Vector& y, const LassoParams& params, std::vector<std::string> schema) {
    detail::check_training_data(X, y, schema, "lasso");
    if (!(params.alpha >= 0.0) || params.max_sweeps < 1 || !(params.tolerance > 0.0)) {
        throw DataError("lasso: alpha >= 0, max_sweeps >= 1 and tolerance > 0 required");
    }
    const auto n = static_cast<double>(X.rows());
    const auto p = X.cols();
    const Eigen::RowVectorXd x_mean = X.colwise().mean();
    const double y_mean = y.mean();
    const Matrix Xc = X.rowwise() - x_mean;
    const Vector yc = y.array() - y_mean;
    const Matrix G = (Xc.transpose() * Xc) / n;
    const Vector c = (Xc.transpose() * yc) / n;
    const double yy = yc.squaredNorm() / n;

    Vector beta = Vector::Zero(p);
    Vector q = Vector::Zero(p);  // G * beta
    const double alpha = params.alpha;
    bool converged = p == 0;
    int sweep = 0;
    for (; sweep < params.max_sweeps && !converged; ++sweep) {
        double max_delta = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            const double gjj = G(j, j);
            if (gjj <= 0.0) {
                continue;
            }
            const double rho = c(j) - (q(j) - gjj * beta(j));
            const double updated = std::copysign(std::max(std::abs(rho) - alpha, 0.0), rho) / gjj;
            const double delta = updated - beta(j);
            if (delta != 0.0) {
                q += delta * G.col(j);
                beta(j) = updated;
                max_delta = std::max(max_delta, std::abs(delta));
            }
        }
        converged = max_delta < params.tolerance;
    }

    // Duality gap of the final iterate, from the Gram quantities.
    const double rr = std::max(yy - 2.0 * beta.dot(c) + beta.dot(q), 0.0);  // ||r||^2 / n
    const double primal = 0.5 * rr + alpha * beta.lpNorm<1>();
    const double corr = p > 0 ? (c - q).cwiseAbs().maxCoeff() : 0.0;
    const double s = corr > alpha && corr > 0.0 ? alpha / corr : 1.0;
    const double dual = s * (yy - beta.dot(c)) - 0.5 * s * s * rr;
    const double gap = primal - dual;
    if (!converged) {
        throw ConvergenceError("lasso: no convergence after " + std::to_string(params.max_sweeps) +
                                   " sweeps (duality gap " + std::to_string(gap) + ")",
                               gap);
    }

    TrainedModel model;
    model.spec.params = params;
    model.input_schema = std::move(schema);
    model.training_loss.push_back(primal);
    model.notes.push_back("sweeps: " + std::to_string(sweep));
    model.params = LinearModel{y_mean - x_mean.dot(beta), beta};
    return model;
}

}  // namespace causalift
