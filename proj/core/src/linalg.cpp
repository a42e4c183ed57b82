#include "causalift/linalg.hpp"

#include "causalift/error.hpp"

#include <cmath>

namespace causalift {

double mean(const Vector& v) {
    if (v.size() == 0) {
        return 0.0;
    }
    return v.mean();
}

double stddev(const Vector& v) {
    if (v.size() == 0) {
        return 0.0;
    }
    const double m = v.mean();
    return std::sqrt((v.array() - m).square().mean());
}

Standardizer Standardizer::fit(const Matrix& X) {
    Standardizer s;
    s.center = X.colwise().mean().transpose();
    s.scale.resize(X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const double sd = std::sqrt((X.col(j).array() - s.center(j)).square().mean());
        // Constant columns keep unit scale so apply() maps them to zero.
        s.scale(j) = sd > 1e-12 * std::max(1.0, std::abs(s.center(j))) ? sd : 0.0;
    }
    return s;
}

Matrix Standardizer::apply(const Matrix& X) const {
    if (X.cols() != center.size()) {
        throw DataError("standardizer expects " + std::to_string(center.size()) + " columns, got " +
                        std::to_string(X.cols()));
    }
    Matrix out(X.rows(), X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const double s = scale(j) > 0.0 ? scale(j) : 1.0;
        out.col(j) = (X.col(j).array() - center(j)) / s;
    }
    return out;
}

Residualizer::Residualizer(const Matrix& Z, double rank_tolerance) {
    design_.resize(Z.rows(), Z.cols() + 1);
    design_.col(0).setOnes();
    design_.rightCols(Z.cols()) = Z;
    qr_.setThreshold(rank_tolerance);
    qr_.compute(design_);
    rank_ = qr_.rank();
    if (rank_ < design_.cols()) {
        throw CollinearityError("conditioning set is rank deficient (rank " + std::to_string(rank_) + " of " +
                                std::to_string(design_.cols()) + " including intercept)");
    }
}

Vector Residualizer::residuals(const Vector& v) const {
    const Vector beta = qr_.solve(v);
    return v - design_ * beta;
}

LeastSquaresFit least_squares(const Matrix& X, const Vector& y) {
    if (X.rows() != y.size()) {
        throw DataError("least_squares: row count mismatch");
    }
    if (!X.allFinite() || !y.allFinite()) {
        throw DataError("least_squares: non-finite input");
    }
    LeastSquaresFit fit;
    const double y_mean = mean(y);
    if (X.cols() == 0) {
        fit.intercept = y_mean;
        fit.coefficients = Vector(0);
        return fit;
    }
    const Eigen::RowVectorXd x_mean = X.colwise().mean();
    const Matrix Xc = X.rowwise() - x_mean;
    const Vector yc = y.array() - y_mean;
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod;
    cod.setThreshold(1e-12);
    cod.compute(Xc);
    fit.rank = cod.rank();
    fit.rank_deficient = fit.rank < X.cols();
    fit.coefficients = cod.solve(yc);
    fit.intercept = y_mean - x_mean.dot(fit.coefficients);
    return fit;
}

}  // namespace causalift
