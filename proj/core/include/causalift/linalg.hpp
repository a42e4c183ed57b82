#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>

namespace causalift {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Column centering and scaling. Zero-variance columns get scale 0 and
/// `apply` maps them to zero.
struct Standardizer {
    Vector center;
    Vector scale;

    static Standardizer fit(const Matrix& X);
    Matrix apply(const Matrix& X) const;
    bool is_constant(Eigen::Index column) const { return scale(column) == 0.0 || !(scale(column) > 0.0); }
};

/// Least-squares residualizer for a fixed regressor block [1, Z].
///
/// Throws CollinearityError when [1, Z] is rank deficient.
class Residualizer {
public:
    explicit Residualizer(const Matrix& Z, double rank_tolerance = 1e-10);

    Vector residuals(const Vector& v) const;
    Eigen::Index rank() const { return rank_; }

private:
    Matrix design_;
    Eigen::ColPivHouseholderQR<Matrix> qr_;
    Eigen::Index rank_ = 0;
};

/// Ordinary least squares with intercept via a complete orthogonal decomposition.
/// Rank-deficient systems get the minimum-norm slope vector.
struct LeastSquaresFit {
    double intercept = 0.0;
    Vector coefficients;
    Eigen::Index rank = 0;
    bool rank_deficient = false;
};

LeastSquaresFit least_squares(const Matrix& X, const Vector& y);

double mean(const Vector& v);
/// Population standard deviation (divides by n).
double stddev(const Vector& v);

}  // namespace causalift
