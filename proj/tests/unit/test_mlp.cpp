#include "causalift/error.hpp"
#include "causalift/models.hpp"

#include "test_support.hpp"

#include <doctest.h>

using namespace causalift;

namespace {

Matrix gaussian_matrix(std::mt19937_64& rng, Eigen::Index n, Eigen::Index p) {
    std::normal_distribution<double> n01;
    Matrix m(n, p);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        m.data()[i] = n01(rng);
    }
    return m;
}

double& param(MlpModel& m, std::size_t layer, bool bias, Eigen::Index i) {
    return bias ? m.layers[layer].bias(i) : m.layers[layer].weights.data()[i];
}

}  // namespace

TEST_CASE("analytic gradients match central finite differences") {
    std::mt19937_64 rng(1);
    for (const auto& hidden : {std::vector<int>{5}, std::vector<int>{6, 4}}) {
        const Matrix X = gaussian_matrix(rng, 40, 3);
        const Vector y = gaussian_matrix(rng, 40, 1).col(0);
        auto net = detail::init_mlp(3, hidden, 7);
        const double l2 = 1e-2;
        MlpModel grad;
        detail::mlp_loss_and_gradient(net, X, y, l2, grad);
        double worst = 0.0;
        for (std::size_t l = 0; l < net.layers.size(); ++l) {
            for (bool bias : {false, true}) {
                const Eigen::Index count = bias ? net.layers[l].bias.size() : net.layers[l].weights.size();
                for (Eigen::Index i = 0; i < count; ++i) {
                    const double h = 1e-5;
                    const double keep = param(net, l, bias, i);
                    MlpModel scratch;
                    param(net, l, bias, i) = keep + h;
                    const double up = detail::mlp_loss_and_gradient(net, X, y, l2, scratch);
                    param(net, l, bias, i) = keep - h;
                    const double down = detail::mlp_loss_and_gradient(net, X, y, l2, scratch);
                    param(net, l, bias, i) = keep;
                    const double numeric = (up - down) / (2.0 * h);
                    const double analytic = param(grad, l, bias, i);
                    const double rel = std::abs(numeric - analytic) / std::max(1e-6, std::abs(numeric) + std::abs(analytic));
                    worst = std::max(worst, rel);
                }
            }
        }
        CHECK(worst <= 1e-4);
    }
}

TEST_CASE("mlp learns a smooth nonlinear map") {
    std::mt19937_64 rng(2);
    const Matrix X = gaussian_matrix(rng, 3000, 2);
    const Vector y = (X.col(0).array().square() + 0.5 * X.col(1).array()).matrix() * 3.0;
    MlpParams mp;
    mp.hidden = {32};
    mp.learning_rate = 1e-2;
    mp.epochs = 60;
    const auto m = fit_mlp(X, y, mp, 5);
    const double err = (predict(m, X) - y).cwiseAbs().mean();
    const double ols = (predict(fit_ols(X, y), X) - y).cwiseAbs().mean();
    CHECK(err < 0.5 * ols);
    CHECK(m.training_loss.size() == 60);
    CHECK(m.training_loss.back() < m.training_loss.front());
}

TEST_CASE("zero epochs predicts near the target mean; divergence is reported") {
    std::mt19937_64 rng(3);
    const Matrix X = gaussian_matrix(rng, 200, 2);
    const Vector y = (X.col(0).array() + 10.0).matrix();
    MlpParams mp;
    mp.epochs = 0;
    const auto m = fit_mlp(X, y, mp, 1);
    CHECK(std::abs(predict(m, X).mean() - 10.0) < 1.0);

    MlpParams wild;
    wild.learning_rate = 1e200;
    wild.epochs = 5;
    wild.hidden = {16, 16};
    CHECK_THROWS_AS(fit_mlp(X, y, wild, 1), DivergenceError);

    MlpParams bad;
    bad.hidden = {};
    CHECK_THROWS_AS(fit_mlp(X, y, bad, 1), DataError);
}

TEST_CASE("mlp training is deterministic in the seed") {
    std::mt19937_64 rng(4);
    const Matrix X = gaussian_matrix(rng, 300, 3);
    const Vector y = X.rowwise().sum();
    MlpParams mp;
    mp.epochs = 5;
    CHECK(predict(fit_mlp(X, y, mp, 9), X) == predict(fit_mlp(X, y, mp, 9), X));
    CHECK(predict(fit_mlp(X, y, mp, 9), X) != predict(fit_mlp(X, y, mp, 10), X));
}
