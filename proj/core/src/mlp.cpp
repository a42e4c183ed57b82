#include "causalift/error.hpp"
#include "causalift/models.hpp"
#include "causalift/parallel.hpp"
#include "model_detail.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace causalift {

namespace {

/// Hidden activations softplus(z) and their derivatives sigmoid(z), one exp and one log per element.
struct Activations {
    std::vector<Matrix> a;      // a[l] = softplus(z_l) for hidden layers
    std::vector<Matrix> slope;  // sigmoid(z_l)
    Vector output;
};

Activations forward(const MlpModel& net, const Matrix& X) {
    Activations out;
    const Matrix* input = &X;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const auto& layer = net.layers[l];
        Matrix z = (*input * layer.weights.transpose()).rowwise() + layer.bias.transpose();
        if (l + 1 == net.layers.size()) {
            out.output = z.col(0);
            break;
        }
        // softplus(v) = max(v, 0) + log(1 + e), sigmoid(v) = (v >= 0 ? 1 : e) / (1 + e), e = exp(-|v|)
        const Eigen::ArrayXXd e = (-z.array().abs()).exp();
        const Eigen::ArrayXXd one_plus = 1.0 + e;
        Matrix a = (z.array().max(0.0) + one_plus.log()).matrix();
        Matrix d = ((z.array() >= 0.0).select(Eigen::ArrayXXd::Ones(z.rows(), z.cols()), e) / one_plus).matrix();
        out.a.push_back(std::move(a));
        out.slope.push_back(std::move(d));
        input = &out.a.back();
    }
    return out;
}

double weight_penalty(const MlpModel& net) {
    double s = 0.0;
    for (const auto& layer : net.layers) {
        s += layer.weights.squaredNorm();
    }
    return s;
}

MlpModel zeros_like(const MlpModel& net) {
    MlpModel out = net;
    for (auto& layer : out.layers) {
        layer.weights.setZero();
        layer.bias.setZero();
    }
    return out;
}

}  // namespace

namespace detail {

MlpModel init_mlp(Eigen::Index inputs, const std::vector<int>& hidden, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    MlpModel net;
    Eigen::Index fan_in = inputs;
    for (int width : hidden) {
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + width));
        std::uniform_real_distribution<double> u(-limit, limit);
        DenseLayer layer;
        layer.weights = Matrix(width, fan_in);
        for (Eigen::Index i = 0; i < layer.weights.size(); ++i) {
            layer.weights.data()[i] = u(rng);
        }
        layer.bias = Vector::Zero(width);
        net.layers.push_back(std::move(layer));
        fan_in = width;
    }
    // Zero output layer: an untrained network predicts the (standardized) mean.
    net.layers.push_back(DenseLayer{Matrix::Zero(1, fan_in), Vector::Zero(1)});
    return net;
}

double mlp_loss_and_gradient(const MlpModel& net, const Matrix& X, const Vector& y, double l2, MlpModel& gradient) {
    const auto n = static_cast<double>(X.rows());
    const auto act = forward(net, X);
    const Vector err = act.output - y;
    const double loss = 0.5 * err.squaredNorm() / n + 0.5 * l2 * weight_penalty(net);

    gradient = zeros_like(net);
    Matrix delta = err / n;  // d loss / d z_L, n x 1
    for (std::size_t l = net.layers.size(); l-- > 0;) {
        const Matrix& a_prev = l == 0 ? X : act.a[l - 1];
        gradient.layers[l].weights.noalias() = delta.transpose() * a_prev;
        gradient.layers[l].weights += l2 * net.layers[l].weights;
        gradient.layers[l].bias = delta.colwise().sum().transpose();
        if (l > 0) {
            delta = (delta * net.layers[l].weights).cwiseProduct(act.slope[l - 1]);
        }
    }
    return loss;
}

Vector predict_mlp(const MlpModel& net, const Matrix& X) {
    return (forward(net, X).output.array() * net.y_scale + net.y_center).matrix();
}

}  // namespace detail

TrainedModel fit_mlp(const Matrix& X, const Vector& y, const MlpParams& params, std::uint64_t seed,
                     std::vector<std::string> schema) {
    detail::check_training_data(X, y, schema, "mlp");
    if (params.hidden.empty() || params.hidden.size() > 2 ||
        std::any_of(params.hidden.begin(), params.hidden.end(), [](int w) { return w < 1 || w > 128; })) {
        throw DataError("mlp: 1 or 2 hidden layers of width 1..128 required");
    }
    if (!(params.learning_rate > 0.0) || params.epochs < 0 || params.batch_size < 1 || !(params.l2 >= 0.0)) {
        throw DataError("mlp: learning rate > 0, epochs >= 0, batch size >= 1 and l2 >= 0 required");
    }
    MlpModel net = detail::init_mlp(X.cols(), params.hidden, derive_seed(seed, 0));
    net.y_center = y.mean();
    const double sd = stddev(y);
    net.y_scale = sd > 0.0 ? sd : 1.0;
    const Vector ys = (y.array() - net.y_center) / net.y_scale;

    TrainedModel model;
    model.spec = {params, seed};
    model.input_schema = std::move(schema);

    // Adam state.
    const double beta1 = 0.9;
    const double beta2 = 0.999;
    const double eps = 1e-8;
    MlpModel m = zeros_like(net);
    MlpModel v = zeros_like(net);
    MlpModel grad = zeros_like(net);
    long step = 0;

    const auto n = X.rows();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::mt19937_64 rng(derive_seed(seed, 1));
    const Eigen::Index batch = std::min<Eigen::Index>(params.batch_size, n);
    Matrix Xb(batch, X.cols());
    Vector yb(batch);

    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        for (Eigen::Index start = 0; start < n; start += batch) {
            const Eigen::Index size = std::min(batch, n - start);
            Xb.resize(size, X.cols());
            yb.resize(size);
            for (Eigen::Index i = 0; i < size; ++i) {
                const auto r = order[static_cast<std::size_t>(start + i)];
                Xb.row(i) = X.row(r);
                yb(i) = ys(r);
            }
            // Epoch loss is the size-weighted mean of the minibatch losses seen during the epoch.
            epoch_loss += detail::mlp_loss_and_gradient(net, Xb, yb, params.l2, grad) * static_cast<double>(size);
            ++step;
            const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
            for (std::size_t l = 0; l < net.layers.size(); ++l) {
                auto update = [&](auto& param, auto& mp, auto& vp, const auto& g) {
                    mp = beta1 * mp + (1.0 - beta1) * g;
                    vp = beta2 * vp + (1.0 - beta2) * g.cwiseAbs2();
                    param.array() -= params.learning_rate * (mp.array() / c1) / ((vp.array() / c2).sqrt() + eps);
                };
                update(net.layers[l].weights, m.layers[l].weights, v.layers[l].weights, grad.layers[l].weights);
                update(net.layers[l].bias, m.layers[l].bias, v.layers[l].bias, grad.layers[l].bias);
            }
        }
        const double loss = epoch_loss / static_cast<double>(n);
        if (!std::isfinite(loss)) {
            throw DivergenceError("mlp: training loss became non-finite at epoch " + std::to_string(epoch + 1),
                                  epoch + 1);
        }
        model.training_loss.push_back(loss);
        if (epoch >= 10 && loss > model.training_loss[static_cast<std::size_t>(epoch - 10)]) {
            model.loss_flagged = true;
        }
    }
    if (model.loss_flagged) {
        model.notes.push_back("training loss rose over a 10-epoch window");
    }
    model.params = std::move(net);
    return model;
}

}  // namespace causalift
