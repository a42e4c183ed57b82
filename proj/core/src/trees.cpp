#include "causalift/error.hpp"
#include "causalift/models.hpp"
#include "causalift/parallel.hpp"
#include "model_detail.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>

namespace causalift {

double RegressionTree::predict_row(const double* row, Eigen::Index stride) const {
    int node = 0;
    while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
        const auto& n = nodes[static_cast<std::size_t>(node)];
        node = row[n.feature * stride] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(node)].value;
}

namespace {

/// Per-feature split thresholds and the bin index of every training value.
/// With at most max_bins distinct values every gap between them is a candidate
/// (exact search); otherwise thresholds sit at quantiles.
struct BinnedData {
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    std::vector<std::vector<double>> thresholds;  // ascending, per feature
    std::vector<std::uint16_t> bins;              // column-major rows x cols
    std::vector<std::uint16_t> row_bins;          // the same, row-major

    std::uint16_t bin(Eigen::Index r, Eigen::Index c) const { return bins[static_cast<std::size_t>(c * rows + r)]; }
    int bin_count(Eigen::Index c) const { return static_cast<int>(thresholds[static_cast<std::size_t>(c)].size()) + 1; }
};

BinnedData bin_features(const Matrix& X, int max_bins) {
    if (max_bins < 2 || max_bins > 65535) {
        throw DataError("trees: max_bins must be in [2, 65535]");
    }
    BinnedData b;
    b.rows = X.rows();
    b.cols = X.cols();
    b.thresholds.resize(static_cast<std::size_t>(b.cols));
    b.bins.resize(static_cast<std::size_t>(b.rows * b.cols));
    std::vector<double> sorted(static_cast<std::size_t>(b.rows));
    for (Eigen::Index c = 0; c < b.cols; ++c) {
        std::copy(X.col(c).data(), X.col(c).data() + b.rows, sorted.begin());
        std::sort(sorted.begin(), sorted.end());
        std::vector<double> distinct = sorted;
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        auto& thr = b.thresholds[static_cast<std::size_t>(c)];
        if (static_cast<int>(distinct.size()) <= max_bins) {
            for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
                thr.push_back(0.5 * (distinct[i] + distinct[i + 1]));
            }
        } else {
            for (int k = 1; k < max_bins; ++k) {
                const auto idx = static_cast<std::size_t>(static_cast<double>(k) * static_cast<double>(b.rows) / max_bins);
                const double a = sorted[std::min(idx, sorted.size() - 1)];
                const auto next = std::upper_bound(distinct.begin(), distinct.end(), a);
                if (next == distinct.end()) {
                    continue;
                }
                const double t = 0.5 * (a + *next);
                if (thr.empty() || t > thr.back()) {
                    thr.push_back(t);
                }
            }
        }
        for (Eigen::Index r = 0; r < b.rows; ++r) {
            const auto it = std::lower_bound(thr.begin(), thr.end(), X(r, c));
            b.bins[static_cast<std::size_t>(c * b.rows + r)] = static_cast<std::uint16_t>(it - thr.begin());
        }
    }
    b.row_bins.resize(b.bins.size());
    for (Eigen::Index c = 0; c < b.cols; ++c) {
        for (Eigen::Index r = 0; r < b.rows; ++r) {
            b.row_bins[static_cast<std::size_t>(r * b.cols + c)] = b.bins[static_cast<std::size_t>(c * b.rows + r)];
        }
    }
    return b;
}

struct TreeSettings {
    int max_depth = 3;
    int min_samples_leaf = 1;
    double feature_fraction = 1.0;
};

/// Per-bin target sums and counts for every feature, laid out feature after feature.
struct Histogram {
    std::vector<double> sum;
    std::vector<double> count;

    bool empty() const { return sum.empty(); }
};

class TreeBuilder {
public:
    TreeBuilder(const BinnedData& data, const Vector& target, const TreeSettings& settings, std::mt19937_64& rng,
                std::vector<double>& importances)
        : data_(data), target_(target), settings_(settings), rng_(rng), importances_(importances) {
        features_.resize(static_cast<std::size_t>(data.cols));
        std::iota(features_.begin(), features_.end(), Eigen::Index{0});
        offsets_.assign(static_cast<std::size_t>(data.cols) + 1, 0);
        for (Eigen::Index c = 0; c < data.cols; ++c) {
            offsets_[static_cast<std::size_t>(c) + 1] = offsets_[static_cast<std::size_t>(c)] +
                                                        static_cast<std::size_t>(data.bin_count(c));
        }
    }

    RegressionTree build(std::vector<Eigen::Index> rows) {
        tree_.nodes.clear();
        rows_ = std::move(rows);
        grow(0, rows_.size(), 0, {});
        return std::move(tree_);
    }

private:
    struct Split {
        Eigen::Index feature = -1;
        int bin = -1;
        double gain = 0.0;
    };

    bool can_split(std::size_t size, int depth) const {
        return depth < settings_.max_depth && size >= 2 * static_cast<std::size_t>(settings_.min_samples_leaf);
    }

    /// With every feature searched, a child's histogram is the parent's minus its sibling's.
    bool subtracting() const { return settings_.feature_fraction >= 1.0; }

    int grow(std::size_t begin, std::size_t end, int depth, Histogram hist) {
        double sum = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            sum += target_(rows_[i]);
        }
        const auto count = static_cast<double>(end - begin);
        const int index = static_cast<int>(tree_.nodes.size());
        tree_.nodes.push_back(TreeNode{-1, 0.0, -1, -1, sum / count});
        if (!can_split(end - begin, depth)) {
            return index;
        }
        const std::size_t tried = sample_features();
        if (hist.empty()) {
            hist = make_histogram(begin, end, tried);
        }
        const Split best = find_split(hist, tried, count, sum);
        if (best.feature < 0) {
            return index;
        }
        const auto mid_it = std::partition(rows_.begin() + static_cast<std::ptrdiff_t>(begin),
                                           rows_.begin() + static_cast<std::ptrdiff_t>(end),
                                           [&](Eigen::Index r) { return data_.bin(r, best.feature) <= best.bin; });
        const auto mid = static_cast<std::size_t>(mid_it - rows_.begin());
        importances_[static_cast<std::size_t>(best.feature)] += best.gain;
        const double threshold =
            data_.thresholds[static_cast<std::size_t>(best.feature)][static_cast<std::size_t>(best.bin)];

        Histogram left_hist;
        Histogram right_hist;
        if (subtracting() && (can_split(mid - begin, depth + 1) || can_split(end - mid, depth + 1))) {
            const bool left_smaller = mid - begin <= end - mid;
            Histogram small = left_smaller ? make_histogram(begin, mid, tried) : make_histogram(mid, end, tried);
            for (std::size_t k = 0; k < hist.sum.size(); ++k) {
                hist.sum[k] -= small.sum[k];
                hist.count[k] -= small.count[k];
            }
            left_hist = left_smaller ? std::move(small) : std::move(hist);
            right_hist = left_smaller ? std::move(hist) : std::move(small);
        }
        const int left = grow(begin, mid, depth + 1, std::move(left_hist));
        const int right = grow(mid, end, depth + 1, std::move(right_hist));
        auto& node = tree_.nodes[static_cast<std::size_t>(index)];
        node.feature = static_cast<int>(best.feature);
        node.threshold = threshold;
        node.left = left;
        node.right = right;
        return index;
    }

    /// Number of leading entries of features_ to search at this node.
    std::size_t sample_features() {
        const auto p = static_cast<std::size_t>(data_.cols);
        if (subtracting()) {
            return p;
        }
        const std::size_t tried = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::floor(settings_.feature_fraction * static_cast<double>(p))));
        // Partial Fisher-Yates: the first `tried` entries are a uniform sample.
        for (std::size_t i = 0; i < tried; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, p - 1);
            std::swap(features_[i], features_[pick(rng_)]);
        }
        return tried;
    }

    Histogram make_histogram(std::size_t begin, std::size_t end, std::size_t tried) {
        Histogram h;
        h.sum.assign(offsets_.back(), 0.0);
        h.count.assign(offsets_.back(), 0.0);
        values_.resize(end - begin);
        for (std::size_t i = begin; i < end; ++i) {
            values_[i - begin] = target_(rows_[i]);
        }
        if (tried == static_cast<std::size_t>(data_.cols)) {
            // Row-wise pass: consecutive updates hit different features, which keeps
            // repeated bins of neighbouring time steps from serializing on one counter.
            const auto p = static_cast<std::size_t>(data_.cols);
            for (std::size_t i = begin; i < end; ++i) {
                const std::uint16_t* row = data_.row_bins.data() + static_cast<std::size_t>(rows_[i]) * p;
                const double v = values_[i - begin];
                for (std::size_t c = 0; c < p; ++c) {
                    const std::size_t k = offsets_[c] + row[c];
                    h.sum[k] += v;
                    h.count[k] += 1.0;
                }
            }
            return h;
        }
        for (std::size_t f = 0; f < tried; ++f) {
            const Eigen::Index c = features_[f];
            const std::uint16_t* col = data_.bins.data() + static_cast<std::size_t>(c * data_.rows);
            double* sums = h.sum.data() + offsets_[static_cast<std::size_t>(c)];
            double* counts = h.count.data() + offsets_[static_cast<std::size_t>(c)];
            for (std::size_t i = begin; i < end; ++i) {
                const auto b = col[rows_[i]];
                sums[b] += values_[i - begin];
                counts[b] += 1.0;
            }
        }
        return h;
    }

    Split find_split(const Histogram& h, std::size_t tried, double n, double total) const {
        const double parent_score = total * total / n;
        Split best;
        const double min_leaf = settings_.min_samples_leaf;
        for (std::size_t f = 0; f < tried; ++f) {
            const Eigen::Index c = features_[f];
            const int nb = data_.bin_count(c);
            if (nb < 2) {
                continue;
            }
            const double* sums = h.sum.data() + offsets_[static_cast<std::size_t>(c)];
            const double* counts = h.count.data() + offsets_[static_cast<std::size_t>(c)];
            double left_sum = 0.0;
            double left_n = 0.0;
            for (int b = 0; b + 1 < nb; ++b) {
                left_sum += sums[b];
                left_n += counts[b];
                const double right_n = n - left_n;
                if (left_n < min_leaf) {
                    continue;
                }
                if (right_n < min_leaf) {
                    break;
                }
                if (counts[b] == 0.0) {
                    continue;  // same partition as the previous bin
                }
                const double right_sum = total - left_sum;
                const double gain = left_sum * left_sum / left_n + right_sum * right_sum / right_n - parent_score;
                if (gain > best.gain + 1e-12 * std::abs(parent_score) && gain > 0.0) {
                    best = {c, b, gain};
                }
            }
        }
        return best;
    }

    const BinnedData& data_;
    const Vector& target_;
    TreeSettings settings_;
    std::mt19937_64& rng_;
    std::vector<double>& importances_;
    std::vector<Eigen::Index> features_;
    std::vector<std::size_t> offsets_;
    std::vector<Eigen::Index> rows_;
    std::vector<double> values_;
    RegressionTree tree_;
};

double ensemble_output(const TreeEnsemble& e, const double* row, Eigen::Index stride) {
    double s = 0.0;
    for (const auto& t : e.trees) {
        s += t.predict_row(row, stride);
    }
    if (e.average && !e.trees.empty()) {
        s /= static_cast<double>(e.trees.size());
    }
    return e.base + e.scale * s;
}

void normalize(std::vector<double>& v) {
    const double total = std::accumulate(v.begin(), v.end(), 0.0);
    if (total > 0.0) {
        for (auto& x : v) {
            x /= total;
        }
    }
}

}  // namespace

namespace detail {

Vector predict_ensemble(const TreeEnsemble& e, const Matrix& X) {
    Vector out(X.rows());
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
        out(r) = ensemble_output(e, X.data() + r, X.rows());
    }
    return out;
}

}  // namespace detail

TrainedModel fit_forest(const Matrix& X, const Vector& y, const ForestParams& params, std::uint64_t seed,
                        std::vector<std::string> schema) {
    detail::check_training_data(X, y, schema, "forest");
    if (params.trees < 1 || params.max_depth < 1 || params.min_samples_leaf < 1 ||
        !(params.feature_fraction > 0.0 && params.feature_fraction <= 1.0)) {
        throw DataError("forest: trees, depth and min leaf must be >= 1 and feature fraction in (0, 1]");
    }
    const auto data = bin_features(X, params.max_bins);
    TreeEnsemble ensemble;
    ensemble.average = true;
    std::vector<double> importances(static_cast<std::size_t>(X.cols()), 0.0);
    const TreeSettings settings{params.max_depth, params.min_samples_leaf, params.feature_fraction};
    const auto n = static_cast<std::size_t>(X.rows());
    for (int t = 0; t < params.trees; ++t) {
        std::mt19937_64 rng(derive_seed(seed, t));
        std::uniform_int_distribution<std::size_t> draw(0, n - 1);
        std::vector<Eigen::Index> rows(n);
        for (auto& r : rows) {
            r = static_cast<Eigen::Index>(draw(rng));
        }
        TreeBuilder builder(data, y, settings, rng, importances);
        ensemble.trees.push_back(builder.build(std::move(rows)));
    }
    normalize(importances);

    TrainedModel model;
    model.spec = {params, seed};
    model.input_schema = std::move(schema);
    model.importances = std::move(importances);
    const Vector resid = y - detail::predict_ensemble(ensemble, X);
    model.training_loss.push_back(resid.squaredNorm() / static_cast<double>(y.size()));
    model.params = std::move(ensemble);
    return model;
}

TrainedModel fit_gbt(const Matrix& X, const Vector& y, const GbtParams& params, std::uint64_t seed,
                     std::vector<std::string> schema) {
    detail::check_training_data(X, y, schema, "gbt");
    if (params.trees < 0 || params.max_depth < 1 || params.min_samples_leaf < 1 ||
        !(params.learning_rate > 0.0 && params.learning_rate <= 1.0) ||
        !(params.subsample > 0.0 && params.subsample <= 1.0)) {
        throw DataError("gbt: depth/min leaf >= 1, learning rate in (0, 1] and subsample in (0, 1] required");
    }
    const auto data = bin_features(X, params.max_bins);
    const auto n = static_cast<std::size_t>(X.rows());
    TreeEnsemble ensemble;
    ensemble.base = y.mean();
    ensemble.scale = params.learning_rate;
    std::vector<double> importances(static_cast<std::size_t>(X.cols()), 0.0);
    const TreeSettings settings{params.max_depth, params.min_samples_leaf, 1.0};

    TrainedModel model;
    Vector fitted = Vector::Constant(X.rows(), ensemble.base);
    Vector residual(X.rows());
    std::vector<Eigen::Index> all(n);
    std::iota(all.begin(), all.end(), Eigen::Index{0});
    const auto sample = std::max<std::size_t>(1, static_cast<std::size_t>(std::round(params.subsample * static_cast<double>(n))));
    for (int t = 0; t < params.trees; ++t) {
        std::mt19937_64 rng(derive_seed(seed, t));
        residual = y - fitted;
        std::vector<Eigen::Index> rows = all;
        if (sample < n) {
            for (std::size_t i = 0; i < sample; ++i) {
                std::uniform_int_distribution<std::size_t> pick(i, n - 1);
                std::swap(rows[i], rows[pick(rng)]);
            }
            rows.resize(sample);
            std::sort(rows.begin(), rows.end());
        }
        TreeBuilder builder(data, residual, settings, rng, importances);
        auto tree = builder.build(std::move(rows));
        for (Eigen::Index r = 0; r < X.rows(); ++r) {
            fitted(r) += params.learning_rate * tree.predict_row(X.data() + r, X.rows());
        }
        ensemble.trees.push_back(std::move(tree));
        model.training_loss.push_back((y - fitted).squaredNorm() / static_cast<double>(n));
    }
    normalize(importances);

    model.spec = {params, seed};
    model.input_schema = std::move(schema);
    model.importances = std::move(importances);
    model.params = std::move(ensemble);
    return model;
}

}  // namespace causalift
