#include "stackcast/forest.hpp"

#include "stackcast/errors.hpp"
#include "stackcast/parallel.hpp"
#include "stackcast/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stackcast {

namespace {

// stream id folded into per-tree seeds so forest draws never collide with
// other consumers of the same user seed
constexpr std::uint64_t kForestStream = 0xf0e57;

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
    // strict improvement only, so the earliest (lowest-feature, lowest-
    // threshold) candidate wins every exact tie
    void offer(int f, double thr, double g) {
        if (g > gain) {
            found = true;
            feature = f;
            threshold = thr;
            gain = g;
        }
    }
};

class TreeGrower {
public:
    TreeGrower(const FeatureMatrix& m, const ForestParams& p, Rng rng)
        : m_(m), p_(p), rng_(rng), gains_(m.cols(), 0.0) {}

    Tree grow(std::vector<std::size_t> bag) {
        idx_ = std::move(bag);
        tree_.nodes.clear();
        grow_node(0, idx_.size());
        return std::move(tree_);
    }

    const std::vector<double>& gains() const { return gains_; }

private:
    double node_sse(std::size_t lo, std::size_t hi, double& mean_out) const {
        double sum = 0.0;
        double sumsq = 0.0;
        for (std::size_t k = lo; k < hi; ++k) {
            const double y = m_.target[idx_[k]];
            sum += y;
            sumsq += y * y;
        }
        const auto n = static_cast<double>(hi - lo);
        mean_out = sum / n;
        return std::max(sumsq - sum * sum / n, 0.0);
    }

    int make_leaf(double mean) {
        TreeNode node;
        node.value = mean;
        tree_.nodes.push_back(node);
        return static_cast<int>(tree_.nodes.size() - 1);
    }

    int grow_node(std::size_t lo, std::size_t hi) {
        const std::size_t count = hi - lo;
        double mean = 0.0;
        const double parent_sse = node_sse(lo, hi, mean);
        const auto min_size = static_cast<std::size_t>(p_.min_node_size);
        if (count < 2 * min_size || parent_sse <= 0.0) return make_leaf(mean);

        const int mtry = p_.mtry > 0 ? p_.mtry
                                     : std::max(1, static_cast<int>(m_.cols()) / 3);
        auto candidates = rng_.sample_without_replacement(m_.cols(),
                                                          std::min<std::size_t>(
                                                              static_cast<std::size_t>(mtry),
                                                              m_.cols()));
        std::sort(candidates.begin(), candidates.end());

        SplitChoice best;
        std::vector<std::pair<double, double>> points(count); // (feature value, target)
        for (std::size_t f : candidates) {
            const auto& col = m_.columns[f];
            for (std::size_t k = 0; k < count; ++k) {
                const std::size_t row = idx_[lo + k];
                points[k] = {col[row], m_.target[row]};
            }
            std::stable_sort(points.begin(), points.end(),
                             [](const auto& a, const auto& b) { return a.first < b.first; });

            double left_sum = 0.0;
            double left_sumsq = 0.0;
            double total_sum = 0.0;
            double total_sumsq = 0.0;
            for (const auto& pt : points) {
                total_sum += pt.second;
                total_sumsq += pt.second * pt.second;
            }
            for (std::size_t k = 0; k + 1 < count; ++k) {
                left_sum += points[k].second;
                left_sumsq += points[k].second * points[k].second;
                const std::size_t left_n = k + 1;
                const std::size_t right_n = count - left_n;
                if (left_n < min_size) continue;
                if (right_n < min_size) break;
                if (points[k].first == points[k + 1].first) continue; // not a boundary
                const double right_sum = total_sum - left_sum;
                const double right_sumsq = total_sumsq - left_sumsq;
                const double sse_l =
                    std::max(left_sumsq - left_sum * left_sum / static_cast<double>(left_n), 0.0);
                const double sse_r = std::max(
                    right_sumsq - right_sum * right_sum / static_cast<double>(right_n), 0.0);
                const double thr = 0.5 * (points[k].first + points[k + 1].first);
                best.offer(static_cast<int>(f), thr, parent_sse - sse_l - sse_r);
            }
        }
        if (!best.found) return make_leaf(mean);

        // stable partition keeps row order inside each side, so child sums
        // are evaluated in a fixed order and the tree is fully reproducible
        const auto split_col = m_.columns[static_cast<std::size_t>(best.feature)].data();
        const double thr = best.threshold;
        auto mid = std::stable_partition(
            idx_.begin() + static_cast<long>(lo), idx_.begin() + static_cast<long>(hi),
            [&](std::size_t row) { return split_col[row] <= thr; });
        const auto split_at = static_cast<std::size_t>(mid - idx_.begin());

        gains_[static_cast<std::size_t>(best.feature)] += best.gain;

        const int node_id = make_leaf(mean); // placeholder, filled in below
        const int left_id = grow_node(lo, split_at);
        const int right_id = grow_node(split_at, hi);
        TreeNode& node = tree_.nodes[static_cast<std::size_t>(node_id)];
        node.feature = best.feature;
        node.threshold = thr;
        node.left = left_id;
        node.right = right_id;
        return node_id;
    }

    const FeatureMatrix& m_;
    const ForestParams& p_;
    Rng rng_;
    std::vector<double> gains_;
    std::vector<std::size_t> idx_;
    Tree tree_;
};

double tree_predict_row(const Tree& tree, const FeatureMatrix& m, std::size_t row) {
    int node_id = 0;
    while (true) {
        const TreeNode& node = tree.nodes[static_cast<std::size_t>(node_id)];
        if (node.feature < 0) return node.value;
        const double v = m.columns[static_cast<std::size_t>(node.feature)][row];
        node_id = v <= node.threshold ? node.left : node.right;
    }
}

} // namespace

ForestModel fit_forest(const FeatureMatrix& m, const ForestParams& p, int jobs) {
    if (p.ntree < 1) throw Error(ErrorKind::ConfigError, "ntree must be >= 1");
    if (p.min_node_size < 1) throw Error(ErrorKind::ConfigError, "min_node_size must be >= 1");
    if (p.bag_fraction <= 0.0 || p.bag_fraction > 1.0) {
        throw Error(ErrorKind::ConfigError, "bag_fraction must lie in (0,1]");
    }
    if (p.mtry < 0 || p.mtry > static_cast<int>(m.cols())) {
        throw Error(ErrorKind::ConfigError, "mtry must lie in [1, feature count] (or 0 for auto)");
    }
    if (m.rows() == 0 || m.cols() == 0) throw Error(ErrorKind::EmptyMatrix, "nothing to fit on");
    const std::size_t n = m.rows();
    if (n < static_cast<std::size_t>(p.min_node_size)) {
        throw Error(ErrorKind::TooFewRows, "forest needs at least min_node_size rows");
    }
    for (const auto& col : m.columns) {
        for (double v : col) {
            if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteInput, "non-finite feature value");
        }
    }
    for (double v : m.target) {
        if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteInput, "non-finite target value");
    }

    const auto ntree = static_cast<std::size_t>(p.ntree);
    const auto bag_n = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(p.bag_fraction * static_cast<double>(n))));

    ForestModel model;
    model.params = p;
    model.column_names = m.column_names;
    model.trees.resize(ntree);

    std::vector<std::vector<double>> per_tree_gains(ntree);
    std::vector<std::vector<std::uint8_t>> in_bag(ntree, std::vector<std::uint8_t>(n, 0));

    parallel_for_index(ntree, jobs, [&](std::size_t t) {
        Rng rng(Rng::derive(p.rng_seed, kForestStream, t));
        std::vector<std::size_t> bag;
        if (p.bootstrap) {
            bag.resize(n); // classic bootstrap keeps the bag at full size
            for (auto& row : bag) row = rng.uniform_below(n);
        } else {
            bag = rng.sample_without_replacement(n, bag_n);
            std::sort(bag.begin(), bag.end());
        }
        for (std::size_t row : bag) in_bag[t][row] = 1;

        TreeGrower grower(m, p, rng);
        model.trees[t] = grower.grow(std::move(bag));
        per_tree_gains[t] = grower.gains();
    });

    // serial reductions in fixed tree order keep results independent of jobs
    model.importance.assign(m.cols(), 0.0);
    for (std::size_t t = 0; t < ntree; ++t) {
        for (std::size_t j = 0; j < m.cols(); ++j) model.importance[j] += per_tree_gains[t][j];
    }
    for (auto& v : model.importance) v /= static_cast<double>(ntree);

    std::vector<double> oob_sum(n, 0.0);
    std::vector<std::size_t> oob_count(n, 0);
    for (std::size_t t = 0; t < ntree; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            if (in_bag[t][i]) continue;
            oob_sum[i] += tree_predict_row(model.trees[t], m, i);
            ++oob_count[i];
        }
    }
    double sq = 0.0;
    std::size_t covered = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (oob_count[i] == 0) continue;
        const double e = m.target[i] - oob_sum[i] / static_cast<double>(oob_count[i]);
        sq += e * e;
        ++covered;
    }
    model.oob_rmse = covered > 0 ? std::sqrt(sq / static_cast<double>(covered))
                                 : std::numeric_limits<double>::quiet_NaN();
    return model;
}

std::vector<double> predict(const ForestModel& model, const FeatureMatrix& m) {
    if (model.column_names != m.column_names) {
        throw Error(ErrorKind::ColumnMismatch, "prediction columns differ from training columns");
    }
    std::vector<double> out(m.rows(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double sum = 0.0;
        for (const auto& tree : model.trees) sum += tree_predict_row(tree, m, i);
        out[i] = sum / static_cast<double>(model.trees.size());
    }
    return out;
}

} // namespace stackcast
