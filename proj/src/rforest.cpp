#include "hsad/rforest.hpp"

#include <algorithm>
#include <cmath>

#include "hsad/errors.hpp"
#include "hsad/rng.hpp"

namespace hsad {

namespace {

struct TreeBuilder {
    const Matrix& X;
    const std::vector<uint8_t>& y;
    Rng& rng;
    int mtry;
    std::vector<RandomForest::Node>& nodes;
    std::vector<std::pair<double, uint8_t>> scratch;

    int build(std::vector<int>& idx, int begin, int end) {
        int node_id = static_cast<int>(nodes.size());
        nodes.push_back({});
        int n = end - begin;

        int pos = 0;
        for (int i = begin; i < end; ++i) pos += y[static_cast<size_t>(idx[static_cast<size_t>(i)])];
        if (pos == 0 || pos == n || n == 1) {
            nodes[static_cast<size_t>(node_id)].vote = pos * 2 > n ? 1 : 0;
            return node_id;
        }

        const int d = static_cast<int>(X.cols());
        auto feats = rng.sample_without_replacement(static_cast<size_t>(d),
                                                    static_cast<size_t>(mtry));

        int best_feature = -1;
        double best_threshold = 0.0;
        double best_impurity = 1e300;
        for (size_t fi = 0; fi < feats.size(); ++fi) {
            int f = static_cast<int>(feats[fi]);
            scratch.clear();
            for (int i = begin; i < end; ++i) {
                int s = idx[static_cast<size_t>(i)];
                scratch.emplace_back(X(s, f), y[static_cast<size_t>(s)]);
            }
            std::sort(scratch.begin(), scratch.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            int left_n = 0, left_pos = 0;
            for (int i = 0; i + 1 < n; ++i) {
                ++left_n;
                left_pos += scratch[static_cast<size_t>(i)].second;
                if (scratch[static_cast<size_t>(i)].first ==
                    scratch[static_cast<size_t>(i + 1)].first)
                    continue; // split only between distinct values
                int right_n = n - left_n;
                int right_pos = pos - left_pos;
                double pl = static_cast<double>(left_pos) / left_n;
                double pr = static_cast<double>(right_pos) / right_n;
                double gini = left_n * 2.0 * pl * (1.0 - pl) +
                              right_n * 2.0 * pr * (1.0 - pr);
                if (gini < best_impurity) {
                    best_impurity = gini;
                    best_feature = f;
                    best_threshold = 0.5 * (scratch[static_cast<size_t>(i)].first +
                                            scratch[static_cast<size_t>(i + 1)].first);
                }
            }
        }

        if (best_feature < 0) {
            // sampled features all constant here
            nodes[static_cast<size_t>(node_id)].vote = pos * 2 > n ? 1 : 0;
            return node_id;
        }

        int mid = begin;
        for (int i = begin; i < end; ++i) {
            if (X(idx[static_cast<size_t>(i)], best_feature) <= best_threshold) {
                std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(mid)]);
                ++mid;
            }
        }
        if (mid == begin || mid == end) {
            nodes[static_cast<size_t>(node_id)].vote = pos * 2 > n ? 1 : 0;
            return node_id;
        }
        int left = build(idx, begin, mid);
        int right = build(idx, mid, end);
        auto& node = nodes[static_cast<size_t>(node_id)];
        node.feature = best_feature;
        node.threshold = best_threshold;
        node.left = left;
        node.right = right;
        return node_id;
    }
};

} // namespace

RandomForest rf_fit(const Matrix& features, const std::vector<uint8_t>& labels,
                    uint64_t seed, int trees) {
    const int n = static_cast<int>(features.rows());
    if (labels.size() != static_cast<size_t>(n))
        throw ShapeError("rf_fit: label count != sample count");
    if (trees < 1)
        throw ParamError("rf_fit: trees must be >= 1");
    size_t pos = 0;
    for (uint8_t v : labels) pos += v ? 1 : 0;
    if (pos == 0 || pos == labels.size())
        throw ParamError("rf_fit: training set must contain both classes");

    RandomForest forest;
    forest.tree_count = trees;
    forest.dim = static_cast<int>(features.cols());
    forest.trees.resize(static_cast<size_t>(trees));
    int mtry = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(forest.dim))));

    for (int t = 0; t < trees; ++t) {
        Rng rng(derive_stream(seed, static_cast<uint64_t>(t)));
        std::vector<int> idx(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i)
            idx[static_cast<size_t>(i)] = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(n)));
        TreeBuilder b{features, labels, rng, mtry, forest.trees[static_cast<size_t>(t)], {}};
        b.build(idx, 0, n);
    }
    return forest;
}

double rf_proba(const RandomForest& forest, const Vector& x) {
    if (x.size() != forest.dim)
        throw ShapeError("rf_proba: dimension mismatch");
    int votes = 0;
    for (const auto& tree : forest.trees) {
        int node = 0;
        for (;;) {
            const auto& nd = tree[static_cast<size_t>(node)];
            if (nd.feature < 0) {
                votes += nd.vote;
                break;
            }
            node = x(nd.feature) <= nd.threshold ? nd.left : nd.right;
        }
    }
    return static_cast<double>(votes) / forest.tree_count;
}

Vector rf_proba_all(const RandomForest& forest, const Matrix& X) {
    Vector out(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        out(i) = rf_proba(forest, X.row(i).transpose());
    return out;
}

} // namespace hsad
