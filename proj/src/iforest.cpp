#include "hsad/iforest.hpp"

#include <cmath>

#include "hsad/errors.hpp"
#include "hsad/rng.hpp"

namespace hsad {

double iforest_avg_path(int n) {
    if (n <= 1) return 0.0;
    if (n == 2) return 1.0;
    double h = 0.0;
    for (int i = 1; i <= n - 1; ++i) h += 1.0 / i;
    return 2.0 * h - 2.0 * (n - 1) / static_cast<double>(n);
}

namespace {

struct Builder {
    const Matrix& X;
    Rng& rng;
    int height_limit;
    IsolationForest::Tree& tree;

    int build(std::vector<int>& idx, int begin, int end, int depth) {
        int node_id = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({});
        int n = end - begin;
        tree.nodes[static_cast<size_t>(node_id)].size = n;
        if (n <= 1 || depth >= height_limit) return node_id;

        // features that still vary in this node
        const int d = static_cast<int>(X.cols());
        std::vector<int> varying;
        varying.reserve(static_cast<size_t>(d));
        for (int f = 0; f < d; ++f) {
            double lo = X(idx[static_cast<size_t>(begin)], f);
            double hi = lo;
            for (int i = begin + 1; i < end; ++i) {
                double v = X(idx[static_cast<size_t>(i)], f);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            if (hi > lo) varying.push_back(f);
        }
        if (varying.empty()) return node_id; // all-constant: leaf

        int f = varying[static_cast<size_t>(rng.uniform_int(varying.size()))];
        double lo = X(idx[static_cast<size_t>(begin)], f);
        double hi = lo;
        for (int i = begin + 1; i < end; ++i) {
            double v = X(idx[static_cast<size_t>(i)], f);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        double split = rng.uniform(lo, hi);

        // partition: left strictly below the split
        int mid = begin;
        for (int i = begin; i < end; ++i) {
            if (X(idx[static_cast<size_t>(i)], f) < split) {
                std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(mid)]);
                ++mid;
            }
        }
        if (mid == begin || mid == end) return node_id; // degenerate draw: leaf

        int left = build(idx, begin, mid, depth + 1);
        int right = build(idx, mid, end, depth + 1);
        auto& node = tree.nodes[static_cast<size_t>(node_id)];
        node.feature = f;
        node.split = split;
        node.left = left;
        node.right = right;
        return node_id;
    }
};

} // namespace

IsolationForest iforest_fit(const Matrix& samples, uint64_t seed, int trees, int psi) {
    const int n = static_cast<int>(samples.rows());
    if (n < 1)
        throw ParamError("iforest_fit: empty sample set");
    if (trees < 1 || psi < 1)
        throw ParamError("iforest_fit: trees and psi must be >= 1");

    IsolationForest forest;
    forest.tree_count = trees;
    forest.subsample = std::min(psi, n);
    forest.dim = static_cast<int>(samples.cols());
    forest.normalizer =
        forest.subsample <= 1 ? 1.0 : iforest_avg_path(forest.subsample);
    forest.path_table.resize(static_cast<size_t>(forest.subsample) + 1);
    for (int i = 0; i <= forest.subsample; ++i)
        forest.path_table[static_cast<size_t>(i)] = iforest_avg_path(i);
    forest.trees.resize(static_cast<size_t>(trees));

    int height_limit = forest.subsample <= 1
                           ? 0
                           : static_cast<int>(std::ceil(std::log2(forest.subsample)));

    for (int t = 0; t < trees; ++t) {
        Rng rng(derive_stream(seed, static_cast<uint64_t>(t)));
        auto picked = rng.sample_without_replacement(static_cast<size_t>(n),
                                                     static_cast<size_t>(forest.subsample));
        std::vector<int> idx(picked.begin(), picked.end());
        Builder b{samples, rng, height_limit, forest.trees[static_cast<size_t>(t)]};
        b.build(idx, 0, static_cast<int>(idx.size()), 0);
    }
    return forest;
}

namespace {

double path_length(const IsolationForest::Tree& tree, const std::vector<double>& table,
                   const Vector& x) {
    int node = 0;
    int depth = 0;
    for (;;) {
        const auto& nd = tree.nodes[static_cast<size_t>(node)];
        if (nd.feature < 0) return depth + table[static_cast<size_t>(nd.size)];
        node = x(nd.feature) < nd.split ? nd.left : nd.right;
        ++depth;
    }
}

} // namespace

double iforest_score(const IsolationForest& forest, const Vector& x) {
    if (x.size() != forest.dim)
        throw ShapeError("iforest_score: dimension mismatch");
    if (forest.subsample <= 1) return 0.5;
    double sum = 0.0;
    for (const auto& tree : forest.trees) sum += path_length(tree, forest.path_table, x);
    double mean = sum / forest.tree_count;
    return std::pow(2.0, -mean / forest.normalizer);
}

Vector iforest_score_all(const IsolationForest& forest, const Matrix& X) {
    Vector out(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        out(i) = iforest_score(forest, X.row(i).transpose());
    return out;
}

} // namespace hsad
