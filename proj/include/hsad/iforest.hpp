#pragma once

#include <cstdint>
#include <vector>

#include "hsad/linalg.hpp"

namespace hsad {

// Expected unsuccessful-search path length 2H(n-1) - 2(n-1)/n, with the
// harmonic number computed exactly; c(1) := 1 by convention for the score
// normalizer, while leaf adjustment uses c(n<=1) = 0.
double iforest_avg_path(int n);

struct IsolationForest {
    struct Node {
        int feature = -1; // < 0: leaf
        double split = 0.0;
        int left = -1;
        int right = -1;
        int size = 0;
    };
    struct Tree {
        std::vector<Node> nodes;
    };

    int tree_count = 0;
    int subsample = 0; // effective psi
    int dim = 0;
    double normalizer = 1.0; // c(psi)
    std::vector<double> path_table; // c(n) for n = 0..psi
    std::vector<Tree> trees;
};

// Per tree: psi-subsample without replacement, random feature + uniform
// split within the node's range, height limit ceil(log2 psi). Tree t draws
// from an independent stream derived from (seed, t).
IsolationForest iforest_fit(const Matrix& samples, uint64_t seed, int trees = 100,
                            int psi = 256);

// 2^(-E[path]/c(psi)); a forest trained on a single sample scores 0.5.
double iforest_score(const IsolationForest& forest, const Vector& x);
Vector iforest_score_all(const IsolationForest& forest, const Matrix& X);

} // namespace hsad
