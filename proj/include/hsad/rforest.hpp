#pragma once

#include <cstdint>
#include <vector>

#include "hsad/linalg.hpp"

namespace hsad {

// CART classification forest: Gini splits, sqrt(d) feature bagging, no
// depth limit, min leaf 1. Two classes: 0 = background, 1 = anomaly.
struct RandomForest {
    struct Node {
        int feature = -1; // < 0: leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        uint8_t vote = 0; // leaf majority class (tie -> background)
    };

    int tree_count = 0;
    int dim = 0;
    std::vector<std::vector<Node>> trees;
};

RandomForest rf_fit(const Matrix& features, const std::vector<uint8_t>& labels,
                    uint64_t seed, int trees = 200);

// Fraction of trees voting anomaly.
double rf_proba(const RandomForest& forest, const Vector& x);
Vector rf_proba_all(const RandomForest& forest, const Matrix& X);

} // namespace hsad
