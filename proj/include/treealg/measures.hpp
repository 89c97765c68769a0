#pragma once

#include "treealg/combine.hpp"
#include "treealg/geometry.hpp"
#include "treealg/tree.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

namespace treealg {

using Mean = std::variant<double, std::vector<double>>;

struct TreeStatistics {
    Mean mean;
    double variance = 0.0;
    double norm_squared = 0.0;
};

/** Integral of the tree against `m`: a real for scalar leaves, a vector for class probabilities. */
Mean tree_mean(const Tree& t, const Measure& m);
/** Integral of the squared deviation from the mean (squared Euclidean for class probabilities). */
double tree_variance(const Tree& t, const Measure& m);
double tree_norm_squared(const Tree& t, const Measure& m);
TreeStatistics tree_statistics(const Tree& t, const Measure& m);

double tree_covariance(const Tree& t1, const Tree& t2, const Measure& m,
                       CombineBudget budget = {});
/** Throws DegenerateCorrelation when either tree is constant almost everywhere. */
double tree_correlation(const Tree& t1, const Tree& t2, const Measure& m,
                        CombineBudget budget = {});

double tree_distance(const Tree& t1, const Tree& t2, const Measure& m,
                     CombineBudget budget = {});
double tree_inner_product(const Tree& t1, const Tree& t2, const Measure& m,
                          CombineBudget budget = {});

/**
 * Squared distance between the two components of a pair-combined tree.
 * `squared_distance_recursive` weights children by their conditional measure
 * p(child) / p(parent); `squared_distance_flat` sums ||f1 - f2||^2 p(leaf).
 */
double squared_distance_recursive(const Tree& combined, const Measure& m);
double squared_distance_flat(const Tree& combined, const Measure& m);

/** Distance between the sum functions of two forests via pairwise inner products. */
double forest_distance(std::span<const Tree> f, std::span<const Tree> g, const Measure& m,
                       CombineBudget budget = {});

/** Symmetric pairwise tree distances; pairs are spread over `jobs` threads. */
Eigen::MatrixXd distance_matrix(std::span<const Tree> trees, const Measure& m,
                                unsigned jobs = 1, CombineBudget budget = {});

} // namespace treealg
