#pragma once

// Brute-force references for the exact algorithms. Nothing here goes through
// combine or region_measure: values come from pointwise tree evaluation.

#include "treealg/geometry.hpp"
#include "treealg/tree.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace treealg {

/** Pointwise integrand over the values of several trees at one point. */
using Integrand = std::function<double(std::span<const LeafValue* const>)>;

namespace integrands {
/** Value of the single (scalar) tree. */
Integrand raw_value();
/** Product of all scalar values. */
Integrand product();
/** ||f1 - f2||^2 for scalars or class-probability vectors. */
Integrand squared_difference();
/** (sum_m w_m f_m)^2. */
Integrand weighted_sum_squared(std::vector<double> weights);
} // namespace integrands

/**
 * Cartesian grid of cells refining every split of a set of axis-aligned
 * trees; each tree is constant on each cell.
 */
class CellGrid {
public:
    /** Extra breakpoints are merged in; they must lie inside the domain. */
    CellGrid(std::span<const Tree> trees,
             const std::vector<std::vector<double>>& extra_breakpoints = {});

    std::size_t num_cells() const;
    /** Calls visit(representative point, uniform cell measure) for every cell. */
    void for_each_cell(const std::function<void(const Point&, double)>& visit) const;

private:
    const FeatureSchema* schema_;
    std::vector<std::vector<double>> breakpoints_;  // numeric features only
};

/**
 * Exact integral of `f` over the trees. UniformBox enumerates the cell grid;
 * Empirical sums over the measure's points. Hyperplane splits are rejected.
 */
double grid_integral(std::span<const Tree> trees, const Integrand& f, const Measure& m,
                     const std::vector<std::vector<double>>& extra_breakpoints = {});

struct McEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
};

/** Plain Monte Carlo with n >= 100 draws from `m`; reproducible per seed. */
McEstimate monte_carlo_integral(std::span<const Tree> trees, const Integrand& f,
                                const Measure& m, std::size_t n, std::uint64_t seed);

/** One draw from `m`. */
Point sample_point(const FeatureSchema& schema, const Measure& m, std::mt19937_64& rng);

struct Counterexample {
    Point point;
    LeafValue combined;
    std::vector<LeafValue> originals;
};

/** Checks at n sampled points that the combined tuple leaf equals the vector of original values. */
std::optional<Counterexample> pointwise_equivalence(const Tree& combined,
                                                    std::span<const Tree> originals,
                                                    std::size_t n, std::uint64_t seed);

struct FuzzOptions {
    std::size_t max_nodes = 31;
    std::size_t max_depth = 12;
    ValueKind kind = ValueKind::Scalar;
    /** Probability that a new split is a hyperplane (needs >= 2 numeric features). */
    double hyperplane_probability = 0.0;
    /** When > 0, scalar leaves draw integers in [0, value_levels) instead of reals. */
    int value_levels = 0;
};

/** `num_numeric` numeric features on random boxes plus `num_categorical` features with 2..5 levels. */
SchemaPtr random_schema(std::size_t num_numeric, std::size_t num_categorical,
                        std::mt19937_64& rng, std::size_t num_classes = 0);

/**
 * Grows a tree by repeatedly picking a leaf, a feature and a split uniform over
 * the leaf's current interval (or a random proper subset of its levels).
 */
Tree random_tree(const SchemaPtr& schema, const FuzzOptions& options, std::mt19937_64& rng);

} // namespace treealg
