#pragma once

#include "treealg/region.hpp"
#include "treealg/schema.hpp"
#include "treealg/split.hpp"

#include <array>
#include <variant>
#include <vector>

namespace treealg {

enum class PartitionOutcome { SplitsRegion, RegionInLeft, RegionInRight };

/**
 * How two splits that both partition a region interact inside it.
 * "Second in left/right" names the piece of the first split that the
 * second split's boundary passes through.
 */
enum class PairClassification {
    Crossing,
    ParallelSecondInLeft,
    ParallelSecondInRight,
    IdenticalSameOrientation,
    IdenticalSwapped,
};

/** Non-emptiness of the four cells side(u) x side(v) inside a region. */
struct SplitPairCells {
    bool left_left = false;
    bool left_right = false;
    bool right_left = false;
    bool right_right = false;

    bool nonempty(Side u_side, Side v_side) const;
    PairClassification classify() const;
};

enum class HyperplaneTestResult { Intersects, PolyhedronInUpper, PolyhedronInLower, EmptyPolyhedron };

/** Closed half-space coeffs . x <= rhs over R^n. */
struct LinearConstraint {
    std::vector<double> coeffs;
    double rhs = 0.0;
};

/** Exact emptiness test; uses a linear program when half-spaces are present. */
bool is_empty(const FeatureSchema& schema, const Region& region);

/** inner is a subset of outer. */
bool is_subset(const FeatureSchema& schema, const Region& inner, const Region& outer);

PartitionOutcome split_partitions_region(const FeatureSchema& schema, const Split& split,
                                         const Region& region);

SplitPairCells split_pair_cells(const FeatureSchema& schema, const Split& u, const Split& v,
                                const Region& region);

/** Requires both splits to partition `region`. */
PairClassification classify_split_pair(const FeatureSchema& schema, const Split& u,
                                       const Split& v, const Region& region);

/**
 * Does the hyperplane h.coeffs . x = h.offset meet the polyhedron given by
 * `constraints`? "Upper" is the open side h.coeffs . x > h.offset. The
 * constraints must bound the polyhedron.
 */
HyperplaneTestResult hyperplane_intersects_polyhedron(const HyperplaneSplit& h,
                                                      const std::vector<LinearConstraint>& constraints);

/** Box lo <= x <= hi as linear constraints. */
std::vector<LinearConstraint> box_constraints(const std::vector<double>& lo,
                                              const std::vector<double>& hi);

/** Uniform product measure over the domain box and categorical levels. */
struct UniformBox {};

/** Weighted point masses. */
struct Empirical {
    std::vector<Point> points;
    std::vector<double> weights;
};

/** Probability measure on the domain of a schema. */
class Measure {
public:
    static Measure uniform() { return Measure(UniformBox{}); }
    /** Weights must be non-negative and sum to 1 within 1e-12; empty weights mean equal masses. */
    static Measure empirical(const FeatureSchema& schema, std::vector<Point> points,
                             std::vector<double> weights = {});

    bool is_uniform() const { return std::holds_alternative<UniformBox>(kind_); }
    const Empirical& empirical_data() const { return std::get<Empirical>(kind_); }

private:
    explicit Measure(std::variant<UniformBox, Empirical> kind) : kind_(std::move(kind)) {}
    std::variant<UniformBox, Empirical> kind_;
};

/** p(region). UniformBox rejects regions with half-space constraints. */
double region_measure(const FeatureSchema& schema, const Region& region, const Measure& m);

} // namespace treealg
