#pragma once

#include "treealg/schema.hpp"
#include "treealg/split.hpp"

#include <variant>
#include <vector>

namespace treealg {

/** Numeric interval with explicit open/closed ends. */
struct Interval {
    double low = 0.0;
    bool low_closed = true;
    double high = 0.0;
    bool high_closed = true;

    bool empty() const {
        return low > high || (low == high && !(low_closed && high_closed));
    }
    bool contains(double x) const {
        return (low_closed ? x >= low : x > low) && (high_closed ? x <= high : x < high);
    }
    double length() const { return empty() ? 0.0 : high - low; }

    /** Intersection with (-inf, t]. */
    Interval clip_at_or_below(double t) const;
    /** Intersection with (t, +inf). */
    Interval clip_above(double t) const;
    bool is_subset_of(const Interval& other) const;

    bool operator==(const Interval&) const = default;
};

struct HalfSpace {
    HyperplaneSplit plane;
    Side side = Side::Left;
    bool operator==(const HalfSpace&) const = default;
};

/**
 * A subset of the domain: one interval per numeric feature, one admissible
 * level set per categorical feature, and a list of hyperplane half-spaces.
 * Regions are plain values; refining returns a new region.
 */
class Region {
public:
    using Constraint = std::variant<Interval, LevelSet>;

    /** The whole domain of `schema`. */
    explicit Region(const FeatureSchema& schema);

    const std::vector<Constraint>& constraints() const { return constraints_; }
    const Interval& interval(std::size_t feature) const { return std::get<Interval>(constraints_.at(feature)); }
    const LevelSet& levels(std::size_t feature) const { return std::get<LevelSet>(constraints_.at(feature)); }
    const std::vector<HalfSpace>& half_spaces() const { return half_spaces_; }
    bool axis_aligned() const { return half_spaces_.empty(); }

    void set_interval(std::size_t feature, const Interval& iv);
    void set_levels(std::size_t feature, const LevelSet& levels);
    void add_half_space(const HalfSpace& h) { half_spaces_.push_back(h); }

    /** This region intersected with one side of `split`. */
    Region refine(const Split& split, Side side) const;

    /** True if some per-feature constraint is empty. Half-spaces are not
     *  consulted; see geometry.hpp for the exact test. */
    bool axis_empty() const;

    bool contains(const FeatureSchema& schema, const Point& x) const;

    bool operator==(const Region&) const = default;

private:
    std::vector<Constraint> constraints_;
    std::vector<HalfSpace> half_spaces_;
};

} // namespace treealg
