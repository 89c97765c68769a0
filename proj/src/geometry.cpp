#include "treealg/geometry.hpp"

#include "treealg/error.hpp"
#include "treealg/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace treealg {

namespace {

// Smallest slack on the strict rows below which a region counts as empty.
// Units are fractions of the domain box.
constexpr double kStrictMargin = 1e-10;

struct ScaledRows {
    std::vector<std::vector<double>> a;
    std::vector<double> b;
};

void add_row(ScaledRows& rows, std::vector<double> coeffs, double rhs, bool strict, std::size_t t_col) {
    coeffs[t_col] = strict ? 1.0 : 0.0;
    rows.a.push_back(std::move(coeffs));
    rows.b.push_back(rhs);
}

// Maximises the slack t of all strict inequalities over the region, with the
// numeric features rescaled to y in [0, 1]^K. The region is non-empty iff the
// program is feasible and t > 0.
bool polyhedron_empty(const FeatureSchema& schema, const Region& region) {
    const auto& numeric = schema.numeric_features();
    const std::size_t k = numeric.size();
    const std::size_t t_col = k;
    std::vector<double> origin(k), width(k);
    for (std::size_t j = 0; j < k; ++j) {
        origin[j] = schema[numeric[j]].range().low;
        width[j] = schema[numeric[j]].range().high - origin[j];
    }

    ScaledRows rows;
    for (std::size_t j = 0; j < k; ++j) {
        const Interval& iv = region.interval(numeric[j]);
        std::vector<double> upper(k + 1, 0.0);
        upper[j] = 1.0;
        add_row(rows, upper, (iv.high - origin[j]) / width[j], !iv.high_closed, t_col);
        std::vector<double> lower(k + 1, 0.0);
        lower[j] = -1.0;
        add_row(rows, lower, -(iv.low - origin[j]) / width[j], !iv.low_closed, t_col);
    }
    for (const HalfSpace& h : region.half_spaces()) {
        std::vector<double> row(k + 1, 0.0);
        double rhs = h.plane.offset;
        double norm = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            row[j] = h.plane.coeffs[j] * width[j];
            rhs -= h.plane.coeffs[j] * origin[j];
            norm = std::max(norm, std::abs(row[j]));
        }
        if (norm == 0.0) throw Error(ErrorCode::InvalidArgument, "zero hyperplane");
        for (double& v : row) v /= norm;
        rhs /= norm;
        if (h.side == Side::Left) {
            add_row(rows, row, rhs, false, t_col);
        } else {
            for (double& v : row) v = -v;
            add_row(rows, row, -rhs, true, t_col);
        }
    }
    std::vector<double> t_cap(k + 1, 0.0);
    rows.a.push_back(t_cap);
    rows.b.push_back(1.0);
    rows.a.back()[t_col] = 1.0;

    std::vector<double> objective(k + 1, 0.0);
    objective[t_col] = 1.0;
    LpSolution sol = solve_lp(rows.a, rows.b, objective);
    if (sol.status == LpStatus::Infeasible) return true;
    if (sol.status == LpStatus::Unbounded)
        throw Error(ErrorCode::UnsupportedGeometry, "unbounded region program");
    return !(sol.objective > kStrictMargin);
}

// Interval intersected with (-inf, bound) or (-inf, bound].
Interval below(const Interval& iv, double bound, bool inclusive) {
    Interval out = iv;
    if (bound < out.high || (bound == out.high && !inclusive)) {
        out.high = bound;
        out.high_closed = bound < iv.high ? inclusive : (inclusive && iv.high_closed);
    }
    return out;
}

Interval above(const Interval& iv, double bound, bool inclusive) {
    Interval out = iv;
    if (bound > out.low || (bound == out.low && !inclusive)) {
        out.low = bound;
        out.low_closed = bound > iv.low ? inclusive : (inclusive && iv.low_closed);
    }
    return out;
}

} // namespace

bool is_empty(const FeatureSchema& schema, const Region& region) {
    if (region.axis_empty()) return true;
    if (region.axis_aligned()) return false;
    return polyhedron_empty(schema, region);
}

bool is_subset(const FeatureSchema& schema, const Region& inner, const Region& outer) {
    if (is_empty(schema, inner)) return true;
    for (std::size_t f = 0; f < schema.size(); ++f) {
        if (schema[f].is_numeric()) {
            const Interval& o = outer.interval(f);
            Region probe = inner;
            probe.set_interval(f, below(inner.interval(f), o.low, !o.low_closed));
            if (!is_empty(schema, probe)) return false;
            probe = inner;
            probe.set_interval(f, above(inner.interval(f), o.high, !o.high_closed));
            if (!is_empty(schema, probe)) return false;
        } else {
            if (!(inner.levels(f) & outer.levels(f).complement()).empty()) return false;
        }
    }
    for (const HalfSpace& h : outer.half_spaces()) {
        if (!is_empty(schema, inner.refine(Split{h.plane}, opposite(h.side)))) return false;
    }
    return true;
}

PartitionOutcome split_partitions_region(const FeatureSchema& schema, const Split& split,
                                         const Region& region) {
    if (auto msg = check_split(split, schema); !msg.empty()) throw Error(ErrorCode::KindMismatch, msg);
    bool left_empty = is_empty(schema, region.refine(split, Side::Left));
    bool right_empty = is_empty(schema, region.refine(split, Side::Right));
    if (left_empty && right_empty) throw Error(ErrorCode::InvalidArgument, "region is empty");
    if (left_empty) return PartitionOutcome::RegionInRight;
    if (right_empty) return PartitionOutcome::RegionInLeft;
    return PartitionOutcome::SplitsRegion;
}

bool SplitPairCells::nonempty(Side u_side, Side v_side) const {
    if (u_side == Side::Left) return v_side == Side::Left ? left_left : left_right;
    return v_side == Side::Left ? right_left : right_right;
}

PairClassification SplitPairCells::classify() const {
    int empties = !left_left + !left_right + !right_left + !right_right;
    if (empties == 0) return PairClassification::Crossing;
    if (empties == 1) {
        // The piece of u with an empty cell lies in one side of v, so v's
        // boundary runs through the other piece.
        if (!left_left || !left_right) return PairClassification::ParallelSecondInRight;
        return PairClassification::ParallelSecondInLeft;
    }
    if (empties == 2) {
        if (!left_right && !right_left) return PairClassification::IdenticalSameOrientation;
        if (!left_left && !right_right) return PairClassification::IdenticalSwapped;
    }
    throw Error(ErrorCode::InvalidArgument, "splits do not both partition the region");
}

SplitPairCells split_pair_cells(const FeatureSchema& schema, const Split& u, const Split& v,
                                const Region& region) {
    Region lu = region.refine(u, Side::Left);
    Region ru = region.refine(u, Side::Right);
    SplitPairCells cells;
    cells.left_left = !is_empty(schema, lu.refine(v, Side::Left));
    cells.left_right = !is_empty(schema, lu.refine(v, Side::Right));
    cells.right_left = !is_empty(schema, ru.refine(v, Side::Left));
    cells.right_right = !is_empty(schema, ru.refine(v, Side::Right));
    return cells;
}

PairClassification classify_split_pair(const FeatureSchema& schema, const Split& u, const Split& v,
                                       const Region& region) {
    return split_pair_cells(schema, u, v, region).classify();
}

std::vector<LinearConstraint> box_constraints(const std::vector<double>& lo,
                                              const std::vector<double>& hi) {
    std::vector<LinearConstraint> out;
    for (std::size_t j = 0; j < lo.size(); ++j) {
        std::vector<double> e(lo.size(), 0.0);
        e[j] = 1.0;
        out.push_back({e, hi[j]});
        e[j] = -1.0;
        out.push_back({e, -lo[j]});
    }
    return out;
}

namespace {

// max obj . x over the constraints plus `extra`, with free x written as p - q.
LpSolution maximise(const std::vector<LinearConstraint>& constraints,
                    const std::vector<LinearConstraint>& extra, const std::vector<double>& obj) {
    const std::size_t n = obj.size();
    std::vector<std::vector<double>> a;
    std::vector<double> b;
    auto push = [&](const LinearConstraint& c) {
        if (c.coeffs.size() != n)
            throw Error(ErrorCode::InvalidArgument, "constraint dimension does not match hyperplane");
        std::vector<double> row(2 * n);
        for (std::size_t j = 0; j < n; ++j) {
            row[j] = c.coeffs[j];
            row[n + j] = -c.coeffs[j];
        }
        a.push_back(std::move(row));
        b.push_back(c.rhs);
    };
    for (const auto& c : constraints) push(c);
    for (const auto& c : extra) push(c);
    std::vector<double> c2(2 * n);
    for (std::size_t j = 0; j < n; ++j) {
        c2[j] = obj[j];
        c2[n + j] = -obj[j];
    }
    LpSolution sol = solve_lp(a, b, c2);
    if (sol.status == LpStatus::Unbounded)
        throw Error(ErrorCode::InvalidArgument, "polyhedron is unbounded; include the bounding box");
    return sol;
}

} // namespace

HyperplaneTestResult hyperplane_intersects_polyhedron(const HyperplaneSplit& h,
                                                      const std::vector<LinearConstraint>& constraints) {
    const std::vector<double>& c = h.coeffs;
    const double b = h.offset;
    std::vector<double> neg(c.size());
    std::transform(c.begin(), c.end(), neg.begin(), [](double v) { return -v; });

    // max c'x s.t. constraints, c'x <= b + 1.
    LpSolution capped = maximise(constraints, {{c, b + 1.0}}, c);
    if (capped.status == LpStatus::Infeasible) {
        if (maximise(constraints, {}, std::vector<double>(c.size(), 0.0)).status == LpStatus::Infeasible)
            return HyperplaneTestResult::EmptyPolyhedron;
        // Every point has c'x > b + 1; confirm with the signs reversed.
        LpSolution reversed = maximise(constraints, {{neg, -b + 1.0}}, neg);
        if (reversed.status == LpStatus::Optimal && reversed.objective < -b)
            return HyperplaneTestResult::PolyhedronInUpper;
        return HyperplaneTestResult::Intersects;
    }
    if (capped.objective < b) return HyperplaneTestResult::PolyhedronInLower;
    LpSolution lowest = maximise(constraints, {}, neg);
    if (-lowest.objective > b) return HyperplaneTestResult::PolyhedronInUpper;
    return HyperplaneTestResult::Intersects;
}

Measure Measure::empirical(const FeatureSchema& schema, std::vector<Point> points,
                           std::vector<double> weights) {
    if (points.empty()) throw Error(ErrorCode::InvalidArgument, "empirical measure without points");
    for (const Point& p : points) check_point(schema, p);
    if (weights.empty()) weights.assign(points.size(), 1.0 / static_cast<double>(points.size()));
    if (weights.size() != points.size())
        throw Error(ErrorCode::InvalidArgument, "number of weights does not match number of points");
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w))
            throw Error(ErrorCode::InvalidArgument, "empirical weights must be non-negative");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw Error(ErrorCode::InvalidArgument, "empirical weights must sum to 1");
    return Measure(Empirical{std::move(points), std::move(weights)});
}

double region_measure(const FeatureSchema& schema, const Region& region, const Measure& m) {
    if (m.is_uniform()) {
        if (!region.axis_aligned())
            throw Error(ErrorCode::UnsupportedGeometry,
                        "uniform measure of a region with hyperplane constraints");
        if (region.axis_empty()) return 0.0;
        double p = 1.0;
        for (std::size_t f = 0; f < schema.size(); ++f) {
            if (schema[f].is_numeric()) {
                const NumericRange& r = schema[f].range();
                p *= region.interval(f).length() / (r.high - r.low);
            } else {
                p *= static_cast<double>(region.levels(f).count()) /
                     static_cast<double>(schema[f].num_levels());
            }
        }
        return p;
    }
    const Empirical& e = m.empirical_data();
    double p = 0.0;
    for (std::size_t i = 0; i < e.points.size(); ++i)
        if (region.contains(schema, e.points[i])) p += e.weights[i];
    return p;
}

} // namespace treealg
