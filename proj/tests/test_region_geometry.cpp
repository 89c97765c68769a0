#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"
#include "treealg/error.hpp"
#include "treealg/geometry.hpp"
#include "treealg/lp.hpp"
#include "treealg/oracle.hpp"

#include <cmath>
#include <random>

using namespace treealg;
using namespace fixtures;

namespace {

Region box(double lo1, bool lc1, double hi1, bool hc1) {
    Region r(*d2());
    r.set_interval(0, Interval{lo1, lc1, hi1, hc1});
    return r;
}

HyperplaneSplit plane(std::vector<double> c, double b) { return HyperplaneSplit{std::move(c), b}; }

/** min and max of c.x over the vertices of an axis box. */
std::pair<double, double> vertex_range(const std::vector<double>& c, const std::vector<double>& lo,
                                       const std::vector<double>& hi) {
    double mn = INFINITY;
    double mx = -INFINITY;
    for (unsigned mask = 0; mask < (1u << c.size()); ++mask) {
        double v = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i) v += c[i] * ((mask >> i) & 1u ? hi[i] : lo[i]);
        mn = std::min(mn, v);
        mx = std::max(mx, v);
    }
    return {mn, mx};
}

/**
 * Non-emptiness of one cell, refined directly from the region. Sampled points
 * that route to both sides witness non-emptiness independently of the LP.
 */
bool cell_seen(const FeatureSchema& schema, const Region& r, const Split& u, Side su, const Split& v, Side sv,
               std::mt19937_64& rng) {
    bool nonempty = !is_empty(schema, r.refine(u, su).refine(v, sv));
    for (int i = 0; i < 300 && !nonempty; ++i) {
        Point x = sample_point(schema, Measure::uniform(), rng);
        CHECK_FALSE((r.contains(schema, x) && route(u, schema, x) == su && route(v, schema, x) == sv));
    }
    return nonempty;
}

/**
 * Classification from the four cell flags: one empty cell means the second
 * boundary lies in the first split's piece whose cells are both non-empty.
 */
PairClassification expected_classification(bool ll, bool lr, bool rl, bool rr) {
    int empties = !ll + !lr + !rl + !rr;
    if (empties == 0) return PairClassification::Crossing;
    if (empties == 1) return (!ll || !lr) ? PairClassification::ParallelSecondInRight
                                          : PairClassification::ParallelSecondInLeft;
    REQUIRE(empties == 2);
    if (!lr && !rl) return PairClassification::IdenticalSameOrientation;
    REQUIRE((!ll && !rr));
    return PairClassification::IdenticalSwapped;
}

} // namespace

TEST_CASE("simplex solves small programs") {
    // max x + y s.t. x + 2y <= 4, 3x + y <= 6 -> (1.6, 1.2), objective 2.8
    auto s = solve_lp({{1, 2}, {3, 1}}, {4, 6}, {1, 1});
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.objective == doctest::Approx(2.8).epsilon(1e-12));
    CHECK(s.x[0] == doctest::Approx(1.6));
    CHECK(s.x[1] == doctest::Approx(1.2));
    // x >= 1 and x <= 0.5 is infeasible.
    CHECK(solve_lp({{-1}, {1}}, {-1, 0.5}, {1}).status == LpStatus::Infeasible);
    // Unbounded in y.
    CHECK(solve_lp({{1, 0}}, {1}, {0, 1}).status == LpStatus::Unbounded);
    // Negative right-hand side requires phase one: x >= 2, x <= 3, max -x -> x = 2.
    auto p = solve_lp({{-1}, {1}}, {-2, 3}, {-1});
    REQUIRE(p.status == LpStatus::Optimal);
    CHECK(p.objective == doctest::Approx(-2.0));
}

TEST_CASE("split_partitions_region") {
    const auto& s = *d2();
    ThresholdSplit x4{0, 4.0};
    CHECK(split_partitions_region(s, x4, Region(s)) == PartitionOutcome::SplitsRegion);
    CHECK(split_partitions_region(s, x4, box(6, false, 10, true)) == PartitionOutcome::RegionInRight);
    CHECK(split_partitions_region(s, x4, box(0, true, 4, true)) == PartitionOutcome::RegionInLeft);
    CHECK(split_partitions_region(s, x4, box(4, false, 10, true)) == PartitionOutcome::RegionInRight);
    CHECK_THROWS_AS(split_partitions_region(s, ThresholdSplit{5, 1.0}, Region(s)), Error);
    // Hyperplane delegates to the LP.
    CHECK(split_partitions_region(s, plane({1, 1}, 10), Region(s)) == PartitionOutcome::SplitsRegion);
    CHECK(split_partitions_region(s, plane({1, 1}, 25), Region(s)) == PartitionOutcome::RegionInLeft);
    CHECK(split_partitions_region(s, plane({1, 1}, -1), Region(s)) == PartitionOutcome::RegionInRight);
}

TEST_CASE("classify_split_pair examples") {
    const auto& s = *d2();
    CHECK(classify_split_pair(s, ThresholdSplit{0, 4}, ThresholdSplit{1, 5}, Region(s)) == PairClassification::Crossing);
    CHECK(classify_split_pair(s, ThresholdSplit{0, 4}, ThresholdSplit{0, 6}, Region(s)) ==
          PairClassification::ParallelSecondInRight);
    CHECK(classify_split_pair(s, ThresholdSplit{0, 6}, ThresholdSplit{0, 4}, Region(s)) ==
          PairClassification::ParallelSecondInLeft);
    CHECK(classify_split_pair(s, ThresholdSplit{0, 4}, ThresholdSplit{0, 4}, Region(s)) ==
          PairClassification::IdenticalSameOrientation);

    FeatureSchema cat({{"c", CategoricalLevels{{"a", "b", "c"}}}});
    std::vector<std::size_t> a{0};
    std::vector<std::size_t> bc{1, 2};
    SubsetSplit u{0, LevelSet::of(3, a)};
    SubsetSplit v{0, LevelSet::of(3, bc)};
    CHECK(classify_split_pair(cat, u, v, Region(cat)) == PairClassification::IdenticalSwapped);
    CHECK(classify_split_pair(cat, u, u, Region(cat)) == PairClassification::IdenticalSameOrientation);
    // A split that does not partition the region violates the precondition.
    CHECK_THROWS_AS(classify_split_pair(s, ThresholdSplit{0, 4}, ThresholdSplit{0, 20}, Region(s)), Error);
}

TEST_CASE("classification is symmetric and matches direct cell emptiness") {
    std::mt19937_64 rng(5);
    int checked = 0;
    for (int trial = 0; trial < 400; ++trial) {
        SchemaPtr schema = random_schema(2, 1, rng);
        FuzzOptions opt;
        opt.max_nodes = 7;
        opt.hyperplane_probability = trial % 3 == 0 ? 0.5 : 0.0;
        Tree t1 = random_tree(schema, opt, rng);
        Tree t2 = random_tree(schema, opt, rng);
        if (t1.size() < 3 || t2.size() < 3) continue;
        Region r(*schema);
        const Split& u = *t1.node(t1.root()).split;
        const Split& v = *t2.node(t2.root()).split;
        auto cu = classify_split_pair(*schema, u, v, r);
        auto cv = classify_split_pair(*schema, v, u, r);
        bool ll = cell_seen(*schema, r, u, Side::Left, v, Side::Left, rng);
        bool lr = cell_seen(*schema, r, u, Side::Left, v, Side::Right, rng);
        bool rl = cell_seen(*schema, r, u, Side::Right, v, Side::Left, rng);
        bool rr = cell_seen(*schema, r, u, Side::Right, v, Side::Right, rng);
        CHECK(cu == expected_classification(ll, lr, rl, rr));
        // Swapping the arguments transposes the cell table.
        CHECK(cv == expected_classification(ll, rl, lr, rr));
        ++checked;
    }
    CHECK(checked > 100);
}

TEST_CASE("parallel classification covers the L-L empty case") {
    // u: x1 <= 4, v: x1 > 6 routes left, i.e. -x1 <= -6. L(u) and L(v) are disjoint.
    const auto& s = *d2();
    Split u = ThresholdSplit{0, 4};
    Split v = plane({-1, 0}, -6);
    auto c = classify_split_pair(s, u, v, Region(s));
    CHECK(c == PairClassification::ParallelSecondInRight);
    auto cells = split_pair_cells(s, u, v, Region(s));
    CHECK_FALSE(cells.left_left);
    CHECK(cells.left_right);
    CHECK(cells.right_left);
    CHECK(cells.right_right);
}

TEST_CASE("region_measure") {
    const auto& s = *d2();
    CHECK(region_measure(s, box(4, false, 6, true), Measure::uniform()) == 0.2);
    CHECK(region_measure(s, Region(s), Measure::uniform()) == 1.0);
    Measure e = Measure::empirical(s, {{1, 0}, {5, 0}, {9, 0}});
    CHECK(region_measure(s, box(4, false, 10, true), e) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    Region h = Region(s).refine(plane({1, 1}, 6), Side::Left);
    CHECK_THROWS_AS(region_measure(s, h, Measure::uniform()), Error);
    CHECK(region_measure(s, h, e) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK_THROWS_AS(Measure::empirical(s, {{1, 0}}, {0.5}), Error);
    CHECK_THROWS_AS(Measure::empirical(s, {{11, 0}}), Error);
}

TEST_CASE("refined measures add up to the parent measure") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        SchemaPtr schema = random_schema(3, 2, rng);
        FuzzOptions opt;
        opt.max_nodes = 15;
        Tree t = random_tree(schema, opt, rng);
        std::vector<Point> pts;
        for (int i = 0; i < 30; ++i) pts.push_back(sample_point(*schema, Measure::uniform(), rng));
        Measure e = Measure::empirical(*schema, pts);
        for (NodeId v = 0; v < t.size(); ++v) {
            const Node& n = t.node(v);
            if (n.is_leaf()) continue;
            Region a = node_region(t, v);
            Region l = node_region(t, *n.left);
            Region r = node_region(t, *n.right);
            CHECK(std::abs(region_measure(*schema, l, Measure::uniform()) + region_measure(*schema, r, Measure::uniform()) -
                           region_measure(*schema, a, Measure::uniform())) <= 1e-12);
            // Empirical sums are over the same points; compare counts exactly.
            std::size_t cl = 0, cr = 0, ca = 0;
            for (const Point& x : pts) {
                cl += l.contains(*schema, x);
                cr += r.contains(*schema, x);
                ca += a.contains(*schema, x);
            }
            CHECK(cl + cr == ca);
            CHECK(region_measure(*schema, a, e) == doctest::Approx(ca / 30.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("uniform region measure agrees with Monte Carlo") {
    std::mt19937_64 rng(23);
    int outside = 0;
    const int trials = 50;
    for (int trial = 0; trial < trials; ++trial) {
        SchemaPtr schema = random_schema(3, 1, rng);
        FuzzOptions opt;
        opt.max_nodes = 9;
        Tree t = random_tree(schema, opt, rng);
        NodeId leaf = static_cast<NodeId>(t.size() - 1);
        Region r = node_region(t, leaf);
        double p = region_measure(*schema, r, Measure::uniform());
        const int n = 100000;
        int hits = 0;
        for (int i = 0; i < n; ++i) hits += r.contains(*schema, sample_point(*schema, Measure::uniform(), rng));
        double phat = static_cast<double>(hits) / n;
        double se = std::sqrt(std::max(p * (1 - p), 1e-12) / n);
        if (std::abs(phat - p) > 4 * se) ++outside;
    }
    CHECK(outside <= 1);
}

TEST_CASE("hyperplane_intersects_polyhedron examples") {
    auto square = box_constraints({0, 0}, {1, 1});
    CHECK(hyperplane_intersects_polyhedron(plane({1, 1}, 3), square) == HyperplaneTestResult::PolyhedronInLower);
    CHECK(hyperplane_intersects_polyhedron(plane({1, 1}, 1), square) == HyperplaneTestResult::Intersects);
    CHECK(hyperplane_intersects_polyhedron(plane({1, 0}, -1), square) == HyperplaneTestResult::PolyhedronInUpper);
    CHECK(hyperplane_intersects_polyhedron(plane({1, 1}, 2), square) == HyperplaneTestResult::Intersects);
    auto empty = square;
    empty.push_back({{-1, -1}, -3});  // x + y >= 3
    CHECK(hyperplane_intersects_polyhedron(plane({1, 0}, 0.5), empty) == HyperplaneTestResult::EmptyPolyhedron);
    // Boxes with negative coordinates need the free-variable split.
    auto shifted = box_constraints({-5, -5}, {-4, -4});
    CHECK(hyperplane_intersects_polyhedron(plane({1, 1}, -9), shifted) == HyperplaneTestResult::Intersects);
    CHECK(hyperplane_intersects_polyhedron(plane({1, 1}, -7), shifted) == HyperplaneTestResult::PolyhedronInLower);
}

TEST_CASE("LP test agrees with vertex enumeration on random boxes") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> u(-10, 10);
    std::normal_distribution<double> g;
    int compared = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::size_t d = trial % 2 ? 3 : 2;
        std::vector<double> lo(d), hi(d), c(d);
        for (std::size_t i = 0; i < d; ++i) {
            double a = u(rng), b = u(rng);
            lo[i] = std::min(a, b);
            hi[i] = std::max(a, b);
            c[i] = g(rng);
        }
        auto [mn, mx] = vertex_range(c, lo, hi);
        double b = std::uniform_real_distribution<double>(mn - 0.3 * (mx - mn), mx + 0.3 * (mx - mn))(rng);
        if (std::abs(b - mn) <= 1e-9 || std::abs(b - mx) <= 1e-9) continue;
        HyperplaneTestResult expected = b > mx   ? HyperplaneTestResult::PolyhedronInLower
                                        : b < mn ? HyperplaneTestResult::PolyhedronInUpper
                                                 : HyperplaneTestResult::Intersects;
        CHECK(hyperplane_intersects_polyhedron(plane(c, b), box_constraints(lo, hi)) == expected);
        ++compared;
    }
    CHECK(compared > 950);
}
