#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"
#include "treealg/error.hpp"
#include "treealg/oracle.hpp"

#include <random>

using namespace treealg;
using namespace fixtures;

namespace {

bool has_violation(const Tree& t, const std::string& needle) {
    for (const Violation& v : validate(t))
        if (v.message.find(needle) != std::string::npos) return true;
    return false;
}

} // namespace

TEST_CASE("schema validation") {
    CHECK_THROWS_AS(FeatureSchema({{"x", NumericRange{1, 0}}}), Error);
    CHECK_THROWS_AS(FeatureSchema({{"x", NumericRange{0, 1}}, {"x", NumericRange{0, 1}}}), Error);
    CHECK_THROWS_AS(FeatureSchema({{"c", CategoricalLevels{{}}}}), Error);
    FeatureSchema s({{"x", NumericRange{0, 1}}, {"c", CategoricalLevels{{"a", "b"}}}, {"y", NumericRange{2, 3}}});
    CHECK(s.numeric_features() == std::vector<std::size_t>{0, 2});
    CHECK(s.find("c") == 1u);
    CHECK_FALSE(s.find("z"));
    check_point(s, {0.5, 1, 2.5});
    CHECK_THROWS_AS(check_point(s, {0.5, 2, 2.5}), Error);
    CHECK_THROWS_AS(check_point(s, {1.5, 0, 2.5}), Error);
    CHECK_THROWS_AS(check_point(s, {0.5, 0}), Error);
}

TEST_CASE("evaluate follows the x <= c convention") {
    Tree t = stump4();
    CHECK(scalar_at(t, {3, 9}) == 0.0);
    CHECK(scalar_at(t, {4, 0}) == 0.0);
    CHECK(scalar_at(t, {7, 2}) == 1.0);
    CHECK_THROWS_AS(evaluate(t, {11, 2}), Error);
}

TEST_CASE("node_region of Stump4") {
    Tree t = stump4();
    Region root = node_region(t, t.root());
    CHECK(root == Region(*d2()));
    Region left = node_region(t, *t.node(t.root()).left);
    CHECK(left.interval(0) == Interval{0, true, 4, true});
    CHECK(left.interval(1) == Interval{0, true, 10, true});
    Region right = node_region(t, *t.node(t.root()).right);
    CHECK(right.interval(0) == Interval{4, false, 10, true});
    CHECK(right.interval(1) == Interval{0, true, 10, true});
}

TEST_CASE("validate reports violations") {
    CHECK(validate(stump4()).empty());

    SUBCASE("leaf without value") {
        std::vector<Node> nodes = stump4().nodes();
        nodes[2].value.reset();
        Tree t(d2(), nodes, 0);
        CHECK(has_violation(t, "leaf without value"));
    }
    SUBCASE("split outside the domain") {
        Tree t = stump(d2(), 0, 12.0);
        CHECK(has_violation(t, "split does not partition node region"));
    }
    SUBCASE("probabilities must sum to one") {
        auto schema = std::make_shared<const FeatureSchema>(std::vector<Feature>{{"x", NumericRange{0, 1}}},
                                                            std::vector<std::string>{"a", "b"});
        Tree t = constant_tree(schema, ClassProbs{{0.5, 0.3}});
        auto v = validate(t);
        REQUIRE(v.size() == 1);
        CHECK(v[0].message == "probabilities sum 0.8 ≠ 1");
    }
    SUBCASE("mixed leaf kinds") {
        auto schema = std::make_shared<const FeatureSchema>(std::vector<Feature>{{"x", NumericRange{0, 1}}},
                                                            std::vector<std::string>{"a", "b"});
        TreeBuilder b(schema);
        auto [l, r] = b.split(0, ThresholdSplit{0, 0.5});
        b.set_value(l, Scalar{1});
        b.set_value(r, ClassProbs{{1, 0}});
        CHECK(has_violation(std::move(b).build(), "leaf value kinds differ"));
    }
    SUBCASE("child of a split that does not partition is reported once") {
        TreeBuilder b(d2());
        auto [l, r] = b.split(0, ThresholdSplit{0, 4});
        auto [ll, lr] = b.split(l, ThresholdSplit{0, 6});
        b.set_value(ll, Scalar{0});
        b.set_value(lr, Scalar{0});
        b.set_value(r, Scalar{1});
        auto v = validate(std::move(b).build());
        REQUIRE(v.size() == 1);
        CHECK(v[0].node == l);
        CHECK(to_string(v[0]) == "split does not partition node region at node " + std::to_string(l));
    }
}

TEST_CASE("categorical splits route by membership") {
    auto schema = std::make_shared<const FeatureSchema>(
        std::vector<Feature>{{"c", CategoricalLevels{{"a", "b", "c"}}}});
    TreeBuilder b(schema);
    std::vector<std::size_t> left{0, 2};
    auto [l, r] = b.split(0, SubsetSplit{0, LevelSet::of(3, left)});
    b.set_value(l, Scalar{1});
    b.set_value(r, Scalar{2});
    Tree t = std::move(b).build();
    CHECK(validate(t).empty());
    CHECK(scalar_at(t, {0}) == 1);
    CHECK(scalar_at(t, {1}) == 2);
    CHECK(scalar_at(t, {2}) == 1);
}

TEST_CASE("exactly one leaf region contains each point") {
    std::mt19937_64 rng(11);
    for (int k = 0; k < 20; ++k) {
        SchemaPtr schema = random_schema(3, 2, rng);
        FuzzOptions opt;
        opt.max_nodes = 41;
        opt.hyperplane_probability = k % 2 ? 0.3 : 0.0;
        Tree t = random_tree(schema, opt, rng);
        REQUIRE(validate(t).empty());
        CHECK(node_region(t, t.root()) == Region(*schema));
        for (int i = 0; i < 200; ++i) {
            Point x = sample_point(*schema, Measure::uniform(), rng);
            std::size_t hits = 0;
            NodeId hit = 0;
            for_each_leaf(t, [&](NodeId id, const Region& r) {
                if (r.contains(*schema, x)) {
                    ++hits;
                    hit = id;
                }
            });
            CHECK(hits == 1);
            CHECK(hit == find_leaf(t, x));
            // Each internal node's region is split exactly between its children.
            for (NodeId v = 0; v < t.size(); ++v) {
                const Node& n = t.node(v);
                if (n.is_leaf() || !node_region(t, v).contains(*schema, x)) continue;
                bool in_left = node_region(t, *n.left).contains(*schema, x);
                bool in_right = node_region(t, *n.right).contains(*schema, x);
                CHECK(in_left != in_right);
            }
        }
    }
}

TEST_CASE("map_leaves and constant trees") {
    Tree t = map_leaves(stump4(), [](const LeafValue& v) { return Scalar{std::get<Scalar>(v).value * 3}; });
    CHECK(scalar_at(t, {7, 0}) == 3.0);
    Tree c = const_tree(7);
    CHECK(c.size() == 1);
    CHECK(validate(c).empty());
    CHECK(scalar_at(c, {1, 1}) == 7.0);
}
