#include "treealg/combine.hpp"

#include "treealg/error.hpp"
#include "treealg/geometry.hpp"

#include <cmath>
#include <functional>
#include <optional>

namespace treealg {

namespace {

using LeafMap = std::function<LeafValue(const LeafValue&)>;
using LeafPair = std::function<LeafValue(const LeafValue&, const LeafValue&)>;

/** Output tree under construction plus the bookkeeping shared by collect and combine. */
class Growth {
public:
    Growth(SchemaPtr schema, CombineBudget& budget) : builder_(schema), schema_(std::move(schema)), budget_(budget) {
        check_size();
    }

    const FeatureSchema& schema() const { return *schema_; }
    CombineBudget& budget() { return budget_; }
    TreeBuilder& builder() { return builder_; }

    std::pair<NodeId, NodeId> grow(NodeId w, const Split& split) {
        auto children = builder_.split(w, split);
        check_size();
        return children;
    }

    // The subtree of `src` at `v` restricted to `region`, grafted at `w`.
    void collect(const Tree& src, NodeId v, NodeId w, const Region& region, const LeafMap& leaf,
                 bool count_visit) {
        if (count_visit) ++budget_.calls_made;
        const Node& n = src.node(v);
        if (n.is_leaf()) {
            if (!n.value) throw Error(ErrorCode::Validation, "leaf without value");
            builder_.set_value(w, leaf(*n.value));
            return;
        }
        switch (split_partitions_region(schema(), *n.split, region)) {
        case PartitionOutcome::SplitsRegion: {
            auto [l, r] = grow(w, *n.split);
            collect(src, *n.left, l, region.refine(*n.split, Side::Left), leaf, true);
            collect(src, *n.right, r, region.refine(*n.split, Side::Right), leaf, true);
            break;
        }
        case PartitionOutcome::RegionInLeft:
            collect(src, *n.left, w, region, leaf, true);
            break;
        case PartitionOutcome::RegionInRight:
            collect(src, *n.right, w, region, leaf, true);
            break;
        }
    }

private:
    void check_size() {
        if (builder_.size() > budget_.max_nodes)
            throw Error(ErrorCode::BudgetExceeded,
                        "combined tree exceeds max_nodes=" + std::to_string(budget_.max_nodes) +
                            " (partial size " + std::to_string(builder_.size()) + " nodes)");
    }

    TreeBuilder builder_;
    SchemaPtr schema_;
    CombineBudget& budget_;
};

/**
 * Product of two trees. The split of the first tree is used whenever a
 * choice exists, so the recursion is a depth-first walk of t1 that drags
 * along the smallest subtree of t2 covering the working region.
 */
class PairCombiner {
public:
    PairCombiner(const Tree& t1, const Tree& t2, CombineBudget& budget, const CombineOptions& options,
                 LeafPair pair)
        : t1_(t1), t2_(t2), growth_(t1.schema_ptr(), budget), options_(options), pair_(std::move(pair)) {}

    Tree run() && {
        combine(t1_.root(), t2_.root(), growth_.builder().root(), Region(t1_.schema()));
        return std::move(growth_.builder()).build();
    }

private:
    void combine(NodeId u, NodeId v, NodeId w, const Region& region) {
        ++growth_.budget().calls_made;
        if (options_.check_containment) check_containment(u, v, region);

        const Node& nu = t1_.node(u);
        const Node& nv = t2_.node(v);
        if (nu.is_leaf() || nv.is_leaf()) {
            terminal(nu, nv, u, v, w, region);
            return;
        }

        const FeatureSchema& schema = growth_.schema();
        PartitionOutcome pu = split_partitions_region(schema, *nu.split, region);
        PartitionOutcome pv = split_partitions_region(schema, *nv.split, region);
        if (pu != PartitionOutcome::SplitsRegion || pv != PartitionOutcome::SplitsRegion) {
            // Intersection absent: descend into whichever children hold the working region.
            combine(descend(nu, u, pu), descend(nv, v, pv), w, region);
            return;
        }

        SplitPairCells cells = split_pair_cells(schema, *nu.split, *nv.split, region);
        PairClassification kind = cells.classify();
        auto [lw, rw] = growth_.grow(w, *nu.split);
        Region left = region.refine(*nu.split, Side::Left);
        Region right = region.refine(*nu.split, Side::Right);
        switch (kind) {
        case PairClassification::Crossing:
            combine(*nu.left, v, lw, left);
            combine(*nu.right, v, rw, right);
            break;
        case PairClassification::ParallelSecondInLeft:
            combine(*nu.left, v, lw, left);
            combine(*nu.right, cells.right_left ? *nv.left : *nv.right, rw, right);
            break;
        case PairClassification::ParallelSecondInRight:
            combine(*nu.left, cells.left_left ? *nv.left : *nv.right, lw, left);
            combine(*nu.right, v, rw, right);
            break;
        case PairClassification::IdenticalSameOrientation:
            combine(*nu.left, *nv.left, lw, left);
            combine(*nu.right, *nv.right, rw, right);
            break;
        case PairClassification::IdenticalSwapped:
            combine(*nu.left, *nv.right, lw, left);
            combine(*nu.right, *nv.left, rw, right);
            break;
        }
    }

    // The visit of (u, v) already counted; collect starts on the same pair.
    void terminal(const Node& nu, const Node& nv, NodeId u, NodeId v, NodeId w, const Region& region) {
        if (nu.is_leaf() && nv.is_leaf()) {
            if (!nu.value || !nv.value) throw Error(ErrorCode::Validation, "leaf without value");
            growth_.builder().set_value(w, pair_(*nu.value, *nv.value));
        } else if (nu.is_leaf()) {
            if (!nu.value) throw Error(ErrorCode::Validation, "leaf without value");
            const LeafValue& fu = *nu.value;
            growth_.collect(t2_, v, w, region, [&](const LeafValue& fv) { return pair_(fu, fv); }, false);
        } else {
            if (!nv.value) throw Error(ErrorCode::Validation, "leaf without value");
            const LeafValue& fv = *nv.value;
            growth_.collect(t1_, u, w, region, [&](const LeafValue& fu) { return pair_(fu, fv); }, false);
        }
    }

    static NodeId descend(const Node& n, NodeId id, PartitionOutcome p) {
        switch (p) {
        case PartitionOutcome::RegionInLeft: return *n.left;
        case PartitionOutcome::RegionInRight: return *n.right;
        case PartitionOutcome::SplitsRegion: return id;
        }
        return id;
    }

    void check_containment(NodeId u, NodeId v, const Region& region) const {
        const FeatureSchema& schema = growth_.schema();
        if (!is_subset(schema, region, node_region(t1_, u)) || !is_subset(schema, region, node_region(t2_, v)))
            throw Error(ErrorCode::InvalidArgument,
                        "working region escapes node regions at (" + std::to_string(u) + ", " +
                            std::to_string(v) + ")");
    }

    const Tree& t1_;
    const Tree& t2_;
    Growth growth_;
    CombineOptions options_;
    LeafPair pair_;
};

void check_compatible(const Tree& a, const Tree& b) {
    if (!(a.schema() == b.schema())) throw Error(ErrorCode::SchemaMismatch, "trees have different schemas");
    auto ka = a.leaf_kind();
    auto kb = b.leaf_kind();
    if (!ka || !kb || *ka != *kb)
        throw Error(ErrorCode::KindMismatch, "trees have different leaf value kinds");
}

Tuple singleton(const LeafValue& v, std::size_t source) {
    return Tuple{{to_basic(v)}, {source}};
}

} // namespace

Tree collect(const Tree& source, const Region& region) {
    if (is_empty(source.schema(), region)) throw Error(ErrorCode::InvalidArgument, "collect over an empty region");
    CombineBudget budget;
    Growth growth(source.schema_ptr(), budget);
    growth.collect(source, source.root(), growth.builder().root(), region,
                   [](const LeafValue& v) { return v; }, true);
    return std::move(growth.builder()).build();
}

Tree combine_pair(const Tree& t1, const Tree& t2, CombineBudget& budget, const CombineOptions& options) {
    check_compatible(t1, t2);
    return PairCombiner(t1, t2, budget, options, [](const LeafValue& a, const LeafValue& b) -> LeafValue {
               return Tuple{{to_basic(a), to_basic(b)}, {0, 1}};
           }).run();
}

Tree combine_many(std::span<const Tree> trees, CombineBudget& budget, const CombineOptions& options) {
    if (trees.empty()) throw Error(ErrorCode::InvalidArgument, "combine_many needs at least one tree");
    for (const Tree& t : trees.subspan(1)) check_compatible(trees.front(), t);
    Tree acc = map_leaves(trees.front(), [](const LeafValue& v) -> LeafValue { return singleton(v, 0); });
    for (std::size_t k = 1; k < trees.size(); ++k) {
        acc = PairCombiner(acc, trees[k], budget, options, [k](const LeafValue& a, const LeafValue& b) -> LeafValue {
                  Tuple t = std::get<Tuple>(a);
                  t.values.push_back(to_basic(b));
                  t.sources.push_back(k);
                  return t;
              }).run();
    }
    return acc;
}

Tree collapse_tuples(const Tree& combined, std::span<const double> weights) {
    return map_leaves(combined, [&](const LeafValue& v) -> LeafValue {
        const auto* t = std::get_if<Tuple>(&v);
        if (!t) throw Error(ErrorCode::KindMismatch, "collapse_tuples needs tuple leaves");
        for (std::size_t src : t->sources)
            if (src >= weights.size()) throw Error(ErrorCode::InvalidArgument, "missing weight for source tree");
        if (value_kind(v) == ValueKind::Scalar) {
            double acc = 0.0;
            for (std::size_t i = 0; i < t->values.size(); ++i)
                acc += weights[t->sources[i]] * std::get<Scalar>(t->values[i]).value;
            return Scalar{acc};
        }
        std::vector<double> acc;
        for (std::size_t i = 0; i < t->values.size(); ++i) {
            const auto& p = std::get<ClassProbs>(t->values[i]).probs;
            acc.resize(p.size(), 0.0);
            for (std::size_t s = 0; s < p.size(); ++s) acc[s] += weights[t->sources[i]] * p[s];
        }
        double sum = 0.0;
        for (double p : acc) {
            if (p < 0.0)
                throw Error(ErrorCode::InvalidArgument, "weights produce a negative class probability");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw Error(ErrorCode::InvalidArgument, "weights of class-probability trees must sum to 1");
        return ClassProbs{std::move(acc)};
    });
}

Tree affine_combination(std::span<const Tree> trees, std::span<const double> weights, CombineBudget& budget) {
    if (weights.size() != trees.size())
        throw Error(ErrorCode::InvalidArgument, "got " + std::to_string(weights.size()) + " weights for " +
                                                    std::to_string(trees.size()) + " trees");
    return collapse_tuples(combine_many(trees, budget), weights);
}

namespace {

std::optional<LeafValue> collapsed_value(const Tree& t, NodeId id, std::vector<std::optional<LeafValue>>& memo) {
    const Node& n = t.node(id);
    if (n.is_leaf()) {
        memo[id] = n.value;
        return memo[id];
    }
    auto l = collapsed_value(t, *n.left, memo);
    auto r = collapsed_value(t, *n.right, memo);
    if (l && r && *l == *r) memo[id] = l;
    return memo[id];
}

void rebuild(const Tree& t, NodeId id, NodeId w, TreeBuilder& b,
             const std::vector<std::optional<LeafValue>>& memo) {
    if (memo[id]) {
        b.set_value(w, *memo[id]);
        return;
    }
    const Node& n = t.node(id);
    auto [l, r] = b.split(w, *n.split);
    rebuild(t, *n.left, l, b, memo);
    rebuild(t, *n.right, r, b, memo);
}

} // namespace

Tree simplify(const Tree& tree) {
    std::vector<std::optional<LeafValue>> memo(tree.size());
    collapsed_value(tree, tree.root(), memo);
    TreeBuilder b(tree.schema_ptr());
    rebuild(tree, tree.root(), b.root(), b, memo);
    return std::move(b).build();
}

} // namespace treealg
