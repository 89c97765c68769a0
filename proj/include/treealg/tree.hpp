#pragma once

#include "treealg/region.hpp"
#include "treealg/schema.hpp"
#include "treealg/split.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace treealg {

struct Scalar {
    double value = 0.0;
    bool operator==(const Scalar&) const = default;
};

/** Class-probability vector aligned with the schema's class labels. */
struct ClassProbs {
    std::vector<double> probs;
    bool operator==(const ClassProbs&) const = default;
};

using BasicValue = std::variant<Scalar, ClassProbs>;

/** One value per source tree, as produced by combining trees. `sources`
 *  holds the position of each source tree in the combined input list. */
struct Tuple {
    std::vector<BasicValue> values;
    std::vector<std::size_t> sources;
    bool operator==(const Tuple&) const = default;
};

using LeafValue = std::variant<Scalar, ClassProbs, Tuple>;

enum class ValueKind { Scalar, ClassProbs };

/** Kind of a basic value, or of the entries of a tuple. Empty tuples have no kind. */
std::optional<ValueKind> value_kind(const LeafValue& v);
std::optional<ValueKind> value_kind(const BasicValue& v);
BasicValue to_basic(const LeafValue& v);
LeafValue to_leaf(const BasicValue& v);

using NodeId = std::uint32_t;

struct Node {
    std::optional<NodeId> parent;
    std::optional<Split> split;
    std::optional<NodeId> left;
    std::optional<NodeId> right;
    std::optional<LeafValue> value;

    bool is_leaf() const { return !left && !right; }
    bool operator==(const Node&) const = default;
};

/**
 * A recursive partition function: an arena of nodes where internal nodes
 * carry splits and leaves carry constant values. The constructor only checks
 * that node references are in range; `validate` reports everything else.
 */
class Tree {
public:
    Tree(SchemaPtr schema, std::vector<Node> nodes, NodeId root);

    const FeatureSchema& schema() const { return *schema_; }
    const SchemaPtr& schema_ptr() const { return schema_; }
    const std::vector<Node>& nodes() const { return nodes_; }
    const Node& node(NodeId id) const;
    NodeId root() const { return root_; }
    std::size_t size() const { return nodes_.size(); }
    std::size_t num_leaves() const;
    /** Kind of the first leaf value found, if any. */
    std::optional<ValueKind> leaf_kind() const;

    bool operator==(const Tree& other) const {
        return *schema_ == *other.schema_ && nodes_ == other.nodes_ && root_ == other.root_;
    }

private:
    SchemaPtr schema_;
    std::vector<Node> nodes_;
    NodeId root_;
};

/** Grows a tree top-down from a root leaf. Node 0 is the root. */
class TreeBuilder {
public:
    explicit TreeBuilder(SchemaPtr schema);

    NodeId root() const { return 0; }
    std::size_t size() const { return nodes_.size(); }

    /** Turns leaf `w` into an internal node and returns its (left, right) children. */
    std::pair<NodeId, NodeId> split(NodeId w, Split split);
    void set_value(NodeId w, LeafValue value);

    Tree build() &&;

private:
    SchemaPtr schema_;
    std::vector<Node> nodes_;
};

/** Value of the leaf whose region contains `x`. */
const LeafValue& evaluate(const Tree& tree, const Point& x);
/** Leaf whose region contains `x`. */
NodeId find_leaf(const Tree& tree, const Point& x);

/** Domain intersected with the split constraints along the path to `node`. */
Region node_region(const Tree& tree, NodeId node);

/** Depth-first (left before right) walk over leaves with their regions. */
void for_each_leaf(const Tree& tree,
                   const std::function<void(NodeId, const Region&)>& visit);

struct Violation {
    std::optional<NodeId> node;
    std::string message;
    bool operator==(const Violation&) const = default;
};

/** Every violated structural, split, region and value invariant. */
std::vector<Violation> validate(const Tree& tree);

std::string to_string(const Violation& v);

/** Single-leaf tree representing a constant function. */
Tree constant_tree(SchemaPtr schema, LeafValue value);

/** Copy of `tree` with every leaf value replaced by `f(value)`. */
Tree map_leaves(const Tree& tree, const std::function<LeafValue(const LeafValue&)>& f);

} // namespace treealg
