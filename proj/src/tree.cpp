#include "treealg/tree.hpp"

#include "treealg/error.hpp"
#include "treealg/geometry.hpp"

#include <cmath>
#include <cstdio>
#include <set>

namespace treealg {

std::optional<ValueKind> value_kind(const BasicValue& v) {
    return std::holds_alternative<Scalar>(v) ? ValueKind::Scalar : ValueKind::ClassProbs;
}

std::optional<ValueKind> value_kind(const LeafValue& v) {
    if (std::holds_alternative<Scalar>(v)) return ValueKind::Scalar;
    if (std::holds_alternative<ClassProbs>(v)) return ValueKind::ClassProbs;
    const Tuple& t = std::get<Tuple>(v);
    if (t.values.empty()) return std::nullopt;
    return value_kind(t.values.front());
}

BasicValue to_basic(const LeafValue& v) {
    if (const auto* s = std::get_if<Scalar>(&v)) return *s;
    if (const auto* p = std::get_if<ClassProbs>(&v)) return *p;
    throw Error(ErrorCode::KindMismatch, "tuple value where a scalar or probability vector was expected");
}

LeafValue to_leaf(const BasicValue& v) {
    return std::visit([](const auto& x) -> LeafValue { return x; }, v);
}

Tree::Tree(SchemaPtr schema, std::vector<Node> nodes, NodeId root)
    : schema_(std::move(schema)), nodes_(std::move(nodes)), root_(root) {
    if (!schema_) throw Error(ErrorCode::InvalidArgument, "tree without schema");
    if (root_ >= nodes_.size()) throw Error(ErrorCode::InvalidArgument, "root id out of range");
    for (const Node& n : nodes_) {
        for (const auto& ref : {n.parent, n.left, n.right})
            if (ref && *ref >= nodes_.size())
                throw Error(ErrorCode::InvalidArgument, "node reference out of range");
    }
}

const Node& Tree::node(NodeId id) const {
    if (id >= nodes_.size()) throw Error(ErrorCode::InvalidArgument, "unknown node id " + std::to_string(id));
    return nodes_[id];
}

std::size_t Tree::num_leaves() const {
    std::size_t n = 0;
    for (const Node& node : nodes_) n += node.is_leaf() ? 1 : 0;
    return n;
}

std::optional<ValueKind> Tree::leaf_kind() const {
    for (const Node& n : nodes_)
        if (n.value) return value_kind(*n.value);
    return std::nullopt;
}

TreeBuilder::TreeBuilder(SchemaPtr schema) : schema_(std::move(schema)) {
    nodes_.emplace_back();
}

std::pair<NodeId, NodeId> TreeBuilder::split(NodeId w, Split split) {
    auto l = static_cast<NodeId>(nodes_.size());
    auto r = static_cast<NodeId>(l + 1);
    Node child;
    child.parent = w;
    nodes_.push_back(child);
    nodes_.push_back(child);
    Node& n = nodes_.at(w);
    n.split = std::move(split);
    n.left = l;
    n.right = r;
    n.value.reset();
    return {l, r};
}

void TreeBuilder::set_value(NodeId w, LeafValue value) {
    nodes_.at(w).value = std::move(value);
}

Tree TreeBuilder::build() && {
    return Tree(std::move(schema_), std::move(nodes_), 0);
}

NodeId find_leaf(const Tree& tree, const Point& x) {
    check_point(tree.schema(), x);
    NodeId id = tree.root();
    for (std::size_t steps = 0; steps <= tree.size(); ++steps) {
        const Node& n = tree.node(id);
        if (n.is_leaf()) return id;
        if (!n.split || !n.left || !n.right)
            throw Error(ErrorCode::Validation, "malformed internal node " + std::to_string(id));
        id = route(*n.split, tree.schema(), x) == Side::Left ? *n.left : *n.right;
    }
    throw Error(ErrorCode::Validation, "cycle in tree");
}

const LeafValue& evaluate(const Tree& tree, const Point& x) {
    NodeId id = find_leaf(tree, x);
    const Node& n = tree.node(id);
    if (!n.value) throw Error(ErrorCode::Validation, "leaf without value at node " + std::to_string(id));
    return *n.value;
}

Region node_region(const Tree& tree, NodeId node) {
    std::vector<std::pair<NodeId, Side>> path;
    NodeId id = node;
    tree.node(id);
    while (id != tree.root()) {
        const auto& parent = tree.node(id).parent;
        if (!parent || path.size() > tree.size())
            throw Error(ErrorCode::Validation, "node " + std::to_string(node) + " is not connected to the root");
        const Node& p = tree.node(*parent);
        path.emplace_back(*parent, p.left == id ? Side::Left : Side::Right);
        id = *parent;
    }
    Region region(tree.schema());
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
        const Node& p = tree.node(it->first);
        if (!p.split) throw Error(ErrorCode::Validation, "internal node without split");
        region = region.refine(*p.split, it->second);
    }
    return region;
}

namespace {

void walk_leaves(const Tree& tree, NodeId id, const Region& region,
                 const std::function<void(NodeId, const Region&)>& visit, std::size_t depth) {
    if (depth > tree.size()) throw Error(ErrorCode::Validation, "cycle in tree");
    const Node& n = tree.node(id);
    if (n.is_leaf()) {
        visit(id, region);
        return;
    }
    if (!n.split || !n.left || !n.right)
        throw Error(ErrorCode::Validation, "malformed internal node " + std::to_string(id));
    walk_leaves(tree, *n.left, region.refine(*n.split, Side::Left), visit, depth + 1);
    walk_leaves(tree, *n.right, region.refine(*n.split, Side::Right), visit, depth + 1);
}

std::string format_sum(double s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", s);
    return buf;
}

void check_basic_value(const BasicValue& v, const FeatureSchema& schema, NodeId id,
                       std::vector<Violation>& out) {
    if (const auto* s = std::get_if<Scalar>(&v)) {
        if (!std::isfinite(s->value)) out.push_back({id, "non-finite leaf value"});
        return;
    }
    const auto& probs = std::get<ClassProbs>(v).probs;
    if (schema.class_labels() && probs.size() != schema.class_labels()->size())
        out.push_back({id, "probability vector length does not match class labels"});
    double sum = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0)) {
            out.push_back({id, "negative probability"});
            return;
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        out.push_back({id, "probabilities sum " + format_sum(sum) + " ≠ 1"});
}

} // namespace

void for_each_leaf(const Tree& tree, const std::function<void(NodeId, const Region&)>& visit) {
    walk_leaves(tree, tree.root(), Region(tree.schema()), visit, 0);
}

std::vector<Violation> validate(const Tree& tree) {
    std::vector<Violation> out;
    const auto& nodes = tree.nodes();
    const FeatureSchema& schema = tree.schema();

    if (nodes[tree.root()].parent) out.push_back({tree.root(), "root has a parent"});

    bool structure_ok = true;
    std::optional<ValueKind> kind;
    std::optional<std::size_t> tuple_len;
    for (NodeId id = 0; id < nodes.size(); ++id) {
        const Node& n = nodes[id];
        if (id != tree.root() && !n.parent) {
            out.push_back({id, "node without parent is not the root"});
            structure_ok = false;
        }
        if (n.parent) {
            const Node& p = nodes[*n.parent];
            if (p.left != id && p.right != id) {
                out.push_back({id, "parent does not list node as a child"});
                structure_ok = false;
            }
        }
        for (const auto& child : {n.left, n.right}) {
            if (child && nodes[*child].parent != id) {
                out.push_back({id, "child " + std::to_string(*child) + " does not name node as parent"});
                structure_ok = false;
            }
        }
        if (n.left.has_value() != n.right.has_value()) {
            out.push_back({id, "node has only one child"});
            structure_ok = false;
        }
        if (n.left && n.left == n.right) {
            out.push_back({id, "left and right child coincide"});
            structure_ok = false;
        }
        if (n.is_leaf()) {
            if (n.split) out.push_back({id, "split without children"});
            if (!n.value) {
                out.push_back({id, "leaf without value"});
                continue;
            }
            if (const auto* t = std::get_if<Tuple>(&*n.value)) {
                if (t->values.size() != t->sources.size())
                    out.push_back({id, "tuple values and sources differ in length"});
                std::set<std::size_t> ids(t->sources.begin(), t->sources.end());
                if (ids.size() != t->sources.size()) out.push_back({id, "tuple sources are not unique"});
                for (const BasicValue& b : t->values) {
                    if (value_kind(b) != value_kind(*n.value)) {
                        out.push_back({id, "tuple entries mix value kinds"});
                        break;
                    }
                    check_basic_value(b, schema, id, out);
                }
                if (tuple_len && *tuple_len != t->values.size())
                    out.push_back({id, "tuple length differs between leaves"});
                tuple_len = t->values.size();
            } else {
                check_basic_value(to_basic(*n.value), schema, id, out);
            }
            auto k = value_kind(*n.value);
            if (kind && k != kind) out.push_back({id, "leaf value kinds differ"});
            if (!kind) kind = k;
        } else {
            if (!n.split) {
                out.push_back({id, "internal node without split"});
                structure_ok = false;
            } else if (auto msg = check_split(*n.split, schema); !msg.empty()) {
                out.push_back({id, msg});
                structure_ok = false;
            }
            if (n.value) out.push_back({id, "internal node has a value"});
        }
    }
    if (!structure_ok) return out;

    // Reachability and region checks along the tree.
    std::vector<bool> seen(nodes.size(), false);
    struct Pending {
        NodeId id;
        Region region;
        bool check;  // false below a node already reported
    };
    std::vector<Pending> stack;
    stack.push_back({tree.root(), Region(schema), true});
    while (!stack.empty()) {
        Pending item = std::move(stack.back());
        stack.pop_back();
        NodeId id = item.id;
        if (seen[id]) {
            out.push_back({id, "node reached twice"});
            return out;
        }
        seen[id] = true;
        const Node& n = nodes[id];
        bool check = item.check;
        if (check && is_empty(schema, item.region)) {
            out.push_back({id, "node region is empty"});
            check = false;
        }
        if (n.is_leaf()) continue;
        if (check && split_partitions_region(schema, *n.split, item.region) != PartitionOutcome::SplitsRegion) {
            out.push_back({id, "split does not partition node region"});
            check = false;
        }
        stack.push_back({*n.right, item.region.refine(*n.split, Side::Right), check});
        stack.push_back({*n.left, item.region.refine(*n.split, Side::Left), check});
    }
    for (NodeId id = 0; id < nodes.size(); ++id)
        if (!seen[id]) out.push_back({id, "node unreachable from root"});
    return out;
}

std::string to_string(const Violation& v) {
    if (v.node) return v.message + " at node " + std::to_string(*v.node);
    return v.message;
}

Tree constant_tree(SchemaPtr schema, LeafValue value) {
    TreeBuilder b(std::move(schema));
    b.set_value(b.root(), std::move(value));
    return std::move(b).build();
}

Tree map_leaves(const Tree& tree, const std::function<LeafValue(const LeafValue&)>& f) {
    std::vector<Node> nodes = tree.nodes();
    for (Node& n : nodes)
        if (n.value) n.value = f(*n.value);
    return Tree(tree.schema_ptr(), std::move(nodes), tree.root());
}

} // namespace treealg
