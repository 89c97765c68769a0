#include "treealg/io.hpp"

#include "treealg/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>

namespace treealg {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void parse_fail(const std::string& msg) { throw Error(ErrorCode::Parse, msg); }

json parse_text(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        // Translate the byte offset into a line and column.
        std::size_t line = 1;
        std::size_t col = 1;
        std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < end; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        parse_fail("JSON parse error at line " + std::to_string(line) + " column " + std::to_string(col));
    }
}

const json& member(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) parse_fail(std::string("missing field '") + key + "'");
    return j.at(key);
}

double number(const json& j, const char* what) {
    if (!j.is_number()) parse_fail(std::string("field '") + what + "' must be a number");
    return j.get<double>();
}

std::size_t index(const json& j, const char* what) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
        parse_fail(std::string("field '") + what + "' must be a non-negative integer");
    return j.get<std::size_t>();
}

std::string string_of(const json& j, const char* what) {
    if (!j.is_string()) parse_fail(std::string("field '") + what + "' must be a string");
    return j.get<std::string>();
}

json schema_json(const FeatureSchema& schema) {
    json features = json::array();
    for (const Feature& f : schema.features()) {
        json o;
        o["name"] = f.name;
        if (f.is_numeric()) {
            o["kind"] = "numeric";
            o["low"] = f.range().low;
            o["high"] = f.range().high;
        } else {
            o["kind"] = "categorical";
            o["levels"] = f.categorical().levels;
        }
        features.push_back(std::move(o));
    }
    json out;
    out["features"] = std::move(features);
    out["class_labels"] = schema.class_labels() ? json(*schema.class_labels()) : json(nullptr);
    return out;
}

SchemaPtr schema_of(const json& j) {
    const json& fs = member(j, "features");
    if (!fs.is_array()) parse_fail("field 'features' must be an array");
    std::vector<Feature> features;
    for (const json& f : fs) {
        std::string name = string_of(member(f, "name"), "name");
        std::string kind = string_of(member(f, "kind"), "kind");
        if (kind == "numeric") {
            features.push_back({name, NumericRange{number(member(f, "low"), "low"), number(member(f, "high"), "high")}});
        } else if (kind == "categorical") {
            CategoricalLevels c;
            for (const json& l : member(f, "levels")) c.levels.push_back(string_of(l, "levels"));
            features.push_back({name, c});
        } else {
            parse_fail("unknown feature kind '" + kind + "'");
        }
    }
    std::optional<std::vector<std::string>> labels;
    if (j.contains("class_labels") && !j.at("class_labels").is_null()) {
        labels.emplace();
        for (const json& l : j.at("class_labels")) labels->push_back(string_of(l, "class_labels"));
    }
    try {
        return std::make_shared<const FeatureSchema>(std::move(features), std::move(labels));
    } catch (const Error& e) {
        throw Error(ErrorCode::Validation, std::string("invalid schema: ") + e.what());
    }
}

json split_json(const Split& split) {
    json o;
    if (const auto* t = std::get_if<ThresholdSplit>(&split)) {
        o["type"] = "numeric";
        o["feature"] = t->feature;
        o["threshold"] = t->threshold;
    } else if (const auto* s = std::get_if<SubsetSplit>(&split)) {
        o["type"] = "categorical";
        o["feature"] = s->feature;
        o["left_levels"] = s->left_levels.members();
    } else {
        const auto& h = std::get<HyperplaneSplit>(split);
        o["type"] = "hyperplane";
        o["coeffs"] = h.coeffs;
        o["offset"] = h.offset;
    }
    return o;
}

Split split_of(const json& j, const FeatureSchema& schema) {
    std::string type = string_of(member(j, "type"), "type");
    if (type == "numeric") return ThresholdSplit{index(member(j, "feature"), "feature"), number(member(j, "threshold"), "threshold")};
    if (type == "categorical") {
        std::size_t f = index(member(j, "feature"), "feature");
        std::size_t n = f < schema.size() ? schema[f].num_levels() : 0;
        std::vector<std::size_t> levels;
        for (const json& l : member(j, "left_levels")) {
            std::size_t level = index(l, "left_levels");
            if (level >= n) throw Error(ErrorCode::Validation, "categorical split level " + std::to_string(level) + " out of range");
            levels.push_back(level);
        }
        return SubsetSplit{f, LevelSet::of(n, levels)};
    }
    if (type == "hyperplane") {
        HyperplaneSplit h;
        for (const json& c : member(j, "coeffs")) h.coeffs.push_back(number(c, "coeffs"));
        h.offset = number(member(j, "offset"), "offset");
        return h;
    }
    parse_fail("unknown split type '" + type + "'");
}

json basic_json(const BasicValue& v) {
    json o;
    if (const auto* s = std::get_if<Scalar>(&v)) {
        o["type"] = "scalar";
        o["v"] = s->value;
    } else {
        o["type"] = "probs";
        o["p"] = std::get<ClassProbs>(v).probs;
    }
    return o;
}

json value_json(const LeafValue& v) {
    if (const auto* t = std::get_if<Tuple>(&v)) {
        json o;
        o["type"] = "tuple";
        json values = json::array();
        for (const BasicValue& b : t->values) values.push_back(basic_json(b));
        o["values"] = std::move(values);
        o["sources"] = t->sources;
        return o;
    }
    return basic_json(to_basic(v));
}

LeafValue value_of(const json& j) {
    std::string type = string_of(member(j, "type"), "type");
    if (type == "scalar") return Scalar{number(member(j, "v"), "v")};
    if (type == "probs") {
        ClassProbs p;
        for (const json& x : member(j, "p")) p.probs.push_back(number(x, "p"));
        return p;
    }
    if (type == "tuple") {
        Tuple t;
        for (const json& x : member(j, "values")) {
            LeafValue v = value_of(x);
            if (std::holds_alternative<Tuple>(v)) parse_fail("nested tuple values are not allowed");
            t.values.push_back(to_basic(v));
        }
        for (const json& s : member(j, "sources")) t.sources.push_back(index(s, "sources"));
        return t;
    }
    parse_fail("unknown value type '" + type + "'");
}

json nodes_json(const Tree& tree) {
    json nodes = json::array();
    for (std::size_t i = 0; i < tree.size(); ++i) {
        const Node& n = tree.node(static_cast<NodeId>(i));
        json o;
        o["id"] = i;
        if (n.split) o["split"] = split_json(*n.split);
        if (n.left) o["left"] = *n.left;
        if (n.right) o["right"] = *n.right;
        if (n.value) o["value"] = value_json(*n.value);
        nodes.push_back(std::move(o));
    }
    return nodes;
}

Tree tree_of(const json& j, const SchemaPtr& schema) {
    const json& ns = member(j, "nodes");
    if (!ns.is_array() || ns.empty()) parse_fail("field 'nodes' must be a non-empty array");
    std::vector<Node> nodes(ns.size());
    std::vector<bool> seen(ns.size(), false);
    for (const json& o : ns) {
        std::size_t id = index(member(o, "id"), "id");
        if (id >= nodes.size()) throw Error(ErrorCode::Validation, "node id " + std::to_string(id) + " out of range");
        if (seen[id]) throw Error(ErrorCode::Validation, "duplicate node id " + std::to_string(id));
        seen[id] = true;
        Node& n = nodes[id];
        if (o.contains("split")) n.split = split_of(o.at("split"), *schema);
        if (o.contains("left")) n.left = static_cast<NodeId>(index(o.at("left"), "left"));
        if (o.contains("right")) n.right = static_cast<NodeId>(index(o.at("right"), "right"));
        if (o.contains("value")) n.value = value_of(o.at("value"));
    }
    for (std::size_t id = 0; id < nodes.size(); ++id) {
        for (std::optional<NodeId> c : {nodes[id].left, nodes[id].right}) {
            if (!c) continue;
            if (*c >= nodes.size()) throw Error(ErrorCode::Validation, "child id " + std::to_string(*c) + " out of range at node " + std::to_string(id));
            if (nodes[*c].parent) throw Error(ErrorCode::Validation, "node " + std::to_string(*c) + " has two parents");
            nodes[*c].parent = static_cast<NodeId>(id);
        }
    }
    std::size_t root = index(member(j, "root"), "root");
    if (root >= nodes.size()) throw Error(ErrorCode::Validation, "root id out of range");
    return Tree(schema, std::move(nodes), static_cast<NodeId>(root));
}

void check_forest(const ForestFile& forest) {
    std::optional<ValueKind> kind;
    for (std::size_t i = 0; i < forest.trees.size(); ++i) {
        auto violations = validate(forest.trees[i]);
        if (!violations.empty()) {
            const Violation& v = violations.front();
            std::string where = " at tree " + std::to_string(i);
            if (v.node) where += " node " + std::to_string(*v.node);
            throw Error(ErrorCode::Validation, v.message + where);
        }
        auto k = forest.trees[i].leaf_kind();
        if (kind && k && *k != *kind)
            throw Error(ErrorCode::Validation, "leaf value kinds differ across trees at tree " + std::to_string(i));
        if (!kind) kind = k;
    }
}

std::vector<std::string> split_on(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(std::string s) {
    auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
    while (!s.empty() && ws(static_cast<unsigned char>(s.back()))) s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && ws(static_cast<unsigned char>(s[i]))) ++i;
    return s.substr(i);
}

std::optional<double> parse_double(const std::string& s) {
    std::string t = trim(s);
    if (t.empty()) return std::nullopt;
    double v = 0.0;
    const char* first = t.data();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::optional<long long> parse_int(const std::string& s) {
    std::string t = trim(s);
    long long v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) return std::nullopt;
    return v;
}

/** Non-empty lines of a CSV text, each split on commas. */
std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        auto cells = split_on(line, ',');
        for (auto& c : cells) c = trim(c);
        rows.push_back(std::move(cells));
    }
    return rows;
}

std::size_t level_index(const Feature& f, const std::string& name) {
    const auto& levels = f.categorical().levels;
    auto it = std::find(levels.begin(), levels.end(), name);
    if (it == levels.end()) throw Error(ErrorCode::Parse, "unknown level '" + name + "' of feature '" + f.name + "'");
    return static_cast<std::size_t>(it - levels.begin());
}

const std::vector<std::string> kFlatColumns = {"tree_id", "node_id", "parent_id", "is_left_child",
                                               "split_feature", "split_threshold_or_levels", "leaf_value"};

} // namespace

std::string schema_to_json(const FeatureSchema& schema) { return schema_json(schema).dump(2) + "\n"; }

SchemaPtr schema_from_json(const std::string& text) {
    json j = parse_text(text);
    // A whole tree or forest document is accepted as well.
    if (j.is_object() && j.contains("schema")) return schema_of(j.at("schema"));
    return schema_of(j);
}

std::string tree_to_json(const Tree& tree) {
    json doc;
    doc["schema"] = schema_json(tree.schema());
    doc["nodes"] = nodes_json(tree);
    doc["root"] = tree.root();
    return doc.dump(2) + "\n";
}

Tree tree_from_json(const std::string& text) {
    ForestFile f = forest_from_json(text);
    if (f.trees.size() != 1)
        throw Error(ErrorCode::InvalidArgument, "expected one tree, found " + std::to_string(f.trees.size()));
    return std::move(f.trees.front());
}

std::string forest_to_json(const ForestFile& forest) {
    json doc;
    doc["schema"] = schema_json(*forest.schema);
    json trees = json::array();
    for (const Tree& t : forest.trees) {
        if (!(t.schema() == *forest.schema)) throw Error(ErrorCode::SchemaMismatch, "tree schema differs from forest schema");
        json o;
        o["nodes"] = nodes_json(t);
        o["root"] = t.root();
        trees.push_back(std::move(o));
    }
    doc["trees"] = std::move(trees);
    json meta = json::object();
    for (const auto& [k, v] : forest.metadata) meta[k] = v;
    doc["metadata"] = std::move(meta);
    return doc.dump(2) + "\n";
}

ForestFile forest_from_json(const std::string& text, bool validate_trees) {
    json doc = parse_text(text);
    ForestFile out;
    out.schema = schema_of(member(doc, "schema"));
    if (doc.contains("trees")) {
        const json& trees = doc.at("trees");
        if (!trees.is_array()) parse_fail("field 'trees' must be an array");
        for (std::size_t i = 0; i < trees.size(); ++i) {
            const json& t = trees[i];
            if (t.contains("schema") && !(*schema_of(t.at("schema")) == *out.schema))
                throw Error(ErrorCode::SchemaMismatch, "schema of tree " + std::to_string(i) + " differs from the forest schema");
            try {
                out.trees.push_back(tree_of(t, out.schema));
            } catch (const Error& e) {
                throw Error(e.code(), std::string(e.what()) + " in tree " + std::to_string(i));
            }
        }
        if (doc.contains("metadata")) {
            for (const auto& [k, v] : doc.at("metadata").items())
                out.metadata[k] = v.is_string() ? v.get<std::string>() : v.dump();
        }
    } else {
        out.trees.push_back(tree_of(doc, out.schema));
    }
    if (validate_trees) check_forest(out);
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw Error(ErrorCode::Io, "cannot read '" + path.string() + "'");
    return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    std::random_device rd;
    std::filesystem::path tmp = path;
    tmp += ".tmp" + std::to_string(rd());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::Io, "cannot write '" + tmp.string() + "'");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) {
            out.close();
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw Error(ErrorCode::Io, "cannot write '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error(ErrorCode::Io, "cannot replace '" + path.string() + "'");
    }
}

ForestFile load_forest(const std::filesystem::path& path, bool validate_trees) {
    return forest_from_json(read_file(path), validate_trees);
}

void save_forest(const ForestFile& forest, const std::filesystem::path& path) {
    write_file_atomic(path, forest_to_json(forest));
}

void save_tree(const Tree& tree, const std::filesystem::path& path) { write_file_atomic(path, tree_to_json(tree)); }

ForestFile import_flat_table(const std::string& csv_text, const SchemaPtr& schema) {
    auto rows = csv_rows(csv_text);
    if (rows.empty()) throw Error(ErrorCode::Parse, "flat table is empty");
    const auto& header = rows.front();
    std::vector<std::optional<std::size_t>> column(kFlatColumns.size());
    std::vector<std::size_t> unknown;
    for (std::size_t c = 0; c < header.size(); ++c) {
        auto it = std::find(kFlatColumns.begin(), kFlatColumns.end(), header[c]);
        if (it == kFlatColumns.end()) {
            unknown.push_back(c);
        } else {
            column[static_cast<std::size_t>(it - kFlatColumns.begin())] = c;
        }
    }
    for (std::size_t k = 0; k < kFlatColumns.size(); ++k)
        if (!column[k]) throw Error(ErrorCode::Parse, "flat table lacks column '" + kFlatColumns[k] + "'");

    struct Row {
        long long node_id;
        std::optional<long long> parent;
        bool is_left;
        std::string feature;
        std::string split;
        std::string leaf;
    };
    std::map<long long, std::map<long long, Row>> tables;
    std::vector<long long> tree_order;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != header.size())
            throw Error(ErrorCode::Parse, "row " + std::to_string(r + 1) + " has " + std::to_string(row.size()) + " cells, expected " + std::to_string(header.size()));
        auto cell = [&](std::size_t k) -> const std::string& { return row[*column[k]]; };
        auto tree_id = parse_int(cell(0));
        auto node_id = parse_int(cell(1));
        if (!tree_id || !node_id) throw Error(ErrorCode::Parse, "row " + std::to_string(r + 1) + ": tree_id and node_id must be integers");
        std::string where = " at tree_id=" + cell(0) + " node_id=" + cell(1);
        for (std::size_t c : unknown)
            if (!row[c].empty()) throw Error(ErrorCode::Validation, "unsupported construct '" + header[c] + "'" + where);
        Row parsed{*node_id, std::nullopt, false, cell(4), cell(5), cell(6)};
        if (!cell(2).empty() && cell(2) != "-1") {
            parsed.parent = parse_int(cell(2));
            if (!parsed.parent) throw Error(ErrorCode::Parse, "bad parent_id" + where);
            const std::string& side = cell(3);
            if (side == "1" || side == "true" || side == "TRUE") {
                parsed.is_left = true;
            } else if (side != "0" && side != "false" && side != "FALSE") {
                throw Error(ErrorCode::Parse, "bad is_left_child" + where);
            }
        }
        if (!tables.count(*tree_id)) tree_order.push_back(*tree_id);
        auto& table = tables[*tree_id];
        if (table.count(*node_id)) throw Error(ErrorCode::Validation, "duplicate node" + where);
        table.emplace(*node_id, std::move(parsed));
    }

    ForestFile out;
    out.schema = schema;
    out.metadata["source"] = "flat-table";
    std::sort(tree_order.begin(), tree_order.end());
    for (long long tid : tree_order) {
        const auto& table = tables.at(tid);
        auto where = [&](long long nid) {
            return " at tree_id=" + std::to_string(tid) + " node_id=" + std::to_string(nid);
        };
        struct Children {
            long long left = -1;
            long long right = -1;
        };
        std::map<long long, Children> children;
        std::optional<long long> root;
        for (const auto& [nid, row] : table) {
            if (!row.parent) {
                if (root) throw Error(ErrorCode::Validation, "second root node" + where(nid));
                root = nid;
                continue;
            }
            if (!table.count(*row.parent)) throw Error(ErrorCode::Validation, "orphan node" + where(nid));
            long long& slot = row.is_left ? children[*row.parent].left : children[*row.parent].right;
            if (slot >= 0) throw Error(ErrorCode::Validation, "node has two " + std::string(row.is_left ? "left" : "right") + " children" + where(*row.parent));
            slot = nid;
        }
        if (!root) throw Error(ErrorCode::Validation, "no root node at tree_id=" + std::to_string(tid));

        // Renumber in pre-order from the root; unreached rows are orphans.
        std::vector<Node> nodes;
        std::set<long long> reached;
        std::function<NodeId(long long, std::optional<NodeId>)> visit = [&](long long nid, std::optional<NodeId> parent) {
            reached.insert(nid);
            const Row& row = table.at(nid);
            NodeId id = static_cast<NodeId>(nodes.size());
            nodes.emplace_back();
            nodes[id].parent = parent;
            auto found = children.find(nid);
            Children kids = found == children.end() ? Children{} : found->second;
            if (!row.feature.empty()) {
                auto f = schema->find(row.feature);
                if (!f) throw Error(ErrorCode::Validation, "unknown feature '" + row.feature + "'" + where(nid));
                const Feature& feat = (*schema)[*f];
                if (row.split.empty() || row.split == "NA")
                    throw Error(ErrorCode::Validation, "unsupported construct 'missing-value default'" + where(nid));
                if (feat.is_numeric()) {
                    auto t = parse_double(row.split);
                    if (!t) throw Error(ErrorCode::Parse, "bad threshold '" + row.split + "'" + where(nid));
                    nodes[id].split = ThresholdSplit{*f, *t};
                } else {
                    LevelSet left(feat.num_levels());
                    for (const std::string& name : split_on(row.split, '|')) left.insert(level_index(feat, trim(name)));
                    nodes[id].split = SubsetSplit{*f, left};
                }
                if (kids.left < 0 || kids.right < 0) throw Error(ErrorCode::Validation, "split node lacks a child" + where(nid));
            } else if (kids.left >= 0 || kids.right >= 0) {
                throw Error(ErrorCode::Validation, "node with children has no split" + where(nid));
            }
            if (!row.leaf.empty()) {
                if (nodes[id].split) throw Error(ErrorCode::Validation, "internal node has a leaf value" + where(nid));
                const auto& labels = schema->class_labels();
                if (labels) {
                    std::vector<double> p(labels->size(), 0.0);
                    auto it = std::find(labels->begin(), labels->end(), row.leaf);
                    if (it != labels->end()) {
                        p[static_cast<std::size_t>(it - labels->begin())] = 1.0;
                    } else {
                        auto parts = split_on(row.leaf, '|');
                        if (parts.size() != labels->size()) throw Error(ErrorCode::Validation, "leaf value '" + row.leaf + "' is neither a class label nor a probability vector" + where(nid));
                        for (std::size_t k = 0; k < parts.size(); ++k) {
                            auto v = parse_double(parts[k]);
                            if (!v) throw Error(ErrorCode::Parse, "bad probability '" + parts[k] + "'" + where(nid));
                            p[k] = *v;
                        }
                    }
                    nodes[id].value = ClassProbs{p};
                } else {
                    auto v = parse_double(row.leaf);
                    if (!v) throw Error(ErrorCode::Parse, "bad leaf value '" + row.leaf + "'" + where(nid));
                    nodes[id].value = Scalar{*v};
                }
            }
            if (nodes[id].split) {
                NodeId l = visit(kids.left, id);
                NodeId r = visit(kids.right, id);
                nodes[id].left = l;
                nodes[id].right = r;
            }
            return id;
        };
        visit(*root, std::nullopt);
        for (const auto& [nid, row] : table)
            if (!reached.count(nid)) throw Error(ErrorCode::Validation, "orphan node" + where(nid));
        out.trees.emplace_back(schema, std::move(nodes), 0);
    }
    check_forest(out);
    return out;
}

ForestFile import_external_forest(const std::filesystem::path& path, const std::string& dialect,
                                  const SchemaPtr& schema) {
    if (dialect != "flat-table") throw Error(ErrorCode::InvalidArgument, "unknown dialect '" + dialect + "'");
    return import_flat_table(read_file(path), schema);
}

std::string export_flat_table(const ForestFile& forest) {
    const FeatureSchema& schema = *forest.schema;
    std::ostringstream out;
    for (std::size_t k = 0; k < kFlatColumns.size(); ++k) out << (k ? "," : "") << kFlatColumns[k];
    out << '\n';
    for (std::size_t t = 0; t < forest.trees.size(); ++t) {
        const Tree& tree = forest.trees[t];
        std::vector<NodeId> stack{tree.root()};
        while (!stack.empty()) {
            NodeId id = stack.back();
            stack.pop_back();
            const Node& n = tree.node(id);
            out << t << ',' << id << ',';
            if (n.parent) out << *n.parent << ',' << (tree.node(*n.parent).left == id ? 1 : 0);
            else out << ',';
            out << ',';
            if (n.split) {
                if (const auto* s = std::get_if<ThresholdSplit>(&*n.split)) {
                    out << schema[s->feature].name << ',' << format_double(s->threshold);
                } else if (const auto* c = std::get_if<SubsetSplit>(&*n.split)) {
                    out << schema[c->feature].name << ',';
                    bool first = true;
                    for (std::size_t l : c->left_levels.members()) {
                        out << (first ? "" : "|") << schema[c->feature].categorical().levels[l];
                        first = false;
                    }
                } else {
                    throw Error(ErrorCode::UnsupportedGeometry, "hyperplane splits have no flat-table form");
                }
            } else {
                out << ',';
            }
            out << ',';
            if (n.value) {
                if (const auto* s = std::get_if<Scalar>(&*n.value)) {
                    out << format_double(s->value);
                } else if (const auto* p = std::get_if<ClassProbs>(&*n.value)) {
                    for (std::size_t k = 0; k < p->probs.size(); ++k) out << (k ? "|" : "") << format_double(p->probs[k]);
                } else {
                    throw Error(ErrorCode::KindMismatch, "tuple leaves have no flat-table form");
                }
            }
            out << '\n';
            if (n.right) stack.push_back(*n.right);
            if (n.left) stack.push_back(*n.left);
        }
    }
    return out.str();
}

std::string format_double(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc()) throw Error(ErrorCode::InvalidArgument, "cannot format number");
    return std::string(buf, ptr);
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
    auto rows = csv_rows(read_file(path));
    if (rows.empty()) throw Error(ErrorCode::Parse, "matrix file '" + path.string() + "' is empty");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows.front().size())
            throw Error(ErrorCode::Parse, "matrix row " + std::to_string(r + 1) + " has a different length");
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            auto v = parse_double(rows[r][c]);
            if (!v) throw Error(ErrorCode::Parse, "bad number '" + rows[r][c] + "' at row " + std::to_string(r + 1) + " column " + std::to_string(c + 1));
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = *v;
        }
    }
    return m;
}

std::string matrix_to_csv(const Eigen::MatrixXd& m) {
    std::string out;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c) out += ',';
            out += format_double(m(r, c));
        }
        out += '\n';
    }
    return out;
}

std::vector<Point> read_points_csv(const std::filesystem::path& path, const FeatureSchema& schema) {
    auto rows = csv_rows(read_file(path));
    std::size_t start = 0;
    if (!rows.empty()) {
        bool header = rows.front().size() == schema.size();
        for (std::size_t f = 0; header && f < schema.size(); ++f) header = rows.front()[f] == schema[f].name;
        if (header) start = 1;
    }
    std::vector<Point> points;
    for (std::size_t r = start; r < rows.size(); ++r) {
        if (rows[r].size() != schema.size())
            throw Error(ErrorCode::Parse, "point row " + std::to_string(r + 1) + " has " + std::to_string(rows[r].size()) + " values, expected " + std::to_string(schema.size()));
        Point x(schema.size());
        for (std::size_t f = 0; f < schema.size(); ++f) {
            if (schema[f].is_numeric()) {
                auto v = parse_double(rows[r][f]);
                if (!v) throw Error(ErrorCode::Parse, "bad number '" + rows[r][f] + "' at point row " + std::to_string(r + 1));
                x[f] = *v;
            } else {
                x[f] = static_cast<double>(level_index(schema[f], rows[r][f]));
            }
        }
        points.push_back(std::move(x));
    }
    if (points.empty()) throw Error(ErrorCode::Parse, "no points in '" + path.string() + "'");
    return points;
}

std::vector<double> read_weights_csv(const std::filesystem::path& path) {
    std::vector<double> w;
    for (const auto& row : csv_rows(read_file(path))) {
        for (const std::string& cell : row) {
            auto v = parse_double(cell);
            if (!v) throw Error(ErrorCode::Parse, "bad weight '" + cell + "'");
            w.push_back(*v);
        }
    }
    if (w.empty()) throw Error(ErrorCode::Parse, "no weights in '" + path.string() + "'");
    return w;
}

std::string scatter_svg(const Eigen::MatrixXd& coords) {
    constexpr double size = 480.0;
    constexpr double margin = 24.0;
    auto column = [&](Eigen::Index c) -> Eigen::VectorXd {
        return c < coords.cols() ? Eigen::VectorXd(coords.col(c)) : Eigen::VectorXd::Zero(coords.rows());
    };
    Eigen::VectorXd x = column(0);
    Eigen::VectorXd y = column(1);
    auto scale = [&](const Eigen::VectorXd& v, double value, bool flip) {
        double lo = v.size() ? v.minCoeff() : 0.0;
        double hi = v.size() ? v.maxCoeff() : 0.0;
        double t = hi > lo ? (value - lo) / (hi - lo) : 0.5;
        if (flip) t = 1.0 - t;
        return margin + t * (size - 2 * margin);
    };
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
        << "\" viewBox=\"0 0 " << size << ' ' << size << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (Eigen::Index i = 0; i < coords.rows(); ++i) {
        out << "<circle cx=\"" << format_double(scale(x, x(i), false)) << "\" cy=\""
            << format_double(scale(y, y(i), true)) << "\" r=\"4\" fill=\"steelblue\"><title>" << i
            << "</title></circle>\n";
    }
    out << "</svg>\n";
    return out.str();
}

} // namespace treealg
