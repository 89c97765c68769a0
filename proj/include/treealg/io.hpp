#pragma once

#include "treealg/geometry.hpp"
#include "treealg/tree.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace treealg {

struct ForestFile {
    SchemaPtr schema;
    std::vector<Tree> trees;
    std::map<std::string, std::string> metadata;
};

std::string schema_to_json(const FeatureSchema& schema);
SchemaPtr schema_from_json(const std::string& text);

/** Canonical single-tree document: {"schema", "nodes", "root"}. */
std::string tree_to_json(const Tree& tree);
Tree tree_from_json(const std::string& text);

/** Canonical forest document: {"schema", "trees", "metadata"}. */
std::string forest_to_json(const ForestFile& forest);
/**
 * Accepts a forest document or a single-tree document. With `validate_trees`
 * every tree must pass `validate`; the first violation is reported as
 * "<message> at tree i node j".
 */
ForestFile forest_from_json(const std::string& text, bool validate_trees = true);

ForestFile load_forest(const std::filesystem::path& path, bool validate_trees = true);
void save_forest(const ForestFile& forest, const std::filesystem::path& path);
void save_tree(const Tree& tree, const std::filesystem::path& path);

/**
 * Flat node-table CSV with header
 *   tree_id,node_id,parent_id,is_left_child,split_feature,split_threshold_or_levels,leaf_value
 * Features are named; level sets and probability vectors are '|'-separated;
 * a class label as leaf value means probability one for that class.
 */
ForestFile import_flat_table(const std::string& csv_text, const SchemaPtr& schema);
ForestFile import_external_forest(const std::filesystem::path& path, const std::string& dialect,
                                  const SchemaPtr& schema);
std::string export_flat_table(const ForestFile& forest);

/** Shortest decimal that parses back to the same double. */
std::string format_double(double x);

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);
std::string matrix_to_csv(const Eigen::MatrixXd& m);
/** One point per row; categorical values by level name. */
std::vector<Point> read_points_csv(const std::filesystem::path& path, const FeatureSchema& schema);
std::vector<double> read_weights_csv(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
/** Writes to a temporary sibling and renames it over `path`. */
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/** 2-D scatter of the first two columns. */
std::string scatter_svg(const Eigen::MatrixXd& coords);

} // namespace treealg
