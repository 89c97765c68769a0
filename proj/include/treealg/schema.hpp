#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace treealg {

/** Closed numeric range [low, high] of a continuous feature. */
struct NumericRange {
    double low = 0.0;
    double high = 1.0;
    bool operator==(const NumericRange&) const = default;
};

/** Finite, ordered set of levels of a categorical feature. */
struct CategoricalLevels {
    std::vector<std::string> levels;
    bool operator==(const CategoricalLevels&) const = default;
};

struct Feature {
    std::string name;
    std::variant<NumericRange, CategoricalLevels> kind;

    bool is_numeric() const { return std::holds_alternative<NumericRange>(kind); }
    const NumericRange& range() const { return std::get<NumericRange>(kind); }
    const CategoricalLevels& categorical() const { return std::get<CategoricalLevels>(kind); }
    /** Number of levels; 0 for numeric features. */
    std::size_t num_levels() const {
        return is_numeric() ? 0 : categorical().levels.size();
    }
    bool operator==(const Feature&) const = default;
};

/**
 * The domain shared by a set of trees: an ordered list of features plus the
 * optional class labels of classification trees. Construction validates the
 * bounds, level lists and name uniqueness.
 */
class FeatureSchema {
public:
    FeatureSchema(std::vector<Feature> features,
                  std::optional<std::vector<std::string>> class_labels = std::nullopt);

    std::size_t size() const { return features_.size(); }
    const Feature& operator[](std::size_t i) const { return features_.at(i); }
    const std::vector<Feature>& features() const { return features_; }
    const std::optional<std::vector<std::string>>& class_labels() const { return class_labels_; }

    /** Schema positions of the numeric features, in order. Hyperplane
     *  coefficients are indexed by position in this list. */
    const std::vector<std::size_t>& numeric_features() const { return numeric_; }

    std::optional<std::size_t> find(const std::string& name) const;

    bool operator==(const FeatureSchema& other) const {
        return features_ == other.features_ && class_labels_ == other.class_labels_;
    }

private:
    std::vector<Feature> features_;
    std::optional<std::vector<std::string>> class_labels_;
    std::vector<std::size_t> numeric_;
};

using SchemaPtr = std::shared_ptr<const FeatureSchema>;

/** A point of the domain: numeric features hold their value, categorical
 *  features hold the level index. */
using Point = std::vector<double>;

/** Throws a Domain error unless `x` has the schema's arity and lies in the domain. */
void check_point(const FeatureSchema& schema, const Point& x);

} // namespace treealg
