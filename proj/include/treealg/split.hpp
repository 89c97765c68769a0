#pragma once

#include "treealg/schema.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace treealg {

/** Subset of a categorical feature's levels, stored as a membership mask. */
class LevelSet {
public:
    LevelSet() = default;
    explicit LevelSet(std::size_t num_levels, bool full = false) : mask_(num_levels, full) {}
    static LevelSet of(std::size_t num_levels, std::span<const std::size_t> members);

    std::size_t universe() const { return mask_.size(); }
    bool contains(std::size_t level) const { return level < mask_.size() && mask_[level]; }
    void insert(std::size_t level) { mask_.at(level) = true; }
    std::size_t count() const;
    bool empty() const { return count() == 0; }
    std::vector<std::size_t> members() const;

    LevelSet operator&(const LevelSet& other) const;
    LevelSet complement() const;
    bool is_subset_of(const LevelSet& other) const;

    bool operator==(const LevelSet&) const = default;

private:
    std::vector<bool> mask_;
};

/** "x[feature] <= threshold" routes left. */
struct ThresholdSplit {
    std::size_t feature = 0;
    double threshold = 0.0;
    bool operator==(const ThresholdSplit&) const = default;
};

/** Membership of x[feature] in `left_levels` routes left. */
struct SubsetSplit {
    std::size_t feature = 0;
    LevelSet left_levels;
    bool operator==(const SubsetSplit&) const = default;
};

/** "coeffs . x <= offset" routes left; `coeffs` runs over the schema's
 *  numeric features in schema order. */
struct HyperplaneSplit {
    std::vector<double> coeffs;
    double offset = 0.0;
    bool operator==(const HyperplaneSplit&) const = default;

    /** coeffs . x over the numeric features of a full point. */
    double apply(const FeatureSchema& schema, const Point& x) const;
};

using Split = std::variant<ThresholdSplit, SubsetSplit, HyperplaneSplit>;

enum class Side { Left, Right };

inline Side opposite(Side s) { return s == Side::Left ? Side::Right : Side::Left; }

Side route(const Split& split, const FeatureSchema& schema, const Point& x);

bool is_axis_aligned(const Split& split);

/** Empty when the split is well-formed for `schema`, otherwise a description
 *  of the problem. */
std::string check_split(const Split& split, const FeatureSchema& schema);

} // namespace treealg
