#include "treealg/split.hpp"

#include "treealg/error.hpp"

#include <algorithm>
#include <cmath>

namespace treealg {

LevelSet LevelSet::of(std::size_t num_levels, std::span<const std::size_t> members) {
    LevelSet s(num_levels);
    for (std::size_t m : members) s.insert(m);
    return s;
}

std::size_t LevelSet::count() const {
    return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), true));
}

std::vector<std::size_t> LevelSet::members() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < mask_.size(); ++i)
        if (mask_[i]) out.push_back(i);
    return out;
}

LevelSet LevelSet::operator&(const LevelSet& other) const {
    LevelSet out(mask_.size());
    for (std::size_t i = 0; i < mask_.size(); ++i) out.mask_[i] = mask_[i] && other.contains(i);
    return out;
}

LevelSet LevelSet::complement() const {
    LevelSet out(mask_.size());
    for (std::size_t i = 0; i < mask_.size(); ++i) out.mask_[i] = !mask_[i];
    return out;
}

bool LevelSet::is_subset_of(const LevelSet& other) const {
    for (std::size_t i = 0; i < mask_.size(); ++i)
        if (mask_[i] && !other.contains(i)) return false;
    return true;
}

double HyperplaneSplit::apply(const FeatureSchema& schema, const Point& x) const {
    const auto& numeric = schema.numeric_features();
    double s = 0.0;
    for (std::size_t k = 0; k < coeffs.size() && k < numeric.size(); ++k)
        s += coeffs[k] * x[numeric[k]];
    return s;
}

Side route(const Split& split, const FeatureSchema& schema, const Point& x) {
    return std::visit(
        [&](const auto& s) -> Side {
            using S = std::decay_t<decltype(s)>;
            bool left;
            if constexpr (std::is_same_v<S, ThresholdSplit>) {
                left = x[s.feature] <= s.threshold;
            } else if constexpr (std::is_same_v<S, SubsetSplit>) {
                left = s.left_levels.contains(static_cast<std::size_t>(x[s.feature]));
            } else {
                left = s.apply(schema, x) <= s.offset;
            }
            return left ? Side::Left : Side::Right;
        },
        split);
}

bool is_axis_aligned(const Split& split) {
    return !std::holds_alternative<HyperplaneSplit>(split);
}

std::string check_split(const Split& split, const FeatureSchema& schema) {
    return std::visit(
        [&](const auto& s) -> std::string {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, ThresholdSplit>) {
                if (s.feature >= schema.size()) return "split feature index out of range";
                if (!schema[s.feature].is_numeric()) return "threshold split on categorical feature";
                if (!std::isfinite(s.threshold)) return "non-finite threshold";
                return {};
            } else if constexpr (std::is_same_v<S, SubsetSplit>) {
                if (s.feature >= schema.size()) return "split feature index out of range";
                if (schema[s.feature].is_numeric()) return "subset split on numeric feature";
                if (s.left_levels.universe() != schema[s.feature].num_levels())
                    return "level set size does not match feature";
                std::size_t n = s.left_levels.count();
                if (n == 0 || n == s.left_levels.universe())
                    return "left levels must be a proper non-empty subset";
                return {};
            } else {
                if (s.coeffs.size() != schema.numeric_features().size())
                    return "hyperplane needs one coefficient per numeric feature";
                bool nonzero = false;
                for (double c : s.coeffs) {
                    if (!std::isfinite(c)) return "non-finite hyperplane coefficient";
                    nonzero = nonzero || c != 0.0;
                }
                if (!nonzero) return "hyperplane coefficients are all zero";
                if (!std::isfinite(s.offset)) return "non-finite hyperplane offset";
                return {};
            }
        },
        split);
}

} // namespace treealg
