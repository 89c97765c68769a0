#include "treealg/region.hpp"

#include "treealg/error.hpp"

namespace treealg {

Interval Interval::clip_at_or_below(double t) const {
    Interval out = *this;
    if (t < high) {
        out.high = t;
        out.high_closed = true;
    }
    return out;
}

Interval Interval::clip_above(double t) const {
    Interval out = *this;
    if (t > low) {
        out.low = t;
        out.low_closed = false;
    } else if (t == low) {
        out.low_closed = false;
    }
    return out;
}

bool Interval::is_subset_of(const Interval& other) const {
    if (empty()) return true;
    bool low_ok = low > other.low || (low == other.low && (other.low_closed || !low_closed));
    bool high_ok = high < other.high || (high == other.high && (other.high_closed || !high_closed));
    return low_ok && high_ok;
}

Region::Region(const FeatureSchema& schema) {
    constraints_.reserve(schema.size());
    for (const Feature& f : schema.features()) {
        if (f.is_numeric())
            constraints_.emplace_back(Interval{f.range().low, true, f.range().high, true});
        else
            constraints_.emplace_back(LevelSet(f.num_levels(), true));
    }
}

void Region::set_interval(std::size_t feature, const Interval& iv) {
    if (!std::holds_alternative<Interval>(constraints_.at(feature)))
        throw Error(ErrorCode::KindMismatch, "feature is not numeric");
    constraints_[feature] = iv;
}

void Region::set_levels(std::size_t feature, const LevelSet& levels) {
    if (!std::holds_alternative<LevelSet>(constraints_.at(feature)))
        throw Error(ErrorCode::KindMismatch, "feature is not categorical");
    constraints_[feature] = levels;
}

Region Region::refine(const Split& split, Side side) const {
    Region out = *this;
    std::visit(
        [&](const auto& s) {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, ThresholdSplit>) {
                if (s.feature >= constraints_.size() ||
                    !std::holds_alternative<Interval>(constraints_[s.feature]))
                    throw Error(ErrorCode::KindMismatch, "threshold split on a non-numeric feature");
                const Interval& iv = interval(s.feature);
                out.constraints_[s.feature] =
                    side == Side::Left ? iv.clip_at_or_below(s.threshold) : iv.clip_above(s.threshold);
            } else if constexpr (std::is_same_v<S, SubsetSplit>) {
                if (s.feature >= constraints_.size() ||
                    !std::holds_alternative<LevelSet>(constraints_[s.feature]))
                    throw Error(ErrorCode::KindMismatch, "subset split on a non-categorical feature");
                const LevelSet& adm = levels(s.feature);
                out.constraints_[s.feature] =
                    side == Side::Left ? adm & s.left_levels : adm & s.left_levels.complement();
            } else {
                out.half_spaces_.push_back(HalfSpace{s, side});
            }
        },
        split);
    return out;
}

bool Region::axis_empty() const {
    for (const auto& c : constraints_) {
        if (const auto* iv = std::get_if<Interval>(&c)) {
            if (iv->empty()) return true;
        } else if (std::get<LevelSet>(c).empty()) {
            return true;
        }
    }
    return false;
}

bool Region::contains(const FeatureSchema& schema, const Point& x) const {
    if (x.size() != constraints_.size()) return false;
    for (std::size_t i = 0; i < constraints_.size(); ++i) {
        if (const auto* iv = std::get_if<Interval>(&constraints_[i])) {
            if (!iv->contains(x[i])) return false;
        } else if (!std::get<LevelSet>(constraints_[i]).contains(static_cast<std::size_t>(x[i]))) {
            return false;
        }
    }
    for (const HalfSpace& h : half_spaces_) {
        bool left = h.plane.apply(schema, x) <= h.plane.offset;
        if (left != (h.side == Side::Left)) return false;
    }
    return true;
}

} // namespace treealg
