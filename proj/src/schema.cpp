#include "treealg/schema.hpp"

#include "treealg/error.hpp"

#include <cmath>
#include <set>

namespace treealg {

FeatureSchema::FeatureSchema(std::vector<Feature> features,
                             std::optional<std::vector<std::string>> class_labels)
    : features_(std::move(features)), class_labels_(std::move(class_labels)) {
    std::set<std::string> names;
    for (std::size_t i = 0; i < features_.size(); ++i) {
        const Feature& f = features_[i];
        if (!names.insert(f.name).second)
            throw Error(ErrorCode::InvalidArgument, "duplicate feature name '" + f.name + "'");
        if (f.is_numeric()) {
            const NumericRange& r = f.range();
            if (!std::isfinite(r.low) || !std::isfinite(r.high) || !(r.low < r.high))
                throw Error(ErrorCode::InvalidArgument,
                            "feature '" + f.name + "' needs finite bounds with low < high");
            numeric_.push_back(i);
        } else {
            const auto& levels = f.categorical().levels;
            if (levels.empty())
                throw Error(ErrorCode::InvalidArgument, "feature '" + f.name + "' has no levels");
            std::set<std::string> seen(levels.begin(), levels.end());
            if (seen.size() != levels.size())
                throw Error(ErrorCode::InvalidArgument, "feature '" + f.name + "' has duplicate levels");
        }
    }
    if (class_labels_) {
        std::set<std::string> seen(class_labels_->begin(), class_labels_->end());
        if (class_labels_->empty() || seen.size() != class_labels_->size())
            throw Error(ErrorCode::InvalidArgument, "class labels must be non-empty and unique");
    }
}

std::optional<std::size_t> FeatureSchema::find(const std::string& name) const {
    for (std::size_t i = 0; i < features_.size(); ++i)
        if (features_[i].name == name) return i;
    return std::nullopt;
}

void check_point(const FeatureSchema& schema, const Point& x) {
    if (x.size() != schema.size())
        throw Error(ErrorCode::Domain, "point has " + std::to_string(x.size()) +
                                           " coordinates, schema has " + std::to_string(schema.size()));
    for (std::size_t i = 0; i < x.size(); ++i) {
        const Feature& f = schema[i];
        if (f.is_numeric()) {
            if (!(x[i] >= f.range().low && x[i] <= f.range().high))
                throw Error(ErrorCode::Domain, "value of '" + f.name + "' outside its range");
        } else {
            double level = x[i];
            if (!(level >= 0) || level != std::floor(level) ||
                level >= static_cast<double>(f.num_levels()))
                throw Error(ErrorCode::Domain, "invalid level index for '" + f.name + "'");
        }
    }
}

} // namespace treealg
