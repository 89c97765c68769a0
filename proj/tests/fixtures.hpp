#pragma once

// Canonical small trees on D2 = [0,10] x [0,10] shared by the test suites.

#include "treealg/tree.hpp"

#include <memory>

namespace fixtures {

using namespace treealg;

inline SchemaPtr d2() {
    static const SchemaPtr schema = std::make_shared<const FeatureSchema>(
        std::vector<Feature>{{"x1", NumericRange{0, 10}}, {"x2", NumericRange{0, 10}}});
    return schema;
}

/** "x[feature] <= threshold" with leaf values left / right. */
inline Tree stump(const SchemaPtr& schema, std::size_t feature, double threshold, double left = 0.0,
                  double right = 1.0) {
    TreeBuilder b(schema);
    auto [l, r] = b.split(b.root(), ThresholdSplit{feature, threshold});
    b.set_value(l, Scalar{left});
    b.set_value(r, Scalar{right});
    return std::move(b).build();
}

inline Tree stump4() { return stump(d2(), 0, 4.0); }
inline Tree stump6() { return stump(d2(), 0, 6.0); }
inline Tree stumpy5() { return stump(d2(), 1, 5.0); }
inline Tree const_tree(double v) { return constant_tree(d2(), Scalar{v}); }

inline double scalar_at(const Tree& t, const Point& x) { return std::get<Scalar>(evaluate(t, x)).value; }

} // namespace fixtures
