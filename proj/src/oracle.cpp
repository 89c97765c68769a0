#include "treealg/oracle.hpp"

#include "treealg/error.hpp"

#include <algorithm>
#include <cmath>

namespace treealg {

namespace integrands {

namespace {
double scalar(const LeafValue* v) {
    const auto* s = std::get_if<Scalar>(v);
    if (!s) throw Error(ErrorCode::KindMismatch, "integrand needs scalar values");
    return s->value;
}
} // namespace

Integrand raw_value() {
    return [](std::span<const LeafValue* const> v) { return scalar(v[0]); };
}

Integrand product() {
    return [](std::span<const LeafValue* const> v) {
        double acc = 1.0;
        for (const LeafValue* x : v) acc *= scalar(x);
        return acc;
    };
}

Integrand squared_difference() {
    return [](std::span<const LeafValue* const> v) {
        if (const auto* a = std::get_if<ClassProbs>(v[0])) {
            const auto& b = std::get<ClassProbs>(*v[1]).probs;
            double acc = 0.0;
            for (std::size_t i = 0; i < b.size(); ++i) acc += (a->probs[i] - b[i]) * (a->probs[i] - b[i]);
            return acc;
        }
        double d = scalar(v[0]) - scalar(v[1]);
        return d * d;
    };
}

Integrand weighted_sum_squared(std::vector<double> weights) {
    return [weights = std::move(weights)](std::span<const LeafValue* const> v) {
        double acc = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) acc += weights.at(i) * scalar(v[i]);
        return acc * acc;
    };
}

} // namespace integrands

CellGrid::CellGrid(std::span<const Tree> trees, const std::vector<std::vector<double>>& extra_breakpoints) {
    if (trees.empty()) throw Error(ErrorCode::InvalidArgument, "cell grid needs at least one tree");
    schema_ = &trees.front().schema();
    const auto& numeric = schema_->numeric_features();
    breakpoints_.resize(numeric.size());
    std::vector<std::size_t> slot(schema_->size(), 0);
    for (std::size_t k = 0; k < numeric.size(); ++k) {
        slot[numeric[k]] = k;
        const NumericRange& r = (*schema_)[numeric[k]].range();
        breakpoints_[k] = {r.low, r.high};
        if (k < extra_breakpoints.size())
            for (double b : extra_breakpoints[k])
                if (b > r.low && b < r.high) breakpoints_[k].push_back(b);
    }
    for (const Tree& t : trees) {
        if (!(t.schema() == *schema_)) throw Error(ErrorCode::SchemaMismatch, "trees have different schemas");
        for (const Node& n : t.nodes()) {
            if (!n.split) continue;
            if (std::holds_alternative<HyperplaneSplit>(*n.split))
                throw Error(ErrorCode::UnsupportedGeometry, "cell grid cannot refine hyperplane splits");
            if (const auto* s = std::get_if<ThresholdSplit>(&*n.split)) {
                const NumericRange& r = (*schema_)[s->feature].range();
                if (s->threshold > r.low && s->threshold < r.high)
                    breakpoints_[slot[s->feature]].push_back(s->threshold);
            }
        }
    }
    for (auto& b : breakpoints_) {
        std::sort(b.begin(), b.end());
        b.erase(std::unique(b.begin(), b.end()), b.end());
    }
}

std::size_t CellGrid::num_cells() const {
    std::size_t n = 1;
    for (const auto& b : breakpoints_) n *= b.size() - 1;
    for (const Feature& f : schema_->features())
        if (!f.is_numeric()) n *= f.num_levels();
    return n;
}

void CellGrid::for_each_cell(const std::function<void(const Point&, double)>& visit) const {
    const FeatureSchema& schema = *schema_;
    const std::size_t d = schema.size();
    std::vector<std::size_t> radix(d), digit(d, 0), slot(d, 0);
    std::size_t k = 0;
    for (std::size_t f = 0; f < d; ++f) {
        if (schema[f].is_numeric()) {
            slot[f] = k++;
            radix[f] = breakpoints_[slot[f]].size() - 1;
        } else {
            radix[f] = schema[f].num_levels();
        }
    }
    Point x(d);
    for (;;) {
        double mass = 1.0;
        for (std::size_t f = 0; f < d; ++f) {
            if (schema[f].is_numeric()) {
                const auto& b = breakpoints_[slot[f]];
                double lo = b[digit[f]];
                double hi = b[digit[f] + 1];
                x[f] = lo + 0.5 * (hi - lo);
                mass *= (hi - lo) / (schema[f].range().high - schema[f].range().low);
            } else {
                x[f] = static_cast<double>(digit[f]);
                mass /= static_cast<double>(radix[f]);
            }
        }
        visit(x, mass);
        std::size_t f = 0;
        for (; f < d; ++f) {
            if (++digit[f] < radix[f]) break;
            digit[f] = 0;
        }
        if (f == d) return;
    }
}

namespace {

double apply(std::span<const Tree> trees, const Integrand& f, const Point& x, std::vector<const LeafValue*>& buf) {
    for (std::size_t i = 0; i < trees.size(); ++i) buf[i] = &evaluate(trees[i], x);
    return f(buf);
}

} // namespace

double grid_integral(std::span<const Tree> trees, const Integrand& f, const Measure& m,
                     const std::vector<std::vector<double>>& extra_breakpoints) {
    if (trees.empty()) throw Error(ErrorCode::InvalidArgument, "integral over no trees");
    std::vector<const LeafValue*> buf(trees.size());
    double acc = 0.0;
    if (m.is_uniform()) {
        CellGrid grid(trees, extra_breakpoints);
        grid.for_each_cell([&](const Point& x, double mass) { acc += apply(trees, f, x, buf) * mass; });
        return acc;
    }
    const Empirical& e = m.empirical_data();
    for (std::size_t i = 0; i < e.points.size(); ++i) acc += apply(trees, f, e.points[i], buf) * e.weights[i];
    return acc;
}

Point sample_point(const FeatureSchema& schema, const Measure& m, std::mt19937_64& rng) {
    if (!m.is_uniform()) {
        const Empirical& e = m.empirical_data();
        std::discrete_distribution<std::size_t> pick(e.weights.begin(), e.weights.end());
        return e.points[pick(rng)];
    }
    Point x(schema.size());
    for (std::size_t f = 0; f < schema.size(); ++f) {
        if (schema[f].is_numeric()) {
            x[f] = std::uniform_real_distribution<double>(schema[f].range().low, schema[f].range().high)(rng);
        } else {
            x[f] = static_cast<double>(std::uniform_int_distribution<std::size_t>(0, schema[f].num_levels() - 1)(rng));
        }
    }
    return x;
}

McEstimate monte_carlo_integral(std::span<const Tree> trees, const Integrand& f, const Measure& m, std::size_t n,
                                std::uint64_t seed) {
    if (trees.empty()) throw Error(ErrorCode::InvalidArgument, "integral over no trees");
    if (n < 100) throw Error(ErrorCode::InvalidArgument, "Monte Carlo needs at least 100 samples");
    const FeatureSchema& schema = trees.front().schema();
    std::mt19937_64 rng(seed);
    std::optional<std::discrete_distribution<std::size_t>> pick;
    if (!m.is_uniform()) {
        const auto& w = m.empirical_data().weights;
        pick.emplace(w.begin(), w.end());
    }
    std::vector<const LeafValue*> buf(trees.size());
    // Welford running mean and sum of squared deviations.
    double mean = 0.0;
    double m2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        Point x = pick ? m.empirical_data().points[(*pick)(rng)] : sample_point(schema, m, rng);
        double y = apply(trees, f, x, buf);
        double delta = y - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (y - mean);
    }
    double var = m2 / static_cast<double>(n - 1);
    return {mean, std::sqrt(var / static_cast<double>(n))};
}

std::optional<Counterexample> pointwise_equivalence(const Tree& combined, std::span<const Tree> originals,
                                                    std::size_t n, std::uint64_t seed) {
    const FeatureSchema& schema = combined.schema();
    for (const Tree& t : originals)
        if (!(t.schema() == schema)) throw Error(ErrorCode::SchemaMismatch, "trees have different schemas");

    // Thresholds of every tree, so that some samples land exactly on split boundaries.
    std::vector<std::vector<double>> thresholds(schema.size());
    auto harvest = [&](const Tree& t) {
        for (const Node& node : t.nodes())
            if (node.split)
                if (const auto* s = std::get_if<ThresholdSplit>(&*node.split)) {
                    const NumericRange& r = schema[s->feature].range();
                    if (s->threshold >= r.low && s->threshold <= r.high) thresholds[s->feature].push_back(s->threshold);
                }
    };
    harvest(combined);
    for (const Tree& t : originals) harvest(t);

    std::mt19937_64 rng(seed);
    std::bernoulli_distribution snap(0.25);
    const Measure uniform = Measure::uniform();
    for (std::size_t i = 0; i < n; ++i) {
        Point x = sample_point(schema, uniform, rng);
        for (std::size_t f = 0; f < schema.size(); ++f) {
            if (!thresholds[f].empty() && snap(rng))
                x[f] = thresholds[f][std::uniform_int_distribution<std::size_t>(0, thresholds[f].size() - 1)(rng)];
        }
        const LeafValue& c = evaluate(combined, x);
        const auto* tuple = std::get_if<Tuple>(&c);
        bool ok = tuple && tuple->values.size() == originals.size();
        std::vector<LeafValue> values;
        for (std::size_t m = 0; m < originals.size(); ++m) {
            values.push_back(evaluate(originals[m], x));
            if (ok && !(to_leaf(tuple->values[m]) == values.back())) ok = false;
        }
        if (!ok) return Counterexample{x, c, std::move(values)};
    }
    return std::nullopt;
}

SchemaPtr random_schema(std::size_t num_numeric, std::size_t num_categorical, std::mt19937_64& rng,
                        std::size_t num_classes) {
    std::vector<Feature> features;
    std::uniform_real_distribution<double> low(-10.0, 10.0);
    std::uniform_real_distribution<double> width(0.5, 20.0);
    std::uniform_int_distribution<std::size_t> levels(2, 5);
    std::size_t ni = 0;
    std::size_t ci = 0;
    // Interleave kinds so categorical features are not all at the end.
    while (ni < num_numeric || ci < num_categorical) {
        bool numeric = ci >= num_categorical || (ni < num_numeric && std::bernoulli_distribution(0.5)(rng));
        if (numeric) {
            double lo = low(rng);
            features.push_back({"x" + std::to_string(++ni), NumericRange{lo, lo + width(rng)}});
        } else {
            CategoricalLevels c;
            std::size_t n = levels(rng);
            for (std::size_t l = 0; l < n; ++l) c.levels.push_back("l" + std::to_string(l));
            features.push_back({"c" + std::to_string(++ci), c});
        }
    }
    std::optional<std::vector<std::string>> labels;
    if (num_classes > 0) {
        labels.emplace();
        for (std::size_t k = 0; k < num_classes; ++k) labels->push_back("k" + std::to_string(k));
    }
    return std::make_shared<const FeatureSchema>(std::move(features), std::move(labels));
}

namespace {

std::optional<Split> random_split(const FeatureSchema& schema, const Region& region, const FuzzOptions& options,
                                  std::mt19937_64& rng) {
    const auto& numeric = schema.numeric_features();
    std::uniform_int_distribution<std::size_t> pick_feature(0, schema.size() - 1);
    for (int attempt = 0; attempt < 24; ++attempt) {
        std::optional<Split> split;
        if (numeric.size() >= 2 && options.hyperplane_probability > 0.0 &&
            std::bernoulli_distribution(options.hyperplane_probability)(rng)) {
            // Plane through a random point of the region.
            std::optional<Point> anchor;
            for (int tries = 0; tries < 200 && !anchor; ++tries) {
                Point x(schema.size());
                for (std::size_t f = 0; f < schema.size(); ++f) {
                    if (schema[f].is_numeric()) {
                        const Interval& iv = region.interval(f);
                        x[f] = std::uniform_real_distribution<double>(iv.low, iv.high)(rng);
                    } else {
                        auto members = region.levels(f).members();
                        x[f] = static_cast<double>(members[std::uniform_int_distribution<std::size_t>(0, members.size() - 1)(rng)]);
                    }
                }
                if (region.contains(schema, x)) anchor = x;
            }
            if (!anchor) continue;
            HyperplaneSplit h;
            std::normal_distribution<double> gauss;
            for (std::size_t k = 0; k < numeric.size(); ++k) {
                const NumericRange& r = schema[numeric[k]].range();
                h.coeffs.push_back(gauss(rng) / (r.high - r.low));
            }
            h.offset = h.apply(schema, *anchor);
            split = h;
        } else {
            std::size_t f = pick_feature(rng);
            if (schema[f].is_numeric()) {
                const Interval& iv = region.interval(f);
                double t = std::uniform_real_distribution<double>(iv.low, iv.high)(rng);
                if (!(t > iv.low && t < iv.high)) continue;
                split = ThresholdSplit{f, t};
            } else {
                LevelSet admissible = region.levels(f);
                auto members = admissible.members();
                if (members.size() < 2) continue;
                LevelSet left(schema[f].num_levels());
                std::bernoulli_distribution coin(0.5);
                do {
                    left = LevelSet(schema[f].num_levels());
                    for (std::size_t m : members)
                        if (coin(rng)) left.insert(m);
                } while ((left & admissible).empty() || (left & admissible) == admissible);
                for (std::size_t l = 0; l < schema[f].num_levels(); ++l)
                    if (!admissible.contains(l) && coin(rng)) left.insert(l);
                split = SubsetSplit{f, left};
            }
        }
        if (region.axis_aligned() && is_axis_aligned(*split)) return split;
        if (split_partitions_region(schema, *split, region) == PartitionOutcome::SplitsRegion) return split;
    }
    return std::nullopt;
}

LeafValue random_value(const FeatureSchema& schema, const FuzzOptions& options, std::mt19937_64& rng) {
    if (options.kind == ValueKind::Scalar) {
        if (options.value_levels > 0)
            return Scalar{static_cast<double>(std::uniform_int_distribution<int>(0, options.value_levels - 1)(rng))};
        return Scalar{std::uniform_real_distribution<double>(-1.0, 1.0)(rng)};
    }
    if (!schema.class_labels()) throw Error(ErrorCode::InvalidArgument, "class-probability trees need class labels");
    const std::size_t k = schema.class_labels()->size();
    std::vector<double> p(k, 0.0);
    if (std::bernoulli_distribution(0.3)(rng)) {
        p[std::uniform_int_distribution<std::size_t>(0, k - 1)(rng)] = 1.0;
        return ClassProbs{p};
    }
    std::exponential_distribution<double> gamma1(1.0);
    double sum = 0.0;
    for (double& v : p) sum += (v = gamma1(rng));
    for (double& v : p) v /= sum;
    return ClassProbs{p};
}

} // namespace

Tree random_tree(const SchemaPtr& schema, const FuzzOptions& options, std::mt19937_64& rng) {
    struct Open {
        NodeId id;
        Region region;
        std::size_t depth;
    };
    TreeBuilder b(schema);
    std::vector<Open> open{{b.root(), Region(*schema), 0}};
    std::vector<NodeId> closed;
    while (!open.empty() && b.size() + 2 <= options.max_nodes) {
        std::size_t i = std::uniform_int_distribution<std::size_t>(0, open.size() - 1)(rng);
        Open leaf = std::move(open[i]);
        open.erase(open.begin() + static_cast<std::ptrdiff_t>(i));
        std::optional<Split> split;
        if (leaf.depth < options.max_depth) split = random_split(*schema, leaf.region, options, rng);
        if (!split) {
            closed.push_back(leaf.id);
            continue;
        }
        auto [l, r] = b.split(leaf.id, *split);
        open.push_back({l, leaf.region.refine(*split, Side::Left), leaf.depth + 1});
        open.push_back({r, leaf.region.refine(*split, Side::Right), leaf.depth + 1});
    }
    for (const Open& o : open) closed.push_back(o.id);
    std::sort(closed.begin(), closed.end());
    for (NodeId id : closed) b.set_value(id, random_value(*schema, options, rng));
    return std::move(b).build();
}

} // namespace treealg
