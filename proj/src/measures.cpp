#include "treealg/measures.hpp"

#include "treealg/error.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace treealg {

namespace {

struct LeafMass {
    const LeafValue* value;
    double mass;
};

std::vector<LeafMass> leaf_masses(const Tree& t, const Measure& m) {
    std::vector<LeafMass> out;
    for_each_leaf(t, [&](NodeId id, const Region& region) {
        const Node& n = t.node(id);
        if (!n.value) throw Error(ErrorCode::Validation, "leaf without value");
        out.push_back({&*n.value, region_measure(t.schema(), region, m)});
    });
    return out;
}

const std::vector<double>& probs_of(const BasicValue& v) { return std::get<ClassProbs>(v).probs; }

double squared_norm(const BasicValue& v) {
    if (const auto* s = std::get_if<Scalar>(&v)) return s->value * s->value;
    double acc = 0.0;
    for (double p : probs_of(v)) acc += p * p;
    return acc;
}

double dot(const BasicValue& a, const BasicValue& b) {
    if (const auto* s = std::get_if<Scalar>(&a)) return s->value * std::get<Scalar>(b).value;
    const auto& pa = probs_of(a);
    const auto& pb = probs_of(b);
    double acc = 0.0;
    for (std::size_t i = 0; i < pa.size(); ++i) acc += pa[i] * pb[i];
    return acc;
}

double squared_difference(const BasicValue& a, const BasicValue& b) {
    if (const auto* s = std::get_if<Scalar>(&a)) {
        double d = s->value - std::get<Scalar>(b).value;
        return d * d;
    }
    const auto& pa = probs_of(a);
    const auto& pb = probs_of(b);
    if (pa.size() != pb.size()) throw Error(ErrorCode::KindMismatch, "probability vectors differ in length");
    double acc = 0.0;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        double d = pa[i] - pb[i];
        acc += d * d;
    }
    return acc;
}

const Tuple& pair_of(const LeafValue& v) {
    const auto* t = std::get_if<Tuple>(&v);
    if (!t || t->values.size() != 2) throw Error(ErrorCode::KindMismatch, "expected a pair-combined tree");
    return *t;
}

double scalar_of(const LeafValue& v) {
    const auto* s = std::get_if<Scalar>(&v);
    if (!s) throw Error(ErrorCode::KindMismatch, "operation needs scalar leaves");
    return s->value;
}

void require_scalar(const Tree& t) {
    if (t.leaf_kind() != ValueKind::Scalar) throw Error(ErrorCode::KindMismatch, "operation needs scalar leaves");
}

// Average of `leaf` over the region of node w under m, children weighted by
// their conditional measure p(child region) / p(region).
double conditional_average(const Tree& t, NodeId w, const Region& region, double mass, const Measure& m,
                           const std::function<double(const LeafValue&)>& leaf) {
    const Node& n = t.node(w);
    if (n.is_leaf()) return leaf(*n.value);
    if (mass == 0.0) return 0.0;
    Region left = region.refine(*n.split, Side::Left);
    Region right = region.refine(*n.split, Side::Right);
    double pl = region_measure(t.schema(), left, m);
    double pr = region_measure(t.schema(), right, m);
    double acc = 0.0;
    if (pl > 0.0) acc += pl / mass * conditional_average(t, *n.left, left, pl, m, leaf);
    if (pr > 0.0) acc += pr / mass * conditional_average(t, *n.right, right, pr, m, leaf);
    return acc;
}

double integrate_recursive(const Tree& t, const Measure& m, const std::function<double(const LeafValue&)>& leaf) {
    Region root(t.schema());
    double mass = region_measure(t.schema(), root, m);
    return mass * conditional_average(t, t.root(), root, mass, m, leaf);
}

// Almost-everywhere constant: all leaves of positive mass carry one value.
bool is_constant(const std::vector<LeafMass>& leaves) {
    const LeafValue* first = nullptr;
    for (const LeafMass& l : leaves) {
        if (l.mass <= 0.0) continue;
        if (!first) first = l.value;
        else if (!(*first == *l.value)) return false;
    }
    return true;
}

} // namespace

Mean tree_mean(const Tree& t, const Measure& m) {
    auto leaves = leaf_masses(t, m);
    if (t.leaf_kind() == ValueKind::Scalar) {
        double acc = 0.0;
        for (const LeafMass& l : leaves) acc += scalar_of(*l.value) * l.mass;
        return acc;
    }
    std::vector<double> acc;
    for (const LeafMass& l : leaves) {
        const auto* p = std::get_if<ClassProbs>(l.value);
        if (!p) throw Error(ErrorCode::KindMismatch, "mean needs scalar or class-probability leaves");
        acc.resize(p->probs.size(), 0.0);
        for (std::size_t s = 0; s < p->probs.size(); ++s) acc[s] += p->probs[s] * l.mass;
    }
    return acc;
}

double tree_variance(const Tree& t, const Measure& m) {
    Mean mean = tree_mean(t, m);
    double acc = 0.0;
    for (const LeafMass& l : leaf_masses(t, m)) {
        if (const double* mu = std::get_if<double>(&mean)) {
            double d = scalar_of(*l.value) - *mu;
            acc += d * d * l.mass;
        } else {
            acc += squared_difference(to_basic(*l.value), ClassProbs{std::get<std::vector<double>>(mean)}) * l.mass;
        }
    }
    return acc;
}

double tree_norm_squared(const Tree& t, const Measure& m) {
    double acc = 0.0;
    for (const LeafMass& l : leaf_masses(t, m)) acc += squared_norm(to_basic(*l.value)) * l.mass;
    return acc;
}

TreeStatistics tree_statistics(const Tree& t, const Measure& m) {
    return TreeStatistics{tree_mean(t, m), tree_variance(t, m), tree_norm_squared(t, m)};
}

double tree_covariance(const Tree& t1, const Tree& t2, const Measure& m, CombineBudget budget) {
    require_scalar(t1);
    require_scalar(t2);
    double mu1 = std::get<double>(tree_mean(t1, m));
    double mu2 = std::get<double>(tree_mean(t2, m));
    Tree combined = combine_pair(t1, t2, budget);
    double acc = 0.0;
    for (const LeafMass& l : leaf_masses(combined, m)) {
        const Tuple& p = pair_of(*l.value);
        double d1 = std::get<Scalar>(p.values[0]).value - mu1;
        double d2 = std::get<Scalar>(p.values[1]).value - mu2;
        acc += d1 * d2 * l.mass;
    }
    return acc;
}

double tree_correlation(const Tree& t1, const Tree& t2, const Measure& m, CombineBudget budget) {
    require_scalar(t1);
    require_scalar(t2);
    if (is_constant(leaf_masses(t1, m)))
        throw Error(ErrorCode::DegenerateCorrelation, "degenerate correlation: zero variance in a");
    if (is_constant(leaf_masses(t2, m)))
        throw Error(ErrorCode::DegenerateCorrelation, "degenerate correlation: zero variance in b");
    double cov = tree_covariance(t1, t2, m, budget);
    double rho = cov / (std::sqrt(tree_variance(t1, m)) * std::sqrt(tree_variance(t2, m)));
    // Rounding can leave |rho| a few ulps away from 1 for affinely related trees.
    if (std::abs(std::abs(rho) - 1.0) <= 1e-12) rho = std::copysign(1.0, rho);
    return rho;
}

double squared_distance_recursive(const Tree& combined, const Measure& m) {
    return integrate_recursive(combined, m, [](const LeafValue& v) {
        const Tuple& p = pair_of(v);
        return squared_difference(p.values[0], p.values[1]);
    });
}

double squared_distance_flat(const Tree& combined, const Measure& m) {
    double acc = 0.0;
    for (const LeafMass& l : leaf_masses(combined, m)) {
        const Tuple& p = pair_of(*l.value);
        acc += squared_difference(p.values[0], p.values[1]) * l.mass;
    }
    return acc;
}

double tree_distance(const Tree& t1, const Tree& t2, const Measure& m, CombineBudget budget) {
    return std::sqrt(squared_distance_recursive(combine_pair(t1, t2, budget), m));
}

double tree_inner_product(const Tree& t1, const Tree& t2, const Measure& m, CombineBudget budget) {
    Tree combined = combine_pair(t1, t2, budget);
    return integrate_recursive(combined, m, [](const LeafValue& v) {
        const Tuple& p = pair_of(v);
        return dot(p.values[0], p.values[1]);
    });
}

double forest_distance(std::span<const Tree> f, std::span<const Tree> g, const Measure& m, CombineBudget budget) {
    for (const Tree& t : f) require_scalar(t);
    for (const Tree& t : g) require_scalar(t);
    auto gram_sum = [&](std::span<const Tree> a, std::span<const Tree> b) {
        double acc = 0.0;
        for (const Tree& x : a)
            for (const Tree& y : b) acc += tree_inner_product(x, y, m, budget);
        return acc;
    };
    double d2 = gram_sum(f, f) + gram_sum(g, g) - 2.0 * gram_sum(f, g);
    return std::sqrt(std::max(d2, 0.0));
}

Eigen::MatrixXd distance_matrix(std::span<const Tree> trees, const Measure& m, unsigned jobs, CombineBudget budget) {
    const std::size_t n = trees.size();
    if (n < 2) throw Error(ErrorCode::InvalidArgument, "distance matrix needs at least two trees");
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);

    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t k = next++; k < pairs.size(); k = next++) {
            auto [i, j] = pairs[k];
            try {
                double v = tree_distance(trees[i], trees[j], m, budget);
                d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
                d(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = pairs.size();
            }
        }
    };
    jobs = std::max(1u, jobs);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
    return d;
}

} // namespace treealg
