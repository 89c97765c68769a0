#pragma once

#include "treealg/region.hpp"
#include "treealg/tree.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace treealg {

/** Size guard for combination; `calls_made` counts visits of (node, node)
 *  pairs by the combine and collect recursions. */
struct CombineBudget {
    std::size_t max_nodes = 10'000'000;
    std::size_t calls_made = 0;
};

struct CombineOptions {
    /** Check at every call that the working region lies inside both current
     *  nodes' regions. Expensive; meant for tests. */
    bool check_containment = false;
};

/** Tree equal to `source` on `region`, built only from splits of source nodes
 *  whose regions meet `region`. Outside `region` the result is unspecified. */
Tree collect(const Tree& source, const Region& region);

/** Product tree whose leaves hold Tuple{f1(x), f2(x)} with sources {0, 1}. */
Tree combine_pair(const Tree& t1, const Tree& t2, CombineBudget& budget,
                  const CombineOptions& options = {});

/** Left fold of combine_pair; tuple i holds the value of trees[i]. */
Tree combine_many(std::span<const Tree> trees, CombineBudget& budget,
                  const CombineOptions& options = {});

/** Tree for sum_m weights[m] * trees[m]. Accumulates in input order at every leaf. */
Tree affine_combination(std::span<const Tree> trees, std::span<const double> weights,
                        CombineBudget& budget);

/** Collapses tuple leaves of a combined tree by the given weights. */
Tree collapse_tuples(const Tree& combined, std::span<const double> weights);

/** Merges sibling leaves with identical values, bottom-up. */
Tree simplify(const Tree& tree);

} // namespace treealg
