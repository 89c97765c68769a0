#pragma once

#include <vector>

namespace treealg {

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    double objective = 0.0;
    std::vector<double> x;
};

/**
 * Dense two-phase simplex for
 *
 *     max c'x  s.t.  A x <= b,  x >= 0
 *
 * with Bland-style tie breaking. Intended for the small systems produced by
 * region tests (a few dozen rows and columns).
 */
LpSolution solve_lp(const std::vector<std::vector<double>>& A,
                    const std::vector<double>& b,
                    const std::vector<double>& c);

} // namespace treealg
