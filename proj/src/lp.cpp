#include "treealg/lp.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace treealg {

namespace {

constexpr double kEps = 1e-9;

// Tableau simplex in the dictionary form used by the KACTL notebook: row m is
// the objective, row m + 1 the phase-one objective, column n the artificial
// variable and column n + 1 the right-hand side.
class Tableau {
public:
    Tableau(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
            const std::vector<double>& c)
        : m_(static_cast<int>(b.size())), n_(static_cast<int>(c.size())),
          nonbasic_(n_ + 1), basic_(m_), d_(m_ + 2, std::vector<double>(n_ + 2, 0.0)) {
        for (int i = 0; i < m_; ++i)
            for (int j = 0; j < n_; ++j) d_[i][j] = A[i][j];
        for (int i = 0; i < m_; ++i) {
            basic_[i] = n_ + i;
            d_[i][n_] = -1;
            d_[i][n_ + 1] = b[i];
        }
        for (int j = 0; j < n_; ++j) {
            nonbasic_[j] = j;
            d_[m_][j] = -c[j];
        }
        nonbasic_[n_] = -1;
        d_[m_ + 1][n_] = 1;
    }

    LpSolution solve() {
        LpSolution out;
        int r = 0;
        for (int i = 1; i < m_; ++i)
            if (d_[i][n_ + 1] < d_[r][n_ + 1]) r = i;
        if (m_ > 0 && d_[r][n_ + 1] < -kEps) {
            pivot(r, n_);
            if (!simplex(2) || d_[m_ + 1][n_ + 1] < -kEps) {
                out.status = LpStatus::Infeasible;
                return out;
            }
            for (int i = 0; i < m_; ++i) {
                if (basic_[i] != -1) continue;
                int s = 0;
                for (int j = 1; j <= n_; ++j)
                    if (less(d_[i], j, s)) s = j;
                pivot(i, s);
            }
        }
        bool bounded = simplex(1);
        out.x.assign(n_, 0.0);
        for (int i = 0; i < m_; ++i)
            if (basic_[i] >= 0 && basic_[i] < n_) out.x[basic_[i]] = d_[i][n_ + 1];
        out.status = bounded ? LpStatus::Optimal : LpStatus::Unbounded;
        out.objective = bounded ? d_[m_][n_ + 1] : std::numeric_limits<double>::infinity();
        return out;
    }

private:
    bool less(const std::vector<double>& row, int j, int s) const {
        return std::make_pair(row[j], nonbasic_[j]) < std::make_pair(row[s], nonbasic_[s]);
    }

    void pivot(int r, int s) {
        double inv = 1.0 / d_[r][s];
        for (int i = 0; i < m_ + 2; ++i) {
            if (i == r || std::abs(d_[i][s]) <= kEps) continue;
            double f = d_[i][s] * inv;
            for (int j = 0; j < n_ + 2; ++j) d_[i][j] -= d_[r][j] * f;
            d_[i][s] = d_[r][s] * f;
        }
        for (int j = 0; j < n_ + 2; ++j)
            if (j != s) d_[r][j] *= inv;
        for (int i = 0; i < m_ + 2; ++i)
            if (i != r) d_[i][s] *= -inv;
        d_[r][s] = inv;
        std::swap(basic_[r], nonbasic_[s]);
    }

    bool simplex(int phase) {
        int x = m_ + phase - 1;
        for (;;) {
            int s = -1;
            for (int j = 0; j <= n_; ++j) {
                if (nonbasic_[j] == -phase) continue;
                if (s == -1 || less(d_[x], j, s)) s = j;
            }
            if (d_[x][s] >= -kEps) return true;
            int r = -1;
            for (int i = 0; i < m_; ++i) {
                if (d_[i][s] <= kEps) continue;
                if (r == -1 ||
                    std::make_pair(d_[i][n_ + 1] / d_[i][s], basic_[i]) <
                        std::make_pair(d_[r][n_ + 1] / d_[r][s], basic_[r]))
                    r = i;
            }
            if (r == -1) return false;
            pivot(r, s);
        }
    }

    int m_, n_;
    std::vector<int> nonbasic_, basic_;
    std::vector<std::vector<double>> d_;
};

} // namespace

LpSolution solve_lp(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                    const std::vector<double>& c) {
    return Tableau(A, b, c).solve();
}

} // namespace treealg
