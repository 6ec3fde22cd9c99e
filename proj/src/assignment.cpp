#include "rmot/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace rmot {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct JvSolution {
    std::vector<int> rowsol; // row -> col, complete for n <= m
    std::vector<double> u, v;
};

// Jonker-Volgenant style shortest augmenting path with potentials, n <= m.
JvSolution jv_solve(int n, int m, const std::function<double(int, int)>& cost) {
    std::vector<double> u(n + 1, 0), v(m + 1, 0);
    std::vector<int> p(m + 1, 0), way(m + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(m + 1, kInf);
        std::vector<char> used(m + 1, false);
        do {
            used[j0] = true;
            const int i0 = p[j0];
            int j1 = 0;
            double delta = kInf;
            for (int j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    JvSolution s;
    s.rowsol.assign(n, -1);
    for (int j = 1; j <= m; ++j)
        if (p[j] > 0) s.rowsol[p[j] - 1] = j - 1;
    s.u.assign(u.begin() + 1, u.end());
    s.v.assign(v.begin() + 1, v.end());
    return s;
}

// Totals keep forbidden pairs as an exact count so sentinel arithmetic never
// drowns the finite part in rounding noise.
struct SplitTotal {
    long sentinels = 0;
    double finite = 0;

    bool better_than(const SplitTotal& o, double tol) const {
        if (sentinels != o.sentinels) return sentinels < o.sentinels;
        return finite < o.finite - tol;
    }
    bool equals(const SplitTotal& o, double tol) const {
        return sentinels == o.sentinels && std::abs(finite - o.finite) <= tol;
    }
};

class Canonicalizer {
public:
    explicit Canonicalizer(const CostMatrix& c) : c_(c) {}

    // Optimal complete assignment over the given row/col index sets.
    SplitTotal sub_total(const std::vector<int>& rows, const std::vector<int>& cols,
                         std::vector<int>* rowsol_out = nullptr) const {
        const int n = static_cast<int>(rows.size());
        const int m = static_cast<int>(cols.size());
        SplitTotal t;
        if (n == 0 || m == 0) return t;
        std::vector<int> rowsol(n, -1);
        if (n <= m) {
            const auto s = jv_solve(n, m, [&](int i, int j) { return c_.at(rows[i], cols[j]); });
            rowsol = s.rowsol;
        } else {
            const auto s = jv_solve(m, n, [&](int j, int i) { return c_.at(rows[i], cols[j]); });
            for (int j = 0; j < m; ++j)
                if (s.rowsol[j] >= 0) rowsol[s.rowsol[j]] = j;
        }
        for (int i = 0; i < n; ++i) {
            if (rowsol[i] < 0) continue;
            const double cell = c_.at(rows[i], cols[rowsol[i]]);
            if (cell >= kForbiddenCost)
                ++t.sentinels;
            else
                t.finite += cell;
        }
        if (rowsol_out) *rowsol_out = rowsol;
        return t;
    }

private:
    const CostMatrix& c_;
};

} // namespace

AssignmentResult solve_assignment(const CostMatrix& cost) {
    const int n = cost.rows, m = cost.cols;
    for (double c : cost.cells)
        if (!std::isfinite(c)) throw DomainError("solve_assignment: costs must be finite");

    AssignmentResult out;
    if (n == 0 || m == 0) {
        for (int i = 0; i < n; ++i) out.unmatched_rows.push_back(i);
        for (int j = 0; j < m; ++j) out.unmatched_cols.push_back(j);
        return out;
    }

    Canonicalizer canon(cost);
    std::vector<int> all_rows(n), all_cols(m);
    for (int i = 0; i < n; ++i) all_rows[i] = i;
    for (int j = 0; j < m; ++j) all_cols[j] = j;
    const SplitTotal base = canon.sub_total(all_rows, all_cols);

    double max_finite = 1.0;
    for (double c : cost.cells)
        if (c < kForbiddenCost) max_finite = std::max(max_finite, std::abs(c));
    const double tol = 1e-9 * max_finite * std::max(n, m);

    // Reduced costs of one optimal dual prune the candidate columns: a pair can
    // only appear in an optimal assignment when its reduced cost vanishes.
    std::vector<double> du(n, 0), dv(m, 0);
    {
        if (n <= m) {
            const auto s = jv_solve(n, m, [&](int i, int j) { return cost.at(i, j); });
            du = s.u;
            dv = s.v;
        } else {
            const auto s = jv_solve(m, n, [&](int j, int i) { return cost.at(i, j); });
            du = s.v;
            dv = s.u;
        }
    }
    auto plausible = [&](int i, int j) {
        const double rc = cost.at(i, j) - du[i] - dv[j];
        return rc <= 1e-6 * std::max({1.0, std::abs(cost.at(i, j)), std::abs(du[i]) + std::abs(dv[j])});
    };

    // Fix rows in order to the smallest column that still completes optimally;
    // this realizes the lexicographically-smallest-pair-list tie-break.
    std::vector<int> avail = all_cols;
    std::vector<std::pair<int, int>> full_pairs;
    SplitTotal fixed{0, 0.0};
    int remaining = std::min(n, m);
    for (int i = 0; i < n && remaining > 0; ++i) {
        std::vector<int> tail_rows(all_rows.begin() + i + 1, all_rows.end());
        const bool may_skip = remaining <= static_cast<int>(tail_rows.size());
        int chosen = -1;
        SplitTotal best{std::numeric_limits<long>::max(), kInf};
        for (int j : avail) {
            if (chosen >= 0) break;
            if (!plausible(i, j) && may_skip) continue;
            std::vector<int> rest;
            rest.reserve(avail.size() - 1);
            for (int k : avail)
                if (k != j) rest.push_back(k);
            SplitTotal t = canon.sub_total(tail_rows, rest);
            t.sentinels += fixed.sentinels;
            t.finite += fixed.finite;
            if (cost.at(i, j) >= kForbiddenCost)
                ++t.sentinels;
            else
                t.finite += cost.at(i, j);
            if (t.equals(base, tol)) {
                chosen = j;
            } else if (!may_skip && t.better_than(best, 0.0)) {
                best = t;
                chosen = -2 - j; // best-so-far fallback, keep scanning
            }
        }
        if (chosen <= -2) chosen = -2 - chosen;
        if (chosen >= 0) {
            full_pairs.emplace_back(i, chosen);
            if (cost.at(i, chosen) >= kForbiddenCost)
                ++fixed.sentinels;
            else
                fixed.finite += cost.at(i, chosen);
            avail.erase(std::find(avail.begin(), avail.end(), chosen));
            --remaining;
        }
    }

    std::vector<char> row_used(n, 0), col_used(m, 0);
    for (const auto& [i, j] : full_pairs) {
        if (cost.at(i, j) >= kForbiddenCost) continue; // forbidden pairs are stripped
        out.pairs.emplace_back(i, j);
        out.cost += cost.at(i, j);
        row_used[i] = 1;
        col_used[j] = 1;
    }
    for (int i = 0; i < n; ++i)
        if (!row_used[i]) out.unmatched_rows.push_back(i);
    for (int j = 0; j < m; ++j)
        if (!col_used[j]) out.unmatched_cols.push_back(j);
    return out;
}

} // namespace rmot
