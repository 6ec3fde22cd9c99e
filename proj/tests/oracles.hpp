// Independent reference implementations used only to check the library.
// These deliberately do not share code with src/.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "rmot/assignment.hpp"

namespace oracle {

// Exhaustive min-cost assignment of size min(n, m); ties keep the
// lexicographically smallest pair list. Usable up to ~8x8.
struct BruteResult {
    std::vector<std::pair<int, int>> pairs;
    double total = 0; // over all pairs, forbidden entries included
};

inline void brute_recurse(const rmot::CostMatrix& c, int row, int assigned, int need,
                          std::vector<int>& col_used, std::vector<std::pair<int, int>>& cur,
                          BruteResult& best, bool& have, double running) {
    const int n = c.rows;
    if (assigned == need) {
        if (!have || running < best.total ||
            (running == best.total && cur < best.pairs)) {
            best.pairs = cur;
            best.total = running;
            have = true;
        }
        return;
    }
    if (row >= n || n - row < need - assigned) return;
    // Option 1: match this row with each free column.
    for (int j = 0; j < c.cols; ++j) {
        if (col_used[j]) continue;
        col_used[j] = 1;
        cur.emplace_back(row, j);
        brute_recurse(c, row + 1, assigned + 1, need, col_used, cur, best, have,
                      running + c.at(row, j));
        cur.pop_back();
        col_used[j] = 0;
    }
    // Option 2: skip this row (only possible when rows outnumber columns).
    if (n - row - 1 >= need - assigned)
        brute_recurse(c, row + 1, assigned, need, col_used, cur, best, have, running);
}

inline BruteResult brute_force_assignment(const rmot::CostMatrix& c) {
    BruteResult best;
    if (c.rows == 0 || c.cols == 0) return best;
    std::vector<int> col_used(c.cols, 0);
    std::vector<std::pair<int, int>> cur;
    bool have = false;
    brute_recurse(c, 0, 0, std::min(c.rows, c.cols), col_used, cur, best, have, 0.0);
    return best;
}

// Presence rule transliterated from its case definition.
inline int presence_reference(std::span<const std::uint8_t> window, int l, double beta) {
    const int z_prev = window.back();
    int sum = 0;
    for (auto e : window) sum += e;
    if (z_prev == 1 || static_cast<double>(sum) / static_cast<double>(l) >= beta) return 1;
    return 0;
}

// Kernel radius transliterated case by case from the quadratic definitions.
inline double radius_reference(double w, double h, double alpha) {
    const double a1 = h + w;
    const double b1 = 4.0 * (h * w * (1.0 - alpha)) / (1.0 + alpha);
    const double a2 = 2.0 * (h + w);
    const double b2 = 16.0 * h * w * (1.0 - alpha);
    const double a3 = -2.0 * (h + w);
    const double b3 = 16.0 * h * w * alpha * (alpha - 1.0);
    const double r1 = std::fabs((a1 + std::sqrt(std::max(a1 * a1 - b1, 0.0))) / 2.0);
    const double r2 = std::fabs((a2 + std::sqrt(std::max(a2 * a2 - b2, 0.0))) / 2.0);
    const double r3 = std::fabs((a3 + std::sqrt(std::max(a3 * a3 - b3, 0.0))) / 2.0);
    return std::min({r1, r2, r3});
}

} // namespace oracle
