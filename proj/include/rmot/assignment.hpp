#pragma once

#include <utility>
#include <vector>

#include "rmot/errors.hpp"

namespace rmot {

// Cost at or above this value marks a forbidden pair: it may be used to
// complete a rectangular assignment internally but is stripped from results.
inline constexpr double kForbiddenCost = 1e9;

struct CostMatrix {
    int rows = 0, cols = 0;
    std::vector<double> cells;

    CostMatrix() = default;
    CostMatrix(int r, int c, double fill = 0.0)
        : rows(r), cols(c), cells(static_cast<size_t>(r) * c, fill) {}

    double at(int i, int j) const { return cells[static_cast<size_t>(i) * cols + j]; }
    double& at(int i, int j) { return cells[static_cast<size_t>(i) * cols + j]; }
};

struct AssignmentResult {
    std::vector<std::pair<int, int>> pairs; // (row, col), row-ascending
    double cost = 0;                        // sum over surviving pairs
    std::vector<int> unmatched_rows, unmatched_cols;
};

// Min-cost one-to-one assignment of size min(rows, cols). Ties between
// optimal assignments resolve to the lexicographically smallest pair list;
// forbidden pairs are stripped afterwards. Costs must be finite.
AssignmentResult solve_assignment(const CostMatrix& cost);

} // namespace rmot
