#ifndef GSR_ASSIGNMENT_HPP
#define GSR_ASSIGNMENT_HPP

#include <Eigen/Dense>

#include <limits>
#include <utility>
#include <vector>

namespace gsr {

// Treated as "no edge"; assignments landing on such entries are dropped from
// the returned matching.
constexpr double kInfeasibleCost = 1e12;

/// Minimum-cost one-to-one assignment on a rows x cols cost matrix
/// (shortest augmenting path, O(n^3)). The matrix is padded internally to a
/// square; pairs assigned at kInfeasibleCost or padding are not reported.
/// Returns (row, col) pairs sorted by row.
std::vector<std::pair<int, int>> solve_assignment(const Eigen::MatrixXd& cost);

}  // namespace gsr

#endif  // GSR_ASSIGNMENT_HPP
