#include "gsr/assignment.hpp"

#include <algorithm>
#include <cmath>

namespace gsr {

std::vector<std::pair<int, int>> solve_assignment(const Eigen::MatrixXd& cost) {
    const int rows = static_cast<int>(cost.rows());
    const int cols = static_cast<int>(cost.cols());
    if (rows == 0 || cols == 0) {
        return {};
    }
    const int n = std::max(rows, cols);

    // Pad to square; padding edges cost 0 so they never distort the optimum
    // among real edges more than a constant shared by all complete matchings.
    Eigen::MatrixXd a = Eigen::MatrixXd::Constant(n, n, 0.0);
    a.topLeftCorner(rows, cols) = cost;

    // Jonker-Volgenant style shortest augmenting path with potentials.
    // 1-based internal arrays, column p[j] holds the row assigned to j.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, std::numeric_limits<double>::infinity());
        std::vector<char> used(n + 1, false);
        do {
            used[j0] = true;
            const int i0 = p[j0];
            int j1 = 0;
            double delta = std::numeric_limits<double>::infinity();
            for (int j = 1; j <= n; ++j) {
                if (used[j]) {
                    continue;
                }
                const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
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
        } while (j0 != 0);
    }

    std::vector<std::pair<int, int>> matches;
    for (int j = 1; j <= n; ++j) {
        const int i = p[j] - 1;
        const int col = j - 1;
        if (i < rows && col < cols && a(i, col) < kInfeasibleCost / 2.0) {
            matches.emplace_back(i, col);
        }
    }
    std::sort(matches.begin(), matches.end());
    return matches;
}

}  // namespace gsr
