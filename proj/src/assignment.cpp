#include "vortex/assignment.hpp"

#include <limits>

#include "vortex/common.hpp"

namespace vortex {

AssignmentResult solve_assignment(const std::vector<double>& cost, int n) {
  if (n <= 0 || cost.size() != static_cast<std::size_t>(n) * n) {
    throw ConfigError("solve_assignment: bad cost matrix");
  }
  const double kInf = std::numeric_limits<double>::infinity();
  // 1-based columns; column 0 is the virtual start of each augmenting path.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1, 0);

  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = -1;
      double delta = kInf;
      const double* row = cost.data() + static_cast<std::size_t>(i0 - 1) * n;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = row[j - 1] - u[i0] - v[j];
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

  AssignmentResult res;
  res.col_of_row.assign(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j] > 0) res.col_of_row[p[j] - 1] = j - 1;
  }
  for (int i = 0; i < n; ++i) {
    res.total_cost += cost[static_cast<std::size_t>(i) * n + res.col_of_row[i]];
  }
  return res;
}

}  // namespace vortex
