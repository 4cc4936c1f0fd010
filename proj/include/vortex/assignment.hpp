#ifndef VORTEX_ASSIGNMENT_HPP
#define VORTEX_ASSIGNMENT_HPP

#include <vector>

namespace vortex {

struct AssignmentResult {
  std::vector<int> col_of_row;  // matched column per row
  double total_cost{0.0};
};

/// Exact dense linear assignment (shortest augmenting paths with dual
/// potentials). O(n^3); comfortable up to the few-thousand sample sizes the
/// distance bracket uses.
AssignmentResult solve_assignment(const std::vector<double>& cost, int n);

}  // namespace vortex

#endif
