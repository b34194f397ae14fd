#ifndef ISOFORGE_MINKOWSKI_HPP
#define ISOFORGE_MINKOWSKI_HPP

#include <vector>

#include "isoforge/polytope.hpp"

namespace isoforge {

// Optimizer of the cell-volume problem:
//   C = max { |inter_v {p : p.v <= c_v}| : sum_v c_v = 1 }.
struct MinkowskiSolution {
  std::vector<Vec> fan;        // merged direction set (duplicates summed by length)
  bool feasible = false;
  std::vector<double> c;       // optimal budget split, sum = 1
  Polytope polytope;
  double constant = 0;         // C, the optimal volume
  double alpha = 0;            // facet-area slope: area(F_v) = alpha * |v|
  int iterations = 0;
};

struct IterationLimitError : std::runtime_error {
  MinkowskiSolution best;
  IterationLimitError(const std::string& m, MinkowskiSolution b)
      : std::runtime_error(m), best(std::move(b)) {}
};

// Projected gradient ascent on the budget simplex; the gradient of the volume in
// c_k is area(F_k)/|v_k|. Converged when all ratios area(F_v)/|v| agree to rel 1e-8.
// Infeasible fans (sum != 0 or deficient span) return feasible = false.
MinkowskiSolution minkowski_constant(const std::vector<Vec>& fan, int max_iter = 10000);

// Unit ball of the dual quasinorm: inter_v {p : p.(v/|v|) <= 1}. Distinct from the
// cell optimizer above.
Polytope wulff_shape(const std::vector<Vec>& fan);

}  // namespace isoforge

#endif
