#ifndef ISOFORGE_PDE_HPP
#define ISOFORGE_PDE_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "isoforge/graph.hpp"

namespace isoforge {

// Discrete weighted Laplacian, signed so that convex restrictions are subharmonic:
//   lap_A u(x) = sum_y A^2(x,y) (u(y) - u(x)).
std::map<VertexId, double> laplacian(const GeometricGraph& g, const std::set<VertexId>& omega,
                                     const std::map<VertexId, double>& u);

enum class NeumannMode { naive, hamamuki };

struct NeumannSolution {
  std::map<VertexId, double> u;           // on the closure
  std::vector<OrientedEdge> selection;    // one saturating edge per outer vertex
  std::map<VertexId, double> f;           // target Laplacian (satisfies compatibility)
  std::map<VertexId, double> achieved;    // Laplacian of the folded u; <= f pointwise
  NeumannMode mode = NeumannMode::naive;
  double divergence_residual = 0;
  double solve_residual = 0;
  // per outer vertex: (min, max) of u(y)-u(x)-g/A over its in-edges
  std::map<VertexId, std::pair<double, double>> slack;

  std::string to_json() const;
};

struct CompatibilityError : std::runtime_error {
  std::vector<double> defects;  // per component
  CompatibilityError(const std::string& m, std::vector<double> d)
      : std::runtime_error(m), defects(std::move(d)) {}
};

// Solves lap_A u = f on omega with the boundary datum u(y)-u(x) = g/A enforced on
// one incident edge per outer vertex (exact on a split auxiliary graph, then folded
// back). Default f is the per-component solvable constant sum(A g)/#omega.
NeumannSolution neumann_solve(const GeometricGraph& g, const std::set<VertexId>& omega,
                              std::optional<std::map<VertexId, double>> f = {});

struct DirectedSystem {
  std::set<VertexId> vertices;                   // the closure
  std::map<VertexId, int> out_degree;
  std::map<VertexId, double> v;                  // adjoint null vector, min over omega = 1
  std::map<VertexId, double> v_outer_costs;      // g/A along the selected in-edges
  double max_over_min = 1;                       // diagnostic M(E')
};

// Null vector of the adjoint of the directed operator (interior vertices point to
// every neighbor, outer vertices point back along their selected edge).
DirectedSystem dual_vector(const GeometricGraph& g, const std::set<VertexId>& omega,
                           const std::vector<OrientedEdge>& selection);

struct SelectionResult {
  std::vector<OrientedEdge> selection;
  double C = 0;
  double max_over_min = 1;
};

struct OptimalConstantResult {
  double C = 0;
  std::vector<OrientedEdge> best_selection;
  std::vector<SelectionResult> per_selection;
  double lp_crosscheck = 0;
  bool truncated = false;
  double upper_bound = 0;  // solvable-constant bound sum(A g)/#omega
};

OptimalConstantResult optimal_constant(const GeometricGraph& g, const std::set<VertexId>& omega,
                                       long selection_cap = 100000);

struct LpResult {
  double z = 0;
  std::map<VertexId, double> u;
};

// Direct linear-programming solution of min max_omega lap_A u subject to the
// selected boundary equations, via a dense two-phase simplex with Bland's rule.
LpResult lp_oracle(const GeometricGraph& g, const std::set<VertexId>& omega,
                   const std::vector<OrientedEdge>& selection);

// Per-component solvable constant sum over boundary of A*g.
std::vector<double> compatibility_sums(const GeometricGraph& g, const SubsetView& view);

}  // namespace isoforge

#endif
