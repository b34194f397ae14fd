#ifndef ISOFORGE_SUBDIFFERENTIAL_HPP
#define ISOFORGE_SUBDIFFERENTIAL_HPP

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "isoforge/graph.hpp"
#include "isoforge/polytope.hpp"

namespace isoforge {

// Slopes supporting u at x against graph neighbors only.
Polytope prox_subdifferential(const GeometricGraph& g, const std::set<VertexId>& omega,
                              const std::map<VertexId, double>& u, VertexId x);

// Slopes supporting u at x against every vertex of the closure.
Polytope full_subdifferential(const GeometricGraph& g, const std::set<VertexId>& omega,
                              const std::map<VertexId, double>& u, VertexId x);

// Target body cut out by boundary-edge halfspaces p.(y-x) <= g/A; with
// lattice_wide, intersects over every edge of the graph in both orientations.
Polytope target_polytope(const GeometricGraph& g, const std::set<VertexId>& omega,
                         bool lattice_wide = false);

struct ChainReport {
  double vol_Hg = 0;
  double vol_union = 0;   // sum of full-cell volumes (cells essentially disjoint)
  double sum_prox = 0;
  double sum_bound = 0;   // sum C_{V_x} max(lap,0)^d
  double rhs = 0;         // max C_{V_x} (#_g boundary)^d / #omega^{d-1}
  bool hg_unbounded = false;
  std::array<bool, 4> equality;  // links (a)-(b), (b|c), (c|d), (d|e) at rel 1e-6

  // diagnostics
  std::map<VertexId, double> cell_volumes;      // full cells
  std::map<VertexId, double> prox_volumes;
  std::map<VertexId, double> laplacians;
  std::map<VertexId, double> c_constants;
  bool laplacian_constant = false;
  bool c_constant = false;
  bool boundary_saturated = false;              // every boundary edge exact
  std::map<VertexId, int> slack_direction;      // per outer vertex: -1, 0, +1
  double mc_overlap_fraction = 0;               // measure of pairwise cell overlap
  double mc_coverage_fraction = 0;

  bool monotone(double rel = 1e-9) const;
  std::string to_json() const;
  std::string to_csv_row() const;
};

// Computes the five chain quantities for a solution u of the bounded Neumann
// problem. Validates lap_A u <= #_g/#omega and the saturated boundary condition.
ChainReport chain_report(const GeometricGraph& g, const std::set<VertexId>& omega,
                         const std::map<VertexId, double>& u, int mc_samples = 100000);

struct ConvexityCertificate {
  bool convex = false;
  std::optional<VertexId> witness;  // vertex where prox != full (or both empty)
  bool empty_case = false;          // cells had no interior anywhere
};

// True iff prox and full subdifferentials agree and are nonempty at every vertex
// of omega, certifying that u is the restriction of a convex function.
ConvexityCertificate convexity_certificate(const GeometricGraph& g,
                                           const std::set<VertexId>& omega,
                                           const std::map<VertexId, double>& u);

}  // namespace isoforge

#endif
