#ifndef ISOFORGE_TRANSPORT_HPP
#define ISOFORGE_TRANSPORT_HPP

#include <map>
#include <string>
#include <vector>

#include "isoforge/lattices.hpp"
#include "isoforge/polytope.hpp"

namespace isoforge {

// Power (Laguerre) diagram clipped to a convex body.
struct PowerDiagram {
  std::vector<Vec> sites;
  std::vector<double> weights;
  Polytope body;
  std::vector<Polytope> cells;
  std::vector<double> volumes;
  std::vector<bool> empty_cell;  // priced-out sites

  std::string to_json() const;
};

// Piecewise-affine dual potential values on the sites; the cell of site p is the
// subdifferential of the potential at p intersected with the body.
struct AleksandrovSolution {
  std::vector<Vec> sites;
  std::vector<double> values;  // c_p = (|p|^2 - w(p)) / 2
};

struct FitResult {
  PowerDiagram diagram;
  AleksandrovSolution potential;
  int iterations = 0;
  double residual = 0;  // max |cell volume - target|
};

struct FitError : std::runtime_error {
  double residual;
  FitError(const std::string& m, double r) : std::runtime_error(m), residual(r) {}
};

PowerDiagram power_diagram(const std::vector<Vec>& sites, const std::vector<double>& weights,
                           const Polytope& body);

// Damped ascent on the concave Kantorovich dual until every cell volume equals
// |body|/#sites within vol_tol_rel * |body|.
FitResult fit_equal_volumes(const std::vector<Vec>& sites, const Polytope& body,
                            int max_iter = 5000, double vol_tol_rel = 1e-6);

// Subdifferential of the Aleksandrov values over the site set, clipped to the body.
Polytope aleksandrov_cell(const AleksandrovSolution& sol, size_t site, const Polytope& body);

struct SufficiencyReport {
  bool reciprocal = true;        // edges parallel to dual facet normals
  bool simplicial = true;        // cells usable as tessellation tiles per the criterion
  bool equal_volumes = true;
  bool ratio1_constant = true;   // H^{d-1}(F) / (|x-y| A^2)
  bool ratio2_constant = true;   // H^{d-1}(F) |x-y| / g^2
  bool c_constant = true;        // C_{V_x} across vertex orbits
  double ratio1_min = 0, ratio1_max = 0;
  double ratio2_min = 0, ratio2_max = 0;
  double vol_min = 0, vol_max = 0;
  double c_value = 0;            // common C when c_constant
  double worst_reciprocity = 0;  // max sine of the edge/normal angle
  std::string detail;

  bool pass() const {
    return reciprocal && simplicial && equal_volumes && ratio1_constant &&
           ratio2_constant && c_constant;
  }
  std::string first_failure() const;
  std::string to_json() const;
};

SufficiencyReport verify_sufficiency(const LatticeBundle& bundle);

}  // namespace isoforge

#endif
