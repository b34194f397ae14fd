#ifndef ISOFORGE_POLYTOPE_HPP
#define ISOFORGE_POLYTOPE_HPP

#include <optional>
#include <string>
#include <vector>

#include "isoforge/core.hpp"

namespace isoforge {

// {p : p.normal <= offset}; normal need not be unit but must be nonzero.
struct Halfspace {
  Vec normal;
  double offset = 0;
};

struct Facet {
  Vec normal;                 // unit outward normal
  double area = 0;            // (d-1)-dimensional measure
  std::vector<int> vertices;  // incident vertex indices
};

struct Polytope {
  int dim = 0;
  std::vector<Halfspace> halfspaces;
  std::vector<Vec> vertices;
  std::vector<Facet> facets;
  double volume = 0;
  bool unbounded = false;
  bool empty_interior = false;

  bool contains(const Vec& p, double slack = 0.0) const;
  Vec centroid() const;
  // max over facets of |sum area*normal| residual, normalized by total area
  double minkowski_residual() const;
  // Second moment: integral over the polytope of |x - p|^2.
  double second_moment(const Vec& p) const;
  // Hausdorff distance between vertex sets (symmetric).
  static double vertex_hausdorff(const Polytope& a, const Polytope& b);
};

// Vertex enumeration over all d-subsets of bounding hyperplanes, facet areas via
// recursive face measures, volume as a fan from an interior point. Unbounded
// inputs are reported via the flag with volume = +infinity.
Polytope intersect_halfspaces(std::vector<Halfspace> hs, int dim);

// Cartesian product; volume and facet areas are exact products (no kernel recursion).
Polytope polytope_product(const Polytope& a, const Polytope& b);

// Simplex from its d+1 vertices, realized as a halfspace intersection.
Polytope simplex_polytope(const std::vector<Vec>& verts);

std::string polytope_to_json(const Polytope& p);

}  // namespace isoforge

#endif
