#ifndef ISOFORGE_LATTICES_HPP
#define ISOFORGE_LATTICES_HPP

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "isoforge/graph.hpp"
#include "isoforge/polytope.hpp"

namespace isoforge {

// A periodic graph materialized on a finite window, together with the reciprocal
// tessellation cells. The window carries one extra ring so that closures of
// studied subsets never touch the rim; rim contact is a hard error.
struct LatticeBundle {
  std::string kind;
  int dim = 0;
  int window = 0;
  GeometricGraph graph;
  std::map<VertexId, Polytope> dual_cells;
  std::map<std::pair<VertexId, VertexId>, double> facet_map;  // dual facet areas
  std::set<VertexId> core;                 // vertices with the full margin around them
  std::map<VertexId, int> orbit;           // fan-congruence class per vertex
  std::map<VertexId, std::vector<long>> coords;  // integer lattice coordinates
  std::vector<Vec> translations;           // generators of the translation group
  int expected_degree = 0;                 // 0 when orbit-dependent; see degree_of

  double facet_area(VertexId u, VertexId v) const;
  int degree_of(VertexId v) const;
  VertexId translate(VertexId v, const std::vector<long>& steps) const;
  // every vertex of omega has its full infinite-lattice degree; throws otherwise
  void require_interior(const std::set<VertexId>& omega) const;

  std::string to_json() const;

 private:
  mutable std::map<std::vector<long>, VertexId> pos_index_;
  void build_pos_index() const;
};

struct GridSpec {
  std::vector<double> lambdas;  // diagonal scaling per axis
};

LatticeBundle make_product_grid(const GridSpec& spec, int window);
// affine: 2x2 row-major deformation applied to the unit-triangle tessellation
LatticeBundle make_honeycomb(int window, std::optional<std::array<double, 4>> affine = {});
LatticeBundle make_triangular(int window);
LatticeBundle make_bcc(int window);
LatticeBundle make_fcc_subdivided(int window, double ell1 = 1.0);

LatticeBundle generate(const std::string& kind, int window);

// Orthogonal product; both inputs must pass the sufficiency verifier.
LatticeBundle product(const LatticeBundle& b1, const LatticeBundle& b2);

// Barycentric subdivision of every (simplicial) dual cell; each graph vertex
// becomes a (d+1)-clique. slack sets the clique spread in the reciprocal.
// Optional per-edge weight overrides are validated against the inherited
// facet/length/weight ratios.
LatticeBundle subdivide(const LatticeBundle& b, double slack = 0.25,
                        const std::map<std::pair<VertexId, VertexId>, EdgeData>* overrides = nullptr);

enum class ReferenceKind { hex_triangular, hex_honeycomb, rhombic_dodeca_bcc };

std::set<VertexId> reference_subset(const LatticeBundle& b, ReferenceKind kind, int k);

}  // namespace isoforge

#endif
