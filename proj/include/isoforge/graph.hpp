#ifndef ISOFORGE_GRAPH_HPP
#define ISOFORGE_GRAPH_HPP

#include <map>
#include <set>
#include <string>
#include <vector>

#include "isoforge/core.hpp"

namespace isoforge {

using VertexId = int;

struct EdgeData {
  double A = 1.0;  // weight, > 0 on existing edges
  double g = 1.0;  // cost, >= 0
};

// Weighted geometric graph: vertices embedded in R^d, symmetric per-edge weight A
// and cost g. Immutable by convention after construction.
class GeometricGraph {
 public:
  int dim = 0;
  std::map<VertexId, Vec> vertices;
  std::map<std::pair<VertexId, VertexId>, EdgeData> edges;  // key: (min,max)

  void add_vertex(VertexId id, Vec pos);
  void add_edge(VertexId u, VertexId v, double A = 1.0, double g = 1.0);
  bool has_vertex(VertexId id) const { return vertices.count(id) > 0; }
  bool has_edge(VertexId u, VertexId v) const;
  const EdgeData& edge(VertexId u, VertexId v) const;
  const Vec& pos(VertexId id) const;
  const std::vector<VertexId>& neighbors(VertexId id) const;
  int degree(VertexId id) const { return (int)neighbors(id).size(); }
  void validate() const;  // no self loops, positive A, finite degree >= 1

  std::string to_json() const;
  static GeometricGraph from_json(const std::string& text);

 private:
  mutable std::map<VertexId, std::vector<VertexId>> adj_;
  void rebuild_adj() const;
};

struct OrientedEdge {
  VertexId from;  // in omega
  VertexId to;    // outside omega
};

struct SubsetView {
  std::set<VertexId> omega;
  std::set<VertexId> closure;
  std::vector<OrientedEdge> boundary;          // oriented outward, sorted (from,to)
  double weighted_boundary = 0;                // sum of g over boundary edges
  std::vector<std::set<VertexId>> components;  // connected pieces of omega
  // true iff every outer vertex has exactly one in-boundary edge
  bool unique_inedges = false;
};

struct NeighborFan {
  VertexId center;
  std::vector<Vec> vectors;  // (y - x) * A(x,y)^2 per incident edge
};

SubsetView subset_view(const GeometricGraph& g, const std::set<VertexId>& omega);
NeighborFan neighbor_fan(const GeometricGraph& g, VertexId x);

// Vertices where conv(neighbors) captures a foreign vertex or the neighbor
// directions fail to span R^d.
std::vector<VertexId> check_local_convexity(const GeometricGraph& g);

// Residual r(x) = sum_y A^2(x,y)(y - x); zero iff the weighted Laplacian
// annihilates affine functions at x.
std::map<VertexId, Vec> check_linear_precision(const GeometricGraph& g);

}  // namespace isoforge

#endif
