#include "isoforge/graph.hpp"

#include <algorithm>
#include <queue>

#include "isoforge/jsonout.hpp"
#include "isoforge/polytope.hpp"
#include "json.hpp"

namespace isoforge {

void GeometricGraph::add_vertex(VertexId id, Vec p) {
  if (dim == 0) dim = (int)p.size();
  if ((int)p.size() != dim) throw InputError("vertex dimension mismatch");
  vertices[id] = std::move(p);
  adj_.clear();
}

void GeometricGraph::add_edge(VertexId u, VertexId v, double A, double g) {
  if (u == v) throw InputError("self loop");
  if (!has_vertex(u) || !has_vertex(v)) throw InputError("edge endpoint missing");
  if (!(A > 0)) throw InputError("edge weight A must be positive");
  if (g < 0) throw InputError("edge cost g must be nonnegative");
  edges[{std::min(u, v), std::max(u, v)}] = {A, g};
  adj_.clear();
}

bool GeometricGraph::has_edge(VertexId u, VertexId v) const {
  return edges.count({std::min(u, v), std::max(u, v)}) > 0;
}

const EdgeData& GeometricGraph::edge(VertexId u, VertexId v) const {
  auto it = edges.find({std::min(u, v), std::max(u, v)});
  if (it == edges.end()) throw InputError("no such edge");
  return it->second;
}

const Vec& GeometricGraph::pos(VertexId id) const {
  auto it = vertices.find(id);
  if (it == vertices.end()) throw InputError("unknown vertex id " + std::to_string(id));
  return it->second;
}

void GeometricGraph::rebuild_adj() const {
  adj_.clear();
  for (const auto& [id, p] : vertices) adj_[id];
  for (const auto& [k, e] : edges) {
    adj_[k.first].push_back(k.second);
    adj_[k.second].push_back(k.first);
  }
  for (auto& [id, ns] : adj_) std::sort(ns.begin(), ns.end());
}

const std::vector<VertexId>& GeometricGraph::neighbors(VertexId id) const {
  if (adj_.empty()) rebuild_adj();
  auto it = adj_.find(id);
  if (it == adj_.end()) throw InputError("unknown vertex id " + std::to_string(id));
  return it->second;
}

void GeometricGraph::validate() const {
  for (const auto& [id, p] : vertices) {
    if ((int)p.size() != dim) throw InputError("vertex dimension mismatch");
    if (degree(id) < 1) throw InputError("isolated vertex " + std::to_string(id));
  }
  for (const auto& [k, e] : edges) {
    if (!(e.A > 0)) throw InputError("nonpositive edge weight");
    if (e.g < 0) throw InputError("negative edge cost");
  }
}

SubsetView subset_view(const GeometricGraph& g, const std::set<VertexId>& omega) {
  if (omega.empty()) throw InputError("empty omega");
  for (VertexId x : omega)
    if (!g.has_vertex(x)) throw InputError("omega vertex not in graph: " + std::to_string(x));
  SubsetView view;
  view.omega = omega;
  view.closure = omega;
  for (VertexId x : omega) {
    for (VertexId y : g.neighbors(x)) {
      view.closure.insert(y);
      if (!omega.count(y)) {
        view.boundary.push_back({x, y});
        view.weighted_boundary += g.edge(x, y).g;
      }
    }
  }
  std::sort(view.boundary.begin(), view.boundary.end(), [](const auto& a, const auto& b) {
    return std::tie(a.from, a.to) < std::tie(b.from, b.to);
  });
  // connected components of the induced subgraph
  std::set<VertexId> todo = omega;
  while (!todo.empty()) {
    std::set<VertexId> comp;
    std::queue<VertexId> q;
    q.push(*todo.begin());
    todo.erase(todo.begin());
    comp.insert(q.front());
    while (!q.empty()) {
      VertexId x = q.front();
      q.pop();
      for (VertexId y : g.neighbors(x)) {
        if (omega.count(y) && !comp.count(y)) {
          comp.insert(y);
          todo.erase(y);
          q.push(y);
        }
      }
    }
    view.components.push_back(comp);
  }
  std::map<VertexId, int> in_deg;
  for (const auto& e : view.boundary) in_deg[e.to]++;
  view.unique_inedges = true;
  for (const auto& [y, c] : in_deg)
    if (c != 1) view.unique_inedges = false;
  return view;
}

NeighborFan neighbor_fan(const GeometricGraph& g, VertexId x) {
  const auto& ns = g.neighbors(x);
  if (ns.empty()) throw InputError("isolated vertex has no fan");
  NeighborFan fan;
  fan.center = x;
  for (VertexId y : ns) {
    double A = g.edge(x, y).A;
    fan.vectors.push_back(scale(sub(g.pos(y), g.pos(x)), A * A));
  }
  return fan;
}

std::vector<VertexId> check_local_convexity(const GeometricGraph& g) {
  std::vector<VertexId> violators;
  for (const auto& [x, px] : g.vertices) {
    const auto& ns = g.neighbors(x);
    if (ns.empty()) continue;
    std::vector<Vec> pts;
    std::vector<std::vector<double>> dirs;
    for (VertexId y : ns) {
      pts.push_back(g.pos(y));
      dirs.push_back(sub(g.pos(y), px));
    }
    if (matrix_rank(dirs) < g.dim) {
      violators.push_back(x);
      continue;
    }
    // hull of the neighbors as a halfspace intersection: brute-force over d-subsets
    // of points, keeping planes with everything on one side
    std::vector<Halfspace> hull;
    const int d = g.dim;
    std::vector<int> c(d);
    for (int i = 0; i < d; ++i) c[i] = i;
    const int m = (int)pts.size();
    if (m < d) continue;
    while (true) {
      // plane through pts[c[0..d-1]]: normal orthogonal to the spanned directions
      std::vector<std::vector<double>> rows;
      for (int i = 1; i < d; ++i) rows.push_back(sub(pts[c[i]], pts[c[0]]));
      std::vector<Vec> ns_basis = null_space(rows.empty()
                                                 ? std::vector<std::vector<double>>{Vec(d, 0.0)}
                                                 : rows);
      for (const Vec& n : ns_basis) {
        double l = norm(n);
        if (l < 1e-10) continue;
        Vec u = scale(n, 1.0 / l);
        double b = dot(u, pts[c[0]]);
        bool all_le = true, all_ge = true;
        for (const auto& p : pts) {
          double v = dot(u, p);
          if (v > b + Tol::feas(b)) all_le = false;
          if (v < b - Tol::feas(b)) all_ge = false;
        }
        if (all_le) hull.push_back({u, b});
        if (all_ge) hull.push_back({scale(u, -1.0), -b});
      }
      int i = d - 1;
      while (i >= 0 && c[i] == m - d + i) --i;
      if (i < 0) break;
      ++c[i];
      for (int j = i + 1; j < d; ++j) c[j] = c[j - 1] + 1;
    }
    if (hull.empty()) continue;
    // candidates: every vertex within the circumscribed ball of the hull
    Vec center(g.dim, 0.0);
    for (const auto& p : pts) center = add(center, p);
    center = scale(center, 1.0 / m);
    double radius = 0;
    for (const auto& p : pts) radius = std::max(radius, dist(center, p));
    std::set<VertexId> allowed(ns.begin(), ns.end());
    allowed.insert(x);
    bool bad = false;
    for (const auto& [v, pv] : g.vertices) {
      if (allowed.count(v)) continue;
      if (dist(pv, center) > radius + 1e-9) continue;
      bool inside = true;
      for (const auto& h : hull)
        if (dot(h.normal, pv) > h.offset + Tol::feas(h.offset)) inside = false;
      if (inside) {
        bad = true;
        break;
      }
    }
    if (bad) violators.push_back(x);
  }
  return violators;
}

std::map<VertexId, Vec> check_linear_precision(const GeometricGraph& g) {
  std::map<VertexId, Vec> out;
  for (const auto& [x, px] : g.vertices) {
    Vec r(g.dim, 0.0);
    for (VertexId y : g.neighbors(x)) {
      double A = g.edge(x, y).A;
      r = add(r, scale(sub(g.pos(y), px), A * A));
    }
    out[x] = r;
  }
  return out;
}

std::string GeometricGraph::to_json() const {
  JsonWriter w;
  w.begin_object();
  w.key("dim").value(dim);
  w.key("edges").begin_array();
  for (const auto& [k, e] : edges) {
    w.begin_object();
    w.key("A").value(e.A);
    w.key("g").value(e.g);
    w.key("u").value((long long)k.first);
    w.key("v").value((long long)k.second);
    w.end_object();
  }
  w.end_array();
  w.key("vertices").begin_object();
  for (const auto& [id, p] : vertices) w.key(std::to_string(id)).value(p);
  w.end_object();
  w.end_object();
  return w.str();
}

GeometricGraph GeometricGraph::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  GeometricGraph g;
  g.dim = j.at("dim").get<int>();
  for (auto it = j.at("vertices").begin(); it != j.at("vertices").end(); ++it) {
    Vec p = it.value().get<Vec>();
    g.add_vertex(std::stoi(it.key()), p);
  }
  for (const auto& je : j.at("edges")) {
    g.add_edge(je.at("u").get<int>(), je.at("v").get<int>(),
               je.value("A", 1.0), je.value("g", 1.0));
  }
  g.validate();
  return g;
}

}  // namespace isoforge
