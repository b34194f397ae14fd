#include "isoforge/lattices.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "isoforge/jsonout.hpp"
#include "isoforge/minkowski.hpp"
#include "isoforge/transport.hpp"

namespace isoforge {

namespace {

std::vector<long> quantize(const Vec& p, double unit = 1e-6) {
  std::vector<long> q(p.size());
  for (size_t i = 0; i < p.size(); ++i) q[i] = std::lround(p[i] / unit);
  return q;
}

// Classify vertices into fan-congruence orbits: same multiset of fan vectors.
void assign_orbits(LatticeBundle& b) {
  std::map<std::vector<std::vector<long>>, int> classes;
  for (const auto& [id, p] : b.graph.vertices) {
    if (b.graph.degree(id) == 0) continue;
    std::vector<std::vector<long>> sig;
    for (VertexId y : b.graph.neighbors(id)) {
      double A = b.graph.edge(id, y).A;
      sig.push_back(quantize(scale(sub(b.graph.pos(y), b.graph.pos(id)), A * A)));
    }
    std::sort(sig.begin(), sig.end());
    auto it = classes.find(sig);
    if (it == classes.end()) it = classes.emplace(sig, (int)classes.size()).first;
    b.orbit[id] = it->second;
  }
}

}  // namespace

double LatticeBundle::facet_area(VertexId u, VertexId v) const {
  auto it = facet_map.find({std::min(u, v), std::max(u, v)});
  if (it == facet_map.end()) throw InputError("no dual facet for this edge");
  return it->second;
}

int LatticeBundle::degree_of(VertexId v) const {
  if (expected_degree > 0) return expected_degree;
  return graph.degree(v);
}

void LatticeBundle::build_pos_index() const {
  pos_index_.clear();
  for (const auto& [id, p] : graph.vertices) pos_index_[quantize(p)] = id;
}

VertexId LatticeBundle::translate(VertexId v, const std::vector<long>& steps) const {
  if (translations.empty()) throw InputError("bundle has no translation group");
  if (pos_index_.empty()) build_pos_index();
  Vec p = graph.pos(v);
  for (size_t i = 0; i < translations.size() && i < steps.size(); ++i)
    p = add(p, scale(translations[i], (double)steps[i]));
  auto it = pos_index_.find(quantize(p));
  return it == pos_index_.end() ? -1 : it->second;
}

void LatticeBundle::require_interior(const std::set<VertexId>& omega) const {
  for (VertexId x : omega) {
    if (!graph.has_vertex(x)) throw InputError("subset vertex not materialized");
    if (!core.count(x))
      throw InputError("subset touches the window rim; enlarge the window");
  }
}

// ---------------------------------------------------------------------------
// product grid
// ---------------------------------------------------------------------------

LatticeBundle make_product_grid(const GridSpec& spec, int window) {
  if (window < 1) throw InputError("window must be >= 1");
  const int d = (int)spec.lambdas.size();
  if (d < 1 || d > 3) throw InputError("product grid supports d in 1..3");
  for (double l : spec.lambdas)
    if (!(l > 0)) throw InputError("grid scale must be positive");
  LatticeBundle b;
  b.kind = "product_grid";
  b.dim = d;
  b.window = window;
  b.expected_degree = 2 * d;
  const int W = window + 1;
  double cellvol = 1.0;
  for (double l : spec.lambdas) cellvol *= l;

  std::map<std::vector<long>, VertexId> ids;
  std::vector<std::vector<long>> keys;
  std::vector<long> k(d, -W);
  while (true) {
    keys.push_back(k);
    int i = d - 1;
    while (i >= 0 && k[i] == W) --i;
    if (i < 0) break;
    ++k[i];
    for (int j = i + 1; j < d; ++j) k[j] = -W;
  }
  for (const auto& key : keys) {
    VertexId id = (VertexId)ids.size();
    ids[key] = id;
    Vec p(d);
    for (int i = 0; i < d; ++i) p[i] = key[i] * spec.lambdas[i];
    b.graph.add_vertex(id, p);
    b.coords[id] = key;
    bool in_core = true;
    for (int i = 0; i < d; ++i)
      if (std::abs(key[i]) > window) in_core = false;
    if (in_core) b.core.insert(id);
  }
  for (const auto& [key, id] : ids) {
    for (int i = 0; i < d; ++i) {
      auto nk = key;
      nk[i]++;
      auto it = ids.find(nk);
      if (it == ids.end()) continue;
      // A so that the fan vector is the axis scaled by 1/lambda_i; g constant
      double A = 1.0 / spec.lambdas[i];
      b.graph.add_edge(id, it->second, A, 1.0);
      b.facet_map[{std::min(id, it->second), std::max(id, it->second)}] =
          d == 1 ? 1.0 : cellvol / spec.lambdas[i];
    }
  }
  for (const auto& [key, id] : ids) {
    std::vector<Halfspace> hs;
    Vec c = b.graph.pos(id);
    for (int i = 0; i < d; ++i) {
      for (double s : {1.0, -1.0}) {
        Vec n(d, 0.0);
        n[i] = s;
        hs.push_back({n, s * c[i] + spec.lambdas[i] / 2.0});
      }
    }
    b.dual_cells[id] = intersect_halfspaces(hs, d);
  }
  for (int i = 0; i < d; ++i) {
    Vec t(d, 0.0);
    t[i] = spec.lambdas[i];
    b.translations.push_back(t);
  }
  assign_orbits(b);
  return b;
}

// ---------------------------------------------------------------------------
// honeycomb (reciprocal of the unit-triangle tessellation, optionally deformed)
// ---------------------------------------------------------------------------

namespace {
struct TriKey {
  long m, n;
  int up;  // 1 = {P, P+a, P+b}, 0 = {P+a, P+b, P+a+b}
  bool operator<(const TriKey& o) const {
    return std::tie(m, n, up) < std::tie(o.m, o.n, o.up);
  }
};
}  // namespace

LatticeBundle make_honeycomb(int window, std::optional<std::array<double, 4>> affine) {
  if (window < 1) throw InputError("window must be >= 1");
  std::array<double, 4> M = affine.value_or(std::array<double, 4>{1, 0, 0, 1});
  double det = M[0] * M[3] - M[1] * M[2];
  if (std::abs(det) < 1e-12) throw InputError("singular affine deformation");
  // M^{-T}, used to place the reciprocal vertices
  std::array<double, 4> Mit = {M[3] / det, -M[2] / det, -M[1] / det, M[0] / det};
  auto apply = [](const std::array<double, 4>& T, const Vec& v) {
    return Vec{T[0] * v[0] + T[1] * v[1], T[2] * v[0] + T[3] * v[1]};
  };
  const Vec ea = {1.0, 0.0}, eb = {0.5, std::sqrt(3.0) / 2.0};

  LatticeBundle b;
  b.kind = "honeycomb";
  b.dim = 2;
  b.window = window;
  b.expected_degree = 3;
  const int W = window + 1;

  std::map<TriKey, VertexId> ids;
  for (long m = -W; m <= W; ++m)
    for (long n = -W; n <= W; ++n)
      for (int up = 1; up >= 0; --up) {
        TriKey key{m, n, up};
        VertexId id = (VertexId)ids.size();
        ids[key] = id;
        Vec P = add(scale(ea, (double)m), scale(eb, (double)n));
        Vec bary = up ? add(P, scale(add(ea, eb), 1.0 / 3.0))
                      : add(P, scale(add(ea, eb), 2.0 / 3.0));
        b.graph.add_vertex(id, apply(Mit, bary));
        b.coords[id] = {m, n, up};
        if (std::abs(m) <= window - 1 && std::abs(n) <= window - 1) b.core.insert(id);
        // dual cell: the deformed triangle itself
        std::vector<Vec> tv;
        if (up)
          tv = {P, add(P, ea), add(P, eb)};
        else
          tv = {add(P, ea), add(P, eb), add(add(P, ea), eb)};
        for (auto& v : tv) v = apply(M, v);
        b.dual_cells[id] = simplex_polytope(tv);
      }

  // Weights are derived from the deformed geometry with constant ratios
  // F/(l A^2) and F l / g^2, normalized so that A <= 1 and g <= 1 edgewise
  // (A = g = 1 for the identity deformation). This keeps sum A*g <= sum g on
  // every boundary, so the standard Laplacian bound stays solvable.
  const std::array<Vec, 3> shared = {sub(eb, ea), eb, ea};
  std::array<double, 3> Fc{}, Lc{};
  {
    Vec up_bary = apply(Mit, scale(add(ea, eb), 1.0 / 3.0));
    std::array<Vec, 3> down_bary = {
        apply(Mit, scale(add(ea, eb), 2.0 / 3.0)),
        apply(Mit, sub(scale(add(ea, eb), 2.0 / 3.0), ea)),
        apply(Mit, sub(scale(add(ea, eb), 2.0 / 3.0), eb))};
    for (int k = 0; k < 3; ++k) {
      Fc[k] = norm(apply(M, shared[k]));
      Lc[k] = dist(up_bary, down_bary[k]);
    }
  }
  double C1 = 0, C2 = 0;
  for (int k = 0; k < 3; ++k) {
    C1 = std::max(C1, Fc[k] / Lc[k]);
    C2 = std::max(C2, Fc[k] * Lc[k]);
  }
  auto link = [&](TriKey ku, TriKey kd, int cls) {
    auto iu = ids.find(ku), idn = ids.find(kd);
    if (iu == ids.end() || idn == ids.end()) return;
    VertexId u = iu->second, v = idn->second;
    double F = Fc[cls];
    double ell = dist(b.graph.pos(u), b.graph.pos(v));
    double A = std::sqrt(F / (C1 * ell));
    double g = std::sqrt(F * ell / C2);
    b.graph.add_edge(u, v, A, g);
    b.facet_map[{std::min(u, v), std::max(u, v)}] = F;
  };
  for (const auto& [key, id] : ids) {
    if (!key.up) continue;
    link(key, {key.m, key.n, 0}, 0);
    link(key, {key.m - 1, key.n, 0}, 1);
    link(key, {key.m, key.n - 1, 0}, 2);
  }
  b.translations = {apply(Mit, ea), apply(Mit, eb)};
  assign_orbits(b);
  return b;
}

// ---------------------------------------------------------------------------
// triangular (1-skeleton of the unit-triangle tessellation; cells are the
// Voronoi hexagons)
// ---------------------------------------------------------------------------

LatticeBundle make_triangular(int window) {
  if (window < 1) throw InputError("window must be >= 1");
  const Vec ea = {1.0, 0.0}, eb = {0.5, std::sqrt(3.0) / 2.0};
  LatticeBundle b;
  b.kind = "triangular";
  b.dim = 2;
  b.window = window;
  b.expected_degree = 6;
  const int W = window + 1;
  std::map<std::pair<long, long>, VertexId> ids;
  auto hexnorm = [](long m, long n) {
    return std::max({std::labs(m), std::labs(n), std::labs(m + n)});
  };
  for (long m = -W; m <= W; ++m)
    for (long n = -W; n <= W; ++n) {
      if (hexnorm(m, n) > W) continue;
      VertexId id = (VertexId)ids.size();
      ids[{m, n}] = id;
      Vec p = add(scale(ea, (double)m), scale(eb, (double)n));
      b.graph.add_vertex(id, p);
      b.coords[id] = {m, n};
      if (hexnorm(m, n) <= window) b.core.insert(id);
    }
  const std::vector<std::pair<long, long>> dirs = {{1, 0}, {0, 1}, {-1, 1}};
  for (const auto& [mn, id] : ids) {
    for (const auto& dd : dirs) {
      auto it = ids.find({mn.first + dd.first, mn.second + dd.second});
      if (it == ids.end()) continue;
      b.graph.add_edge(id, it->second, 1.0, 1.0);
      b.facet_map[{std::min(id, it->second), std::max(id, it->second)}] =
          1.0 / std::sqrt(3.0);
    }
  }
  for (const auto& [mn, id] : ids) {
    std::vector<Halfspace> hs;
    Vec c = b.graph.pos(id);
    for (const auto& dd : dirs) {
      Vec u = add(scale(ea, (double)dd.first), scale(eb, (double)dd.second));
      for (double s : {1.0, -1.0}) {
        Vec n = scale(u, s);
        hs.push_back({n, dot(n, c) + 0.5});
      }
    }
    b.dual_cells[id] = intersect_halfspaces(hs, 2);
  }
  b.translations = {ea, eb};
  assign_orbits(b);
  return b;
}

// ---------------------------------------------------------------------------
// BCC: 1-skeleton of the Voronoi diagram (truncated octahedra) of the lattice
// {0,(2,2,2)} + 4Z^3; dual cells are the Delone disphenoids. This scale makes
// the edge vectors have length sqrt(2).
// ---------------------------------------------------------------------------

LatticeBundle make_bcc(int window) {
  if (window < 1) throw InputError("window must be >= 1");
  LatticeBundle b;
  b.kind = "bcc";
  b.dim = 3;
  b.window = window;
  b.expected_degree = 4;
  const long R = 4 * (window + 2);

  std::vector<Vec> lattice;
  for (long i = -R; i <= R; i += 4)
    for (long j = -R; j <= R; j += 4)
      for (long k = -R; k <= R; k += 4) {
        lattice.push_back({(double)i, (double)j, (double)k});
        lattice.push_back({(double)i + 2, (double)j + 2, (double)k + 2});
      }

  // Voronoi vertices: permutations of (0, +-1, +-2) around each lattice point.
  std::vector<Vec> offs;
  const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  for (const auto& pm : perms)
    for (double s1 : {1.0, -1.0})
      for (double s2 : {1.0, -1.0}) {
        Vec base = {0.0, s1 * 1.0, s2 * 2.0};
        Vec o(3);
        o[pm[0]] = base[0];
        o[pm[1]] = base[1];
        o[pm[2]] = base[2];
        bool dup = false;
        for (const auto& e : offs)
          if (dist(e, o) < 1e-9) dup = true;
        if (!dup) offs.push_back(o);
      }

  const double rim = 4.0 * (window + 1);
  std::map<std::vector<long>, VertexId> ids;
  std::vector<std::vector<Vec>> cell_pts;  // 4 lattice points of each disphenoid
  for (const auto& lp : lattice) {
    for (const auto& o : offs) {
      Vec w = add(lp, o);
      if (std::abs(w[0]) > rim || std::abs(w[1]) > rim || std::abs(w[2]) > rim) continue;
      auto key = quantize(w);
      if (ids.count(key)) continue;
      // the four nearest lattice points (circumradius sqrt(5)) span the dual cell
      std::vector<Vec> four;
      for (const auto& q : lattice)
        if (std::abs(dist(q, w) - std::sqrt(5.0)) < 1e-9) four.push_back(q);
      if (four.size() != 4) continue;  // rim vertex with truncated star
      VertexId id = (VertexId)ids.size();
      ids[key] = id;
      b.graph.add_vertex(id, w);
      b.coords[id] = key;
      cell_pts.push_back(four);
      if (std::abs(w[0]) <= 4.0 * window && std::abs(w[1]) <= 4.0 * window &&
          std::abs(w[2]) <= 4.0 * window)
        b.core.insert(id);
    }
  }
  // adjacency: disphenoids sharing a triangular face
  std::vector<VertexId> order;
  for (const auto& [k, id] : ids) order.push_back(id);
  auto shares_face = [&](VertexId u, VertexId v, std::vector<Vec>& tri) {
    tri.clear();
    for (const auto& p : cell_pts[u])
      for (const auto& q : cell_pts[v])
        if (dist(p, q) < 1e-9) {
          tri.push_back(p);
          break;
        }
    return tri.size() == 3;
  };
  for (VertexId u : order)
    for (VertexId v : order) {
      if (v <= u) continue;
      if (dist(b.graph.pos(u), b.graph.pos(v)) > std::sqrt(2.0) + 1e-6) continue;
      std::vector<Vec> tri;
      if (!shares_face(u, v, tri)) continue;
      b.graph.add_edge(u, v, 1.0, 1.0);
      // area of the shared triangle
      Vec e1 = sub(tri[1], tri[0]), e2 = sub(tri[2], tri[0]);
      Vec cr = {e1[1] * e2[2] - e1[2] * e2[1], e1[2] * e2[0] - e1[0] * e2[2],
                e1[0] * e2[1] - e1[1] * e2[0]};
      b.facet_map[{u, v}] = 0.5 * norm(cr);
    }
  for (VertexId id : order) b.dual_cells[id] = simplex_polytope(cell_pts[id]);
  b.translations = {{4, 0, 0}, {0, 4, 0}, {2, 2, 2}};
  assign_orbits(b);
  return b;
}

// ---------------------------------------------------------------------------
// FCC with subdivided octahedra, built from the plane arrangement
//   <v, x> in Z for v in {(1/2,0,0),(0,1/2,0),(1/2,+-1/2,+-1/2)}.
// Reciprocal vertices come from a staircase lifting whose jumps across the two
// axis families are ell2 = 1 and across the four diagonal families ell1.
// ---------------------------------------------------------------------------

LatticeBundle make_fcc_subdivided(int window, double ell1) {
  if (window < 1) throw InputError("window must be >= 1");
  if (!(ell1 > 0)) throw InputError("ell1 must be positive");
  LatticeBundle b;
  b.kind = "fcc_subdivided";
  b.dim = 3;
  b.window = window;
  b.expected_degree = 4;

  // axis families cut every octahedron through its center into four quarters;
  // diagonal families carry the tetrahedron/octahedron interfaces
  const std::vector<Vec> fams = {{1.0, 0, 0},        {0, 1.0, 0},
                                 {0.5, 0.5, 0.5},    {0.5, -0.5, 0.5},
                                 {0.5, 0.5, -0.5},   {0.5, -0.5, -0.5}};
  const std::vector<double> jump = {1.0, 1.0, ell1, ell1, ell1, ell1};
  // conststuf pins ell*A^2 and g^2/ell: F1 = sqrt(3)/2, F2 = 1
  const double A1 = std::sqrt(std::sqrt(3.0) / 2.0 / ell1);
  const double g1 = std::sqrt(std::sqrt(3.0) / 2.0 * ell1);

  auto cell_key = [&](const Vec& x) {
    std::vector<long> key(6);
    for (int i = 0; i < 6; ++i) key[i] = (long)std::floor(dot(fams[i], x));
    return key;
  };
  auto cell_poly = [&](const std::vector<long>& key) {
    std::vector<Halfspace> hs;
    for (int i = 0; i < 6; ++i) {
      hs.push_back({fams[i], (double)key[i] + 1.0});
      hs.push_back({scale(fams[i], -1.0), -(double)key[i]});
    }
    return intersect_halfspaces(hs, 3);
  };
  auto recip_pos = [&](const std::vector<long>& key) {
    Vec p(3, 0.0);
    for (int i = 0; i < 6; ++i) {
      Vec nh = scale(fams[i], 1.0 / norm(fams[i]));
      p = add(p, scale(nh, jump[i] * ((double)key[i] + 0.5)));
    }
    return p;
  };

  const double rim = 2.0 * (window + 1);
  std::map<std::vector<long>, VertexId> ids;
  std::map<VertexId, Polytope> cells;
  std::queue<std::vector<long>> q;
  auto seed = cell_key({0.51, 0.27, 0.13});
  q.push(seed);
  std::set<std::vector<long>> seen;
  seen.insert(seed);
  while (!q.empty()) {
    auto key = q.front();
    q.pop();
    Polytope cell = cell_poly(key);
    if (cell.vertices.empty() || cell.unbounded) continue;
    Vec c = cell.centroid();
    if (std::abs(c[0]) > rim || std::abs(c[1]) > rim || std::abs(c[2]) > rim) continue;
    VertexId id = (VertexId)ids.size();
    ids[key] = id;
    cells[id] = cell;
    for (int i = 0; i < 6; ++i) {
      for (long step : {-1L, 1L}) {
        // only step across planes that carry a real facet of this cell
        Vec nh = scale(fams[i], 1.0 / norm(fams[i]));
        bool has_facet = false;
        for (const auto& f : cell.facets)
          if (dist(f.normal, scale(nh, (double)step)) < 1e-8) has_facet = true;
        if (!has_facet) continue;
        auto nk = key;
        nk[i] += step;
        if (seen.insert(nk).second) q.push(nk);
      }
    }
  }
  for (const auto& [key, id] : ids) {
    b.graph.add_vertex(id, recip_pos(key));
    b.coords[id] = key;
    b.dual_cells[id] = cells[id];
    Vec c = cells[id].centroid();
    if (std::abs(c[0]) <= 2.0 * window && std::abs(c[1]) <= 2.0 * window &&
        std::abs(c[2]) <= 2.0 * window)
      b.core.insert(id);
  }
  for (const auto& [key, id] : ids) {
    for (int i = 0; i < 6; ++i) {
      auto nk = key;
      nk[i] += 1;
      auto it = ids.find(nk);
      if (it == ids.end()) continue;
      // shared facet must exist in the cell
      Vec nh = scale(fams[i], 1.0 / norm(fams[i]));
      double area = 0;
      for (const auto& f : cells[id].facets)
        if (dist(f.normal, nh) < 1e-8) area = f.area;
      if (area <= 0) continue;
      bool diag = i >= 2;
      b.graph.add_edge(id, it->second, diag ? A1 : 1.0, diag ? g1 : 1.0);
      b.facet_map[{std::min(id, it->second), std::max(id, it->second)}] = area;
    }
  }
  // no translation group exposed: reciprocal positions depend on ell1
  assign_orbits(b);
  return b;
}

LatticeBundle generate(const std::string& kind, int window) {
  if (kind == "honeycomb") return make_honeycomb(window);
  if (kind == "triangular") return make_triangular(window);
  if (kind == "bcc") return make_bcc(window);
  if (kind == "fcc" || kind == "fcc_subdivided") return make_fcc_subdivided(window);
  if (kind == "grid" || kind == "grid2") return make_product_grid({{1.0, 1.0}}, window);
  if (kind == "grid1") return make_product_grid({{1.0}}, window);
  if (kind == "grid3") return make_product_grid({{1.0, 1.0, 1.0}}, window);
  throw InputError("unknown lattice kind: " + kind);
}

// ---------------------------------------------------------------------------
// product
// ---------------------------------------------------------------------------

LatticeBundle product(const LatticeBundle& b1, const LatticeBundle& b2) {
  for (const LatticeBundle* bp : {&b1, &b2}) {
    SufficiencyReport rep = verify_sufficiency(*bp);
    if (!rep.pass())
      throw InputError("product precondition failed on " + bp->kind + ": " +
                       rep.first_failure());
  }
  double C1 = verify_sufficiency(b1).c_value;
  double C2 = verify_sufficiency(b2).c_value;

  LatticeBundle b;
  b.kind = b1.kind + "x" + b2.kind;
  b.dim = b1.dim + b2.dim;
  b.window = std::min(b1.window, b2.window);
  b.expected_degree = (b1.expected_degree > 0 && b2.expected_degree > 0)
                          ? b1.expected_degree + b2.expected_degree
                          : 0;
  std::vector<VertexId> v1, v2;
  for (const auto& [id, p] : b1.graph.vertices) v1.push_back(id);
  for (const auto& [id, p] : b2.graph.vertices) v2.push_back(id);
  const long N2 = (long)v2.size() + 1;
  auto pid = [&](VertexId a, VertexId c) { return (VertexId)(a * N2 + c); };
  for (VertexId a : v1)
    for (VertexId c : v2) {
      Vec p = b1.graph.pos(a);
      const Vec& q = b2.graph.pos(c);
      p.insert(p.end(), q.begin(), q.end());
      VertexId id = pid(a, c);
      b.graph.add_vertex(id, p);
      if (b1.core.count(a) && b2.core.count(c)) b.core.insert(id);
      b.dual_cells[id] = polytope_product(b1.dual_cells.at(a), b2.dual_cells.at(c));
      std::vector<long> co = b1.coords.count(a) ? b1.coords.at(a) : std::vector<long>{};
      if (b2.coords.count(c)) {
        auto c2 = b2.coords.at(c);
        co.insert(co.end(), c2.begin(), c2.end());
      }
      b.coords[id] = co;
    }
  const double s1 = std::sqrt(C2), s2 = std::sqrt(C1);  // factors on sides 1 and 2
  for (const auto& [k, e] : b1.graph.edges) {
    for (VertexId c : v2) {
      VertexId u = pid(k.first, c), v = pid(k.second, c);
      b.graph.add_edge(u, v, s1 * e.A, s1 * e.g);
      double vol2 = b2.dual_cells.at(c).volume;
      b.facet_map[{std::min(u, v), std::max(u, v)}] = b1.facet_area(k.first, k.second) * vol2;
    }
  }
  for (const auto& [k, e] : b2.graph.edges) {
    for (VertexId a : v1) {
      VertexId u = pid(a, k.first), v = pid(a, k.second);
      b.graph.add_edge(u, v, s2 * e.A, s2 * e.g);
      double vol1 = b1.dual_cells.at(a).volume;
      b.facet_map[{std::min(u, v), std::max(u, v)}] = b2.facet_area(k.first, k.second) * vol1;
    }
  }
  for (const auto& t : b1.translations) {
    Vec tt = t;
    tt.resize(b.dim, 0.0);
    b.translations.push_back(tt);
  }
  for (const auto& t : b2.translations) {
    Vec tt(b1.dim, 0.0);
    tt.insert(tt.end(), t.begin(), t.end());
    b.translations.push_back(tt);
  }
  assign_orbits(b);
  return b;
}

// ---------------------------------------------------------------------------
// barycentric subdivision
// ---------------------------------------------------------------------------

LatticeBundle subdivide(const LatticeBundle& b, double slack,
                        const std::map<std::pair<VertexId, VertexId>, EdgeData>* overrides) {
  if (!(slack > 0)) throw InputError("slack must be positive");
  const int d = b.dim;
  for (const auto& [id, cell] : b.dual_cells)
    if ((int)cell.vertices.size() != d + 1)
      throw InputError("subdivide requires simplicial dual cells");

  // inherited ratio constants from the parent bundle
  double C1 = 0, C2 = 0;
  {
    const auto& [k, e] = *b.graph.edges.begin();
    double F = b.facet_area(k.first, k.second);
    double ell = dist(b.graph.pos(k.first), b.graph.pos(k.second));
    C1 = F / (ell * e.A * e.A);
    C2 = e.g > 0 ? F * ell / (e.g * e.g) : 0;
  }

  LatticeBundle nb;
  nb.kind = b.kind + "_subdivided";
  nb.dim = d;
  nb.window = b.window;
  nb.expected_degree = d + 1;

  struct SubVert {
    VertexId parent;
    int opposite;  // index of the parent-cell vertex replaced by the centroid
  };
  std::map<std::pair<VertexId, int>, VertexId> ids;
  std::map<VertexId, SubVert> back;

  auto facet_of = [&](const Polytope& cell, int skip, Vec& unit_out, double& hgt,
                      std::vector<Vec>& fverts) {
    // facet of the simplex opposite vertex `skip`, its outward normal, and the
    // distance from the centroid to it
    fverts.clear();
    for (int i = 0; i <= d; ++i)
      if (i != skip) fverts.push_back(cell.vertices[i]);
    std::vector<std::vector<double>> rows;
    for (size_t i = 1; i < fverts.size(); ++i) rows.push_back(sub(fverts[i], fverts[0]));
    auto ns = null_space(rows);
    Vec n = scale(ns[0], 1.0 / norm(ns[0]));
    if (dot(n, cell.vertices[skip]) > dot(n, fverts[0])) n = scale(n, -1.0);
    unit_out = n;
    Vec m = cell.centroid();
    hgt = std::abs(dot(n, fverts[0]) - dot(n, m));
  };

  for (const auto& [pid, cell] : b.dual_cells) {
    Vec m = cell.centroid();
    for (int i = 0; i <= d; ++i) {
      VertexId id = (VertexId)ids.size();
      ids[{pid, i}] = id;
      back[id] = {pid, i};
      Vec nout;
      double h;
      std::vector<Vec> fv;
      facet_of(cell, i, nout, h, fv);
      // reciprocal position: lifting raised by `slack` at the centroid
      Vec p = add(b.graph.pos(pid), scale(nout, -slack / h));
      nb.graph.add_vertex(id, p);
      std::vector<Vec> sv = fv;
      sv.push_back(m);
      nb.dual_cells[id] = simplex_polytope(sv);
      if (b.core.count(pid)) nb.core.insert(id);
    }
  }

  auto add_edge_checked = [&](VertexId u, VertexId v, double F) {
    double ell = dist(nb.graph.pos(u), nb.graph.pos(v));
    double A = std::sqrt(F / (C1 * ell));
    double g = C2 > 0 ? std::sqrt(F * ell / C2) : 1.0;
    if (overrides) {
      auto it = overrides->find({std::min(u, v), std::max(u, v)});
      if (it != overrides->end()) {
        A = it->second.A;
        g = it->second.g;
        double r1 = F / (ell * A * A);
        if (!close_rel(r1, C1, 1e-9))
          throw InputError("override violates the facet/length/weight ratio: " +
                           std::to_string(r1) + " vs " + std::to_string(C1));
        if (g > 0 && C2 > 0) {
          double r2 = F * ell / (g * g);
          if (!close_rel(r2, C2, 1e-9))
            throw InputError("override violates the facet*length/cost ratio: " +
                             std::to_string(r2) + " vs " + std::to_string(C2));
        }
      }
    }
    nb.graph.add_edge(u, v, A, g);
    nb.facet_map[{std::min(u, v), std::max(u, v)}] = F;
  };

  // intra-cell cliques: sub-simplices i and j share conv({m} u common face)
  for (const auto& [pid, cell] : b.dual_cells) {
    Vec m = cell.centroid();
    for (int i = 0; i <= d; ++i)
      for (int j = i + 1; j <= d; ++j) {
        std::vector<Vec> shared;
        shared.push_back(m);
        for (int t = 0; t <= d; ++t)
          if (t != i && t != j) shared.push_back(cell.vertices[t]);
        double F;
        if (d == 2) {
          F = dist(shared[0], shared[1]);
        } else {
          // triangle area (d = 3)
          Vec e1 = sub(shared[1], shared[0]), e2 = sub(shared[2], shared[0]);
          Vec cr = {e1[1] * e2[2] - e1[2] * e2[1], e1[2] * e2[0] - e1[0] * e2[2],
                    e1[0] * e2[1] - e1[1] * e2[0]};
          F = 0.5 * norm(cr);
        }
        add_edge_checked(ids.at({pid, i}), ids.at({pid, j}), F);
      }
  }
  // cross edges along the original adjacency
  for (const auto& [k, e] : b.graph.edges) {
    const Polytope& cu = b.dual_cells.at(k.first);
    const Polytope& cv = b.dual_cells.at(k.second);
    // find the opposite-vertex indices whose facets coincide
    int iu = -1, iv = -1;
    for (int i = 0; i <= d && iu < 0; ++i) {
      std::set<std::vector<long>> fu;
      for (int t = 0; t <= d; ++t)
        if (t != i) fu.insert(quantize(cu.vertices[t]));
      for (int j = 0; j <= d; ++j) {
        std::set<std::vector<long>> fv;
        for (int t = 0; t <= d; ++t)
          if (t != j) fv.insert(quantize(cv.vertices[t]));
        if (fu == fv) {
          iu = i;
          iv = j;
          break;
        }
      }
    }
    if (iu < 0) throw InvariantViolation("adjacent dual cells share no facet");
    add_edge_checked(ids.at({k.first, iu}), ids.at({k.second, iv}),
                     b.facet_area(k.first, k.second));
  }
  assign_orbits(nb);
  return nb;
}

// ---------------------------------------------------------------------------
// reference subsets
// ---------------------------------------------------------------------------

std::set<VertexId> reference_subset(const LatticeBundle& b, ReferenceKind kind, int k) {
  if (k < 1) throw InputError("k must be >= 1");
  std::set<VertexId> out;
  if (kind == ReferenceKind::hex_triangular) {
    if (b.kind != "triangular") throw InputError("hex_triangular needs a triangular bundle");
    if (k > b.window - 1) throw InputError("window too small for this k");
    for (const auto& [id, co] : b.coords) {
      long m = co[0], n = co[1];
      if (std::max({std::labs(m), std::labs(n), std::labs(m + n)}) <= k) out.insert(id);
    }
  } else if (kind == ReferenceKind::hex_honeycomb) {
    if (b.kind != "honeycomb") throw InputError("hex_honeycomb needs a honeycomb bundle");
    if (k > b.window - 1) throw InputError("window too small for this k");
    // triangles whose three lattice corners lie in the hexagon of radius k
    auto inhex = [&](long m, long n) {
      return std::max({std::labs(m), std::labs(n), std::labs(m + n)}) <= k;
    };
    for (const auto& [id, co] : b.coords) {
      long m = co[0], n = co[1], up = co[2];
      bool in;
      if (up)
        in = inhex(m, n) && inhex(m + 1, n) && inhex(m, n + 1);
      else
        in = inhex(m + 1, n) && inhex(m, n + 1) && inhex(m + 1, n + 1);
      if (in) out.insert(id);
    }
  } else {
    if (b.kind != "bcc") throw InputError("rhombic_dodeca_bcc needs a bcc bundle");
    if (k > b.window - 1) throw InputError("window too small for this k");
    // cells whose disphenoid lies in the k-dilated Delone star (a rhombic
    // dodecahedron with |x_i +- x_j| <= 4k)
    for (const auto& [id, cell] : b.dual_cells) {
      bool in = true;
      for (const auto& v : cell.vertices) {
        for (int i = 0; i < 3 && in; ++i)
          for (int j = i + 1; j < 3; ++j) {
            if (std::abs(v[i] + v[j]) > 4.0 * k + 1e-9 ||
                std::abs(v[i] - v[j]) > 4.0 * k + 1e-9) {
              in = false;
              break;
            }
          }
        if (!in) break;
      }
      if (in) out.insert(id);
    }
  }
  if (out.empty()) throw InputError("empty reference subset");
  b.require_interior(out);
  return out;
}

std::string LatticeBundle::to_json() const {
  JsonWriter w;
  w.begin_object();
  w.key("cells").begin_object();
  for (const auto& [id, c] : dual_cells) {
    w.key(std::to_string(id));
    // embed the polytope json verbatim
    w.begin_object();
    w.key("volume").value(c.volume);
    w.key("vertices").begin_array();
    for (const auto& v : c.vertices) w.value(v);
    w.end_array();
    w.end_object();
  }
  w.end_object();
  w.key("dim").value(dim);
  w.key("facets").begin_array();
  for (const auto& [k, a] : facet_map) {
    w.begin_object();
    w.key("area").value(a);
    w.key("u").value((long long)k.first);
    w.key("v").value((long long)k.second);
    w.end_object();
  }
  w.end_array();
  w.key("graph_edges").value((long long)graph.edges.size());
  w.key("graph_vertices").value((long long)graph.vertices.size());
  w.key("kind").value(kind);
  w.key("window").value(window);
  w.end_object();
  return w.str();
}

}  // namespace isoforge
