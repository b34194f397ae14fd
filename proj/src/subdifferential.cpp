#include "isoforge/subdifferential.hpp"

#include <algorithm>
#include <cmath>

#include "isoforge/jsonout.hpp"
#include "isoforge/minkowski.hpp"
#include "isoforge/pde.hpp"

namespace isoforge {

Polytope prox_subdifferential(const GeometricGraph& g, const std::set<VertexId>& omega,
                              const std::map<VertexId, double>& u, VertexId x) {
  if (!omega.count(x)) throw InputError("x must lie in omega");
  std::vector<Halfspace> hs;
  double ux = u.at(x);
  for (VertexId z : g.neighbors(x))
    hs.push_back({sub(g.pos(z), g.pos(x)), u.at(z) - ux});
  return intersect_halfspaces(hs, g.dim);
}

Polytope full_subdifferential(const GeometricGraph& g, const std::set<VertexId>& omega,
                              const std::map<VertexId, double>& u, VertexId x) {
  if (!omega.count(x)) throw InputError("x must lie in omega");
  SubsetView view = subset_view(g, omega);
  std::vector<Halfspace> hs;
  double ux = u.at(x);
  for (VertexId z : view.closure) {
    if (z == x) continue;
    hs.push_back({sub(g.pos(z), g.pos(x)), u.at(z) - ux});
  }
  return intersect_halfspaces(hs, g.dim);
}

Polytope target_polytope(const GeometricGraph& g, const std::set<VertexId>& omega,
                         bool lattice_wide) {
  std::vector<Halfspace> hs;
  if (lattice_wide) {
    for (const auto& [k, e] : g.edges) {
      Vec d = sub(g.pos(k.second), g.pos(k.first));
      hs.push_back({d, e.g / e.A});
      hs.push_back({scale(d, -1.0), e.g / e.A});
    }
  } else {
    SubsetView view = subset_view(g, omega);
    if (view.boundary.empty()) throw InputError("omega has empty boundary");
    for (const auto& e : view.boundary) {
      const auto& ed = g.edge(e.from, e.to);
      hs.push_back({sub(g.pos(e.to), g.pos(e.from)), ed.g / ed.A});
    }
  }
  return intersect_halfspaces(hs, g.dim);
}

namespace {

// cache C_{V_x} per fan signature; lattices repeat a handful of fans
double cached_c_constant(const GeometricGraph& g, VertexId x,
                         std::map<std::vector<std::vector<long>>, double>& cache) {
  std::vector<std::vector<long>> sig;
  std::vector<Vec> fan;
  for (VertexId y : g.neighbors(x)) {
    double A = g.edge(x, y).A;
    Vec v = scale(sub(g.pos(y), g.pos(x)), A * A);
    fan.push_back(v);
    std::vector<long> q(v.size());
    for (size_t i = 0; i < v.size(); ++i) q[i] = std::lround(v[i] * 1e9);
    sig.push_back(q);
  }
  std::sort(sig.begin(), sig.end());
  auto it = cache.find(sig);
  if (it != cache.end()) return it->second;
  MinkowskiSolution ms = minkowski_constant(fan);
  double c = ms.feasible ? ms.constant : std::numeric_limits<double>::infinity();
  cache[sig] = c;
  return c;
}

}  // namespace

bool ChainReport::monotone(double rel) const {
  double slack = rel * std::max({std::abs(vol_union), std::abs(sum_prox), std::abs(rhs), 1e-12});
  if (!hg_unbounded && vol_Hg > vol_union + slack) return false;
  return vol_union <= sum_prox + slack && sum_prox <= sum_bound + slack &&
         sum_bound <= rhs + slack;
}

ChainReport chain_report(const GeometricGraph& g, const std::set<VertexId>& omega,
                         const std::map<VertexId, double>& u, int mc_samples) {
  SubsetView view = subset_view(g, omega);
  const int d = g.dim;
  ChainReport rep;

  // precondition: lap_A u <= #_g/#omega and the Hamamuki boundary condition
  const double bound = view.weighted_boundary / (double)omega.size();
  auto lap = laplacian(g, omega, u);
  double worst = 0;
  for (VertexId x : omega) worst = std::max(worst, lap[x] - bound);
  if (worst > 1e-9 * (1.0 + std::abs(bound)))
    throw InputError("u violates the Laplacian bound by " + std::to_string(worst));
  std::map<VertexId, std::vector<double>> slacks;
  for (const auto& e : view.boundary) {
    const auto& ed = g.edge(e.from, e.to);
    slacks[e.to].push_back(u.at(e.to) - u.at(e.from) - ed.g / ed.A);
  }
  rep.boundary_saturated = true;
  for (const auto& [y, ss] : slacks) {
    double amin = std::numeric_limits<double>::infinity();
    bool pos = false, neg = false;
    for (double s : ss) {
      amin = std::min(amin, std::abs(s));
      if (s > 1e-9) pos = true;
      if (s < -1e-9) neg = true;
    }
    if (amin > 1e-8 * (1.0 + std::abs(u.at(y))))
      throw InputError("no saturated boundary edge at outer vertex " + std::to_string(y));
    if (pos || neg) rep.boundary_saturated = false;
    rep.slack_direction[y] = pos && !neg ? 1 : (neg && !pos ? -1 : 0);
  }

  Polytope hg = target_polytope(g, omega, false);
  rep.hg_unbounded = hg.unbounded;
  rep.vol_Hg = hg.volume;

  std::map<std::vector<std::vector<long>>, double> ccache;
  std::vector<Polytope> cells;
  std::vector<VertexId> order(omega.begin(), omega.end());
  double cmax = 0;
  for (VertexId x : order) {
    Polytope full = full_subdifferential(g, omega, u, x);
    Polytope prox = prox_subdifferential(g, omega, u, x);
    double fv = full.unbounded ? std::numeric_limits<double>::infinity() : full.volume;
    double pv = prox.unbounded ? std::numeric_limits<double>::infinity() : prox.volume;
    rep.cell_volumes[x] = fv;
    rep.prox_volumes[x] = pv;
    rep.vol_union += fv;
    rep.sum_prox += pv;
    double c = cached_c_constant(g, x, ccache);
    rep.c_constants[x] = c;
    rep.laplacians[x] = lap[x];
    cmax = std::max(cmax, c);
    rep.sum_bound += c * std::pow(std::max(lap[x], 0.0), d);
    cells.push_back(std::move(full));
  }
  rep.rhs = cmax * std::pow(view.weighted_boundary, d) /
            std::pow((double)omega.size(), d - 1);

  double lmin = std::numeric_limits<double>::infinity(), lmax = -lmin;
  double cmin = std::numeric_limits<double>::infinity();
  for (VertexId x : order) {
    lmin = std::min(lmin, lap[x]);
    lmax = std::max(lmax, lap[x]);
    cmin = std::min(cmin, rep.c_constants[x]);
  }
  rep.laplacian_constant = (lmax - lmin) <= Tol::chain_eq * std::max(1e-12, std::abs(lmax));
  rep.c_constant = (cmax - cmin) <= Tol::chain_eq * std::max(1e-12, cmax);

  auto eq = [](double a, double b) { return close_rel(a, b, Tol::chain_eq); };
  rep.equality[0] = !rep.hg_unbounded && eq(rep.vol_Hg, rep.vol_union);
  rep.equality[1] = eq(rep.vol_union, rep.sum_prox);
  rep.equality[2] = eq(rep.sum_prox, rep.sum_bound);
  rep.equality[3] = eq(rep.sum_bound, rep.rhs);

  // Monte-Carlo cross-check of essential disjointness inside H_g
  if (mc_samples > 0 && !rep.hg_unbounded && !hg.vertices.empty() && hg.volume > 0) {
    Vec lo = hg.vertices[0], hi = hg.vertices[0];
    for (const auto& v : hg.vertices)
      for (int i = 0; i < d; ++i) {
        lo[i] = std::min(lo[i], v[i]);
        hi[i] = std::max(hi[i], v[i]);
      }
    auto rng = make_rng(0xc4a1);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    int in_hg = 0, overlapped = 0, covered = 0;
    int produced = 0;
    long guard = 0;
    while (produced < mc_samples && guard < 400L * mc_samples) {
      ++guard;
      Vec p(d);
      for (int i = 0; i < d; ++i) p[i] = lo[i] + (hi[i] - lo[i]) * uni(rng);
      if (!hg.contains(p)) continue;
      ++produced;
      ++in_hg;
      int hits = 0;
      for (const auto& cell : cells)
        if (!cell.vertices.empty() && cell.contains(p, 1e-12)) ++hits;
      if (hits >= 2) ++overlapped;
      if (hits >= 1) ++covered;
    }
    if (in_hg > 0) {
      rep.mc_overlap_fraction = (double)overlapped / in_hg;
      rep.mc_coverage_fraction = (double)covered / in_hg;
    }
  }
  return rep;
}

ConvexityCertificate convexity_certificate(const GeometricGraph& g,
                                           const std::set<VertexId>& omega,
                                           const std::map<VertexId, double>& u) {
  ConvexityCertificate cert;
  cert.convex = true;
  bool any_interior = false;
  for (VertexId x : omega) {
    Polytope prox = prox_subdifferential(g, omega, u, x);
    Polytope full = full_subdifferential(g, omega, u, x);
    if (!prox.empty_interior) any_interior = true;
    bool equal = !prox.unbounded && !full.unbounded &&
                 Polytope::vertex_hausdorff(prox, full) <= 1e-7 * (1.0 + 0.0);
    if (prox.empty_interior || !equal) {
      cert.convex = false;
      if (!cert.witness) cert.witness = x;
    }
  }
  cert.empty_case = !any_interior;
  return cert;
}

std::string ChainReport::to_json() const {
  JsonWriter w;
  w.begin_object();
  w.key("boundary_saturated").value(boundary_saturated);
  w.key("c_constant").value(c_constant);
  w.key("cells").begin_object();
  for (const auto& [x, v] : cell_volumes) {
    w.key(std::to_string(x)).begin_object();
    w.key("c").value(c_constants.at(x));
    w.key("full").value(v);
    w.key("lap").value(laplacians.at(x));
    w.key("prox").value(prox_volumes.at(x));
    w.end_object();
  }
  w.end_object();
  w.key("equality").begin_array();
  for (bool e : equality) w.value(e);
  w.end_array();
  w.key("hg_unbounded").value(hg_unbounded);
  w.key("laplacian_constant").value(laplacian_constant);
  w.key("mc_coverage").value(mc_coverage_fraction);
  w.key("mc_overlap").value(mc_overlap_fraction);
  w.key("rhs").value(rhs);
  w.key("sum_bound").value(sum_bound);
  w.key("sum_prox").value(sum_prox);
  w.key("vol_hg").value(vol_Hg);
  w.key("vol_union").value(vol_union);
  w.end_object();
  return w.str();
}

std::string ChainReport::to_csv_row() const {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%.12g,%d,%d,%d,%d",
                vol_Hg, vol_union, sum_prox, sum_bound, rhs, (int)equality[0],
                (int)equality[1], (int)equality[2], (int)equality[3]);
  return buf;
}

}  // namespace isoforge
