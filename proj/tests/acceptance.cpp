// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "isoforge/isoperimetry.hpp"
#include "isoforge/minkowski.hpp"
#include "isoforge/pde.hpp"
#include "isoforge/subdifferential.hpp"
#include "isoforge/transport.hpp"

using namespace isoforge;

namespace {

struct Criterion {
  std::string name;
  std::function<bool(std::string&)> run;
};

bool approx(double a, double b, double tol) { return std::abs(a - b) <= tol; }
bool approx_rel(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

std::vector<Vec> honeycomb_fan() {
  std::vector<Vec> fan;
  const double l = std::sqrt(3.0) / 3.0;
  for (int k = 0; k < 3; ++k) {
    double th = M_PI / 2.0 + k * 2.0 * M_PI / 3.0;
    fan.push_back({l * std::cos(th), l * std::sin(th)});
  }
  return fan;
}

std::set<VertexId> random_connected(const LatticeBundle& b, int n, std::mt19937_64& rng) {
  std::vector<VertexId> core(b.core.begin(), b.core.end());
  std::uniform_int_distribution<size_t> pick(0, core.size() - 1);
  std::set<VertexId> s = {core[pick(rng)]};
  while ((int)s.size() < n) {
    std::vector<VertexId> fr;
    for (VertexId x : s)
      for (VertexId y : b.graph.neighbors(x))
        if (!s.count(y) && b.core.count(y)) fr.push_back(y);
    if (fr.empty()) break;
    std::uniform_int_distribution<size_t> fp(0, fr.size() - 1);
    s.insert(fr[fp(rng)]);
  }
  return s;
}

// 1. Minkowski constants of the three flagship fans.
bool c1(std::string& msg) {
  MinkowskiSolution grid = minkowski_constant({{1, 0}, {-1, 0}, {0, 1}, {0, -1}});
  MinkowskiSolution hex = minkowski_constant(honeycomb_fan());
  MinkowskiSolution bcc =
      minkowski_constant({{1, -1, 0}, {-1, -1, 0}, {0, 1, -1}, {0, 1, 1}});
  char buf[160];
  std::snprintf(buf, sizeof buf, "C_grid=%.12g C_hex=%.12g C_bcc=%.12g", grid.constant,
                hex.constant, bcc.constant);
  msg = buf;
  return grid.feasible && hex.feasible && bcc.feasible &&
         approx(grid.constant, 0.25, 1e-8) &&
         approx(hex.constant, std::sqrt(3.0), 1e-8) &&
         approx(bcc.constant, 1.0 / 12.0, 1e-8);
}

// 2. Facet-area law on every converged solution in a mixed batch.
bool c2(std::string& msg) {
  std::vector<std::vector<Vec>> fans = {
      {{1, 0}, {-1, 0}, {0, 1}, {0, -1}},
      honeycomb_fan(),
      {{1, -1, 0}, {-1, -1, 0}, {0, 1, -1}, {0, 1, 1}},
  };
  auto rng = make_rng(2);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int t = 0; t < 40; ++t) {
    Vec v1 = {uni(rng) + 1.4, uni(rng)};
    Vec v2 = {uni(rng) * 0.6, uni(rng) + 1.4};
    fans.push_back({v1, v2, {-(v1[0] + v2[0]), -(v1[1] + v2[1])}});
  }
  // an interior fan from each generated lattice
  for (const std::string kind : {"honeycomb", "triangular", "grid", "bcc", "fcc"}) {
    LatticeBundle b = generate(kind, 2);
    fans.push_back(neighbor_fan(b.graph, *b.core.begin()).vectors);
  }
  int checked = 0;
  for (const auto& fan : fans) {
    MinkowskiSolution ms = minkowski_constant(fan);
    if (!ms.feasible) return false;
    const int d = (int)fan[0].size();
    if (!approx_rel(ms.constant, ms.alpha / d, 1e-7)) {
      msg = "C != alpha/d";
      return false;
    }
    for (size_t i = 0; i < ms.fan.size(); ++i) {
      Vec u = scale(ms.fan[i], 1.0 / norm(ms.fan[i]));
      double area = 0;
      for (const auto& f : ms.polytope.facets)
        if (dist(f.normal, u) < 1e-7) area += f.area;
      if (!approx_rel(area, ms.alpha * norm(ms.fan[i]), 1e-7)) {
        msg = "facet area law violated";
        return false;
      }
    }
    ++checked;
  }
  msg = std::to_string(checked) + " solutions obey area(F_v)=alpha|v|, C=alpha/d";
  return true;
}

// 3. Target bodies of the honeycomb and BCC lattices.
bool c3(std::string& msg) {
  Polytope Hh = target_polytope(make_honeycomb(2).graph, {}, true);
  Polytope Hb = target_polytope(make_bcc(1).graph, {}, true);
  char buf[120];
  std::snprintf(buf, sizeof buf, "|H_hex|=%.12g |H_bcc|=%.12g", Hh.volume, Hb.volume);
  msg = buf;
  return approx_rel(Hh.volume, 6.0 * std::sqrt(3.0), 1e-9) &&
         approx_rel(Hb.volume, 2.0, 1e-7);
}

// 4. Honeycomb sharpness by exhaustive scan, n <= 6, within 10 seconds.
bool c4(std::string& msg) {
  auto t0 = std::chrono::steady_clock::now();
  LatticeBundle b = make_honeycomb(8);
  ScanResult r = scan(b, 6, 2);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  bool ok = r.exact_arithmetic && r.ratio == 6;
  for (const auto& [n, rec] : r.per_n) ok = ok && rec.inequality_holds;
  ok = ok && r.equality_sizes == std::vector<int>{6};
  ok = ok && std::llround(r.per_n.at(6).min_boundary) == 6;
  ok = ok && secs <= 10.0;
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "6#X <= (#dX)^2 for n<=6, equality only at n=6 (dX=6), %.2fs", secs);
  msg = buf;
  return ok;
}

// 5. BCC sharpness at the reference subset, in exact integers.
bool c5(std::string& msg) {
  LatticeBundle b = make_bcc(2);
  std::set<VertexId> x = reference_subset(b, ReferenceKind::rhombic_dodeca_bcc, 1);
  SubsetView view = subset_view(b.graph, x);
  long long n = (long long)x.size();
  long long m = (long long)view.boundary.size();
  msg = "#X=" + std::to_string(n) + " #dX=" + std::to_string(m) + ", 24*#X^2 == #dX^3";
  return n == 24 && m == 24 && 24 * n * n == m * m * m;
}

// 6. Triangular identity suite over every valid subset up to X <= 12 plus H_k.
bool c6(std::string& msg) {
  LatticeBundle b = make_triangular(14);
  // dense coordinate table for the enumeration-scale filter
  std::vector<std::pair<long, long>> coord_of(b.graph.vertices.rbegin()->first + 1);
  for (const auto& [id, co] : b.coords) coord_of[id] = {co[0], co[1]};
  long long valid = 0, equalities = 0;
  bool ok = true;
  std::vector<std::pair<long, long>> pts;
  enumerate_connected_subsets(b, 12, [&](const std::vector<VertexId>& sv) {
    if (!ok) return;
    pts.clear();
    for (VertexId v : sv) pts.push_back(coord_of[v]);
    TriangularCensus c;
    if (!try_triangular_census(pts, c)) return;  // identities asserted inside
    ++valid;
    long long num = (c.Y - 6) * (c.Y - 6), den = 4 * c.X - c.Y + 2;
    if (num < 12 * den) ok = false;
    if (num == 12 * den) {
      ++equalities;
      if (c.X != 7) ok = false;  // only H_1 has X <= 12
    }
  });
  LatticeBundle big = make_triangular(5);
  for (int k = 1; k <= 3; ++k) {
    auto hk = reference_subset(big, ReferenceKind::hex_triangular, k);
    TriangularCensus c = triangular_census(big, hk);
    long long num = (c.Y - 6) * (c.Y - 6), den = 4 * c.X - c.Y + 2;
    if (num != 12 * den) ok = false;
  }
  ok = ok && equalities == 1 && valid > 1000;
  msg = std::to_string(valid) + " censused subsets, equality only on the hexagons";
  return ok;
}

// 7. Neumann solver residuals and bounds on every example bundle.
bool c7(std::string& msg) {
  auto rng = make_rng(7);
  std::vector<LatticeBundle> bundles;
  bundles.push_back(make_honeycomb(3));
  bundles.push_back(make_honeycomb(3, std::array<double, 4>{1.2, 0.3, 0.0, 0.9}));
  bundles.push_back(make_triangular(3));
  bundles.push_back(make_product_grid({{1.0, 1.0}}, 3));
  bundles.push_back(make_bcc(2));
  bundles.push_back(make_fcc_subdivided(2));
  std::uniform_int_distribution<int> nn(1, 8);
  int done = 0;
  while (done < 100) {
    const LatticeBundle& b = bundles[done % bundles.size()];
    std::set<VertexId> omega = random_connected(b, nn(rng), rng);
    SubsetView view = subset_view(b.graph, omega);
    if (view.components.size() != 1) continue;
    NeumannSolution sol = neumann_solve(b.graph, omega);
    if (sol.divergence_residual > 1e-9) {
      msg = "divergence residual " + std::to_string(sol.divergence_residual);
      return false;
    }
    // all slacks are <= 0 under the fold; the selected edge sits at zero
    for (const auto& [y, s] : sol.slack)
      if (std::abs(s.second) > 1e-10 || s.first > 1e-10) {
        msg = "unsaturated outer vertex";
        return false;
      }
    double bound = view.weighted_boundary / (double)omega.size();
    for (VertexId x : omega)
      if (sol.achieved[x] > bound + 1e-9) {
        msg = "laplacian exceeds the boundary bound";
        return false;
      }
    ++done;
  }
  msg = "100 random subsets over 6 bundles";
  return true;
}

// 8. Optimal constant: dual formula vs LP, bounds, sign constancy.
bool c8(std::string& msg) {
  auto rng = make_rng(8);
  LatticeBundle tri = make_triangular(4);
  LatticeBundle hex = make_honeycomb(4);
  std::uniform_int_distribution<int> nn(1, 5);
  std::uniform_real_distribution<double> gg(0.25, 2.0);
  int done = 0;
  while (done < 100) {
    const LatticeBundle& b = done % 2 ? hex : tri;
    std::set<VertexId> omega = random_connected(b, nn(rng), rng);
    SubsetView view = subset_view(b.graph, omega);
    if (view.components.size() != 1) continue;
    GeometricGraph g = b.graph;
    for (auto& [k, e] : g.edges) e.g = gg(rng);
    // optimal_constant internally asserts nullity one, one-signed v on every
    // enumerated selection, the LP/formula match, the upper bound, and the
    // constant-Laplacian property of the LP optimizer
    OptimalConstantResult r = optimal_constant(g, omega);
    if (std::abs(r.lp_crosscheck - r.C) > 1e-9 * std::max(1.0, std::abs(r.C))) {
      msg = "formula/LP mismatch";
      return false;
    }
    if (r.C > r.upper_bound + 1e-9) {
      msg = "upper bound violated";
      return false;
    }
    ++done;
  }
  msg = "100 random instances, every selection one-signed, LP agrees to 1e-9";
  return true;
}

// 9. Equal-volume transport fit on the hexagon and the induced equality chain.
bool c9(std::string& msg) {
  LatticeBundle b = make_honeycomb(3);
  auto hexset = reference_subset(b, ReferenceKind::hex_honeycomb, 1);
  Polytope H = target_polytope(b.graph, {}, true);
  std::vector<VertexId> order(hexset.begin(), hexset.end());
  std::vector<Vec> sites;
  for (VertexId v : order) sites.push_back(b.graph.pos(v));
  FitResult fit = fit_equal_volumes(sites, H);
  for (double v : fit.diagram.volumes)
    if (std::abs(v - std::sqrt(3.0)) > 1e-6 * H.volume) {
      msg = "cell volume off target";
      return false;
    }
  for (size_t i = 0; i < sites.size(); ++i) {
    Polytope ac = aleksandrov_cell(fit.potential, i, H);
    if (Polytope::vertex_hausdorff(ac, fit.diagram.cells[i]) > 1e-6) {
      msg = "Legendre consistency failed";
      return false;
    }
  }
  std::map<VertexId, double> u;
  for (size_t i = 0; i < order.size(); ++i) u[order[i]] = fit.potential.values[i];
  SubsetView view = subset_view(b.graph, hexset);
  for (const auto& e : view.boundary) {
    const auto& ed = b.graph.edge(e.from, e.to);
    u[e.to] = u[e.from] + ed.g / ed.A;
  }
  ChainReport rep = chain_report(b.graph, hexset, u, 100000);
  for (bool e : rep.equality)
    if (!e) {
      msg = "chain link not tight";
      return false;
    }
  msg = "fit residual " + std::to_string(fit.residual) + ", all chain links equal";
  return true;
}

// 10. Chain property suite over random valid pairs per 2D bundle.
bool c10(std::string& msg) {
  auto rng = make_rng(10);
  std::uniform_int_distribution<int> nn(1, 6);
  std::uniform_real_distribution<double> gg(0.25, 2.0);
  for (const std::string kind : {"honeycomb", "triangular", "grid"}) {
    LatticeBundle b = generate(kind, 4);
    int done = 0;
    while (done < 200) {
      std::set<VertexId> omega = random_connected(b, nn(rng), rng);
      GeometricGraph g = b.graph;
      for (auto& [k, e] : g.edges) e.g = gg(rng);
      NeumannSolution sol = neumann_solve(g, omega);
      int samples = done % 10 == 0 ? 100000 : 10000;
      ChainReport rep = chain_report(g, omega, sol.u, samples);
      if (!rep.monotone()) {
        msg = kind + ": chain not monotone";
        return false;
      }
      if (rep.mc_overlap_fraction > 0.001) {
        msg = kind + ": cell overlap mass too large";
        return false;
      }
      for (VertexId x : omega) {
        Polytope full = full_subdifferential(g, omega, sol.u, x);
        Polytope prox = prox_subdifferential(g, omega, sol.u, x);
        for (const auto& v : full.vertices)
          if (!prox.contains(v, 1e-9)) {
            msg = kind + ": containment violated";
            return false;
          }
      }
      ++done;
    }
  }
  msg = "600 random (omega, u) pairs across 3 bundles";
  return true;
}

// 11. Negative control: the unweighted triangular bundle fails the sufficiency
// verifier while its hexagons still satisfy the census identities.
bool c11(std::string& msg) {
  SufficiencyReport rep = verify_sufficiency(make_triangular(2));
  if (rep.pass()) {
    msg = "triangular bundle unexpectedly passed";
    return false;
  }
  LatticeBundle b = make_triangular(4);
  for (int k = 1; k <= 2; ++k) {
    auto hk = reference_subset(b, ReferenceKind::hex_triangular, k);
    TriangularCensus c = triangular_census(b, hk);
    long long num = (c.Y - 6) * (c.Y - 6), den = 4 * c.X - c.Y + 2;
    if (num != 12 * den) {
      msg = "hexagon census equality failed";
      return false;
    }
  }
  msg = "verifier fails (" + rep.first_failure() + "); hexagon census still sharp";
  return true;
}

}  // namespace

int main() {
  std::vector<Criterion> criteria = {
      {"1 minkowski constants", c1}, {"2 facet-area law", c2},
      {"3 target bodies", c3},       {"4 honeycomb sharpness", c4},
      {"5 bcc sharpness", c5},       {"6 triangular identities", c6},
      {"7 neumann solver", c7},      {"8 optimal constant", c8},
      {"9 transport fit", c9},       {"10 chain properties", c10},
      {"11 negative control", c11},
  };
  int failures = 0;
  for (auto& c : criteria) {
    std::string msg;
    bool ok = false;
    auto t0 = std::chrono::steady_clock::now();
    try {
      ok = c.run(msg);
    } catch (const std::exception& e) {
      msg = std::string("exception: ") + e.what();
    }
    double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %-26s %s  (%.2fs)%s%s\n", c.name.c_str(), ok ? "PASS" : "FAIL",
                secs, msg.empty() ? "" : "  -- ", msg.c_str());
    if (!ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
