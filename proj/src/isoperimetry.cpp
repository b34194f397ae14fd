#include "isoforge/isoperimetry.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <queue>
#include <thread>

#include "isoforge/pde.hpp"
#include "isoforge/subdifferential.hpp"
#include "isoforge/transport.hpp"

namespace isoforge {

namespace {

// Translation-invariant total order on vertices (lexicographic on position).
struct VertexKey {
  std::vector<long> q;
  bool operator<(const VertexKey& o) const { return q < o.q; }
  bool operator==(const VertexKey& o) const { return q == o.q; }
};

VertexKey key_of(const LatticeBundle& b, VertexId v) {
  const Vec& p = b.graph.pos(v);
  VertexKey k;
  for (double c : p) k.q.push_back(std::lround(c * 1e6));
  return k;
}

// One root per orbit: the orbit member nearest the window center.
std::vector<VertexId> orbit_roots(const LatticeBundle& b) {
  std::map<int, VertexId> best;
  std::map<int, double> best_d;
  for (const auto& [id, orb] : b.orbit) {
    if (!b.core.count(id)) continue;
    double dd = norm2(b.graph.pos(id));
    auto it = best.find(orb);
    if (it == best.end() || dd < best_d[orb] - 1e-12 ||
        (std::abs(dd - best_d[orb]) <= 1e-12 && key_of(b, id) < key_of(b, it->second))) {
      best[orb] = id;
      best_d[orb] = dd;
    }
  }
  std::vector<VertexId> roots;
  for (const auto& [orb, id] : best) roots.push_back(id);
  return roots;
}

struct EnumFrame {
  std::vector<VertexId> S;
  std::vector<VertexId> untried;
  std::vector<char> reached;
  double wb = 0;  // weighted boundary of S
};

struct Enumerator {
  const LatticeBundle& b;
  int max_n;
  std::function<void(const std::vector<VertexId>&, double)> emit;
  // when splitting, frames at |S| == split_depth are collected instead of expanded
  int split_depth = -1;
  std::vector<EnumFrame>* branches = nullptr;
  VertexKey root_key;
  std::vector<char> reached;
  std::vector<VertexId> S;
  double wb = 0;

  void grow(std::vector<VertexId> untried) {
    while (!untried.empty()) {
      VertexId c = untried.front();
      untried.erase(untried.begin());
      // add c
      double delta = 0;
      for (VertexId y : b.graph.neighbors(c)) {
        double g = b.graph.edge(c, y).g;
        bool in = std::find(S.begin(), S.end(), y) != S.end();
        delta += in ? -g : g;
      }
      S.push_back(c);
      wb += delta;
      emit(S, wb);
      if ((int)S.size() < max_n) {
        if ((int)S.size() == split_depth && branches) {
          EnumFrame fr;
          fr.S = S;
          fr.untried = untried;
          for (VertexId y : b.graph.neighbors(c)) {
            if (reached[y]) continue;
            if (!(root_key < key_of(b, y))) continue;
            fr.untried.push_back(y);
          }
          fr.reached = reached;
          for (VertexId v : fr.untried) fr.reached[v] = 1;
          fr.wb = wb;
          branches->push_back(std::move(fr));
        } else {
          std::vector<VertexId> fresh;
          for (VertexId y : b.graph.neighbors(c)) {
            if (reached[y]) continue;
            if (!(root_key < key_of(b, y))) continue;
            reached[y] = 1;
            fresh.push_back(y);
          }
          std::vector<VertexId> next = untried;
          next.insert(next.end(), fresh.begin(), fresh.end());
          grow(std::move(next));
          for (VertexId y : fresh) reached[y] = 0;
        }
      }
      S.pop_back();
      wb -= delta;
    }
  }

  void run_from(VertexId root) {
    root_key = key_of(b, root);
    reached.assign(b.graph.vertices.rbegin()->first + 1, 0);
    reached[root] = 1;
    S.clear();
    wb = 0;
    grow({root});
  }

  void run_frame(const EnumFrame& fr, VertexId root) {
    root_key = key_of(b, root);
    reached = fr.reached;
    S = fr.S;
    wb = fr.wb;
    grow(fr.untried);
  }
};

void check_window_for(const LatticeBundle& b, VertexId root, int max_n) {
  // ball of radius max_n-1 around the root must stay in the full-degree core
  std::set<VertexId> ball = {root};
  std::queue<std::pair<VertexId, int>> q;
  q.push({root, 0});
  while (!q.empty()) {
    auto [v, dep] = q.front();
    q.pop();
    if (!b.core.count(v))
      throw InputError("window too small for max_n = " + std::to_string(max_n));
    if (dep == max_n - 1) continue;
    for (VertexId y : b.graph.neighbors(v))
      if (ball.insert(y).second) q.push({y, dep + 1});
  }
}

}  // namespace

std::vector<std::vector<long>> canonical_form(const LatticeBundle& b,
                                              const std::set<VertexId>& omega) {
  // express the lex-min vertex position in the translation basis, reduce by the
  // integral part, and report all positions relative to that lattice shift
  std::vector<std::pair<VertexKey, VertexId>> keyed;
  for (VertexId v : omega) keyed.push_back({key_of(b, v), v});
  std::sort(keyed.begin(), keyed.end());
  Vec shift(b.dim, 0.0);
  if (!b.translations.empty()) {
    const Vec& p0 = b.graph.pos(keyed.front().second);
    std::vector<std::vector<double>> A(b.dim, std::vector<double>(b.translations.size()));
    for (int r = 0; r < b.dim; ++r)
      for (size_t c = 0; c < b.translations.size(); ++c) A[r][c] = b.translations[c][r];
    Vec alpha;
    if ((int)b.translations.size() == b.dim && solve_dense(A, p0, alpha)) {
      for (size_t c = 0; c < b.translations.size(); ++c)
        shift = add(shift, scale(b.translations[c], std::floor(alpha[c] + 1e-9)));
    }
  }
  std::vector<std::vector<long>> out;
  for (const auto& [k, v] : keyed) {
    Vec rel = sub(b.graph.pos(v), shift);
    std::vector<long> q(rel.size());
    for (size_t i = 0; i < rel.size(); ++i) q[i] = std::lround(rel[i] * 1e6);
    out.push_back(q);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void enumerate_connected_subsets(const LatticeBundle& b, int max_n,
                                 const std::function<void(const std::vector<VertexId>&)>& sink) {
  if (max_n < 1) throw InputError("max_n must be >= 1");
  if (max_n > 16) throw InputError("max_n exceeds the configured cap of 16");
  if (b.translations.empty())
    throw InputError("bundle exposes no translation group; enumeration unsupported");
  Enumerator en{b, max_n, {}, -1, nullptr, {}, {}, {}, 0};
  en.emit = [&](const std::vector<VertexId>& S, double) { sink(S); };
  for (VertexId root : orbit_roots(b)) {
    check_window_for(b, root, max_n);
    en.run_from(root);
  }
}

ScanResult scan(const LatticeBundle& b, int max_n, int jobs) {
  if (max_n < 1) throw InputError("max_n must be >= 1");
  if (max_n > 16) throw InputError("max_n exceeds the configured cap of 16");
  ScanResult res;
  SufficiencyReport rep = verify_sufficiency(b);
  res.observational = !rep.pass();
  res.c_constant = rep.c_value;
  Polytope H = target_polytope(b.graph, {}, true);
  res.h_volume = H.volume;
  bool g_is_one = true;
  for (const auto& [k, e] : b.graph.edges)
    if (std::abs(e.g - 1.0) > 1e-12) g_is_one = false;
  if (res.c_constant > 0 && !H.unbounded) {
    double ratio = res.h_volume / res.c_constant;
    if (g_is_one && std::abs(ratio - std::llround(ratio)) <= 1e-6 * ratio) {
      res.ratio = std::llround(ratio);
      res.exact_arithmetic = true;
    }
  }

  struct Acc {
    std::map<int, SizeRecord> per_n;
  };
  auto absorb = [&](Acc& acc, const std::vector<VertexId>& S, double wb) {
    int n = (int)S.size();
    auto& rec = acc.per_n[n];
    rec.classes++;
    if (rec.argmin.empty() || wb < rec.min_boundary - 1e-12) {
      rec.min_boundary = wb;
      rec.argmin = std::set<VertexId>(S.begin(), S.end());
    } else if (std::abs(wb - rec.min_boundary) <= 1e-12) {
      std::set<VertexId> cand(S.begin(), S.end());
      if (canonical_form(b, cand) < canonical_form(b, rec.argmin)) rec.argmin = cand;
    }
  };

  std::vector<VertexId> roots = orbit_roots(b);
  for (VertexId r : roots) check_window_for(b, r, max_n);

  Acc serial_acc;
  if (jobs <= 1 || max_n <= 2) {
    Enumerator en{b, max_n, {}, -1, nullptr, {}, {}, {}, 0};
    en.emit = [&](const std::vector<VertexId>& S, double wb) { absorb(serial_acc, S, wb); };
    for (VertexId r : roots) en.run_from(r);
  } else {
    // split the enumeration tree at depth 2; deterministic merge in branch order
    std::vector<std::pair<EnumFrame, VertexId>> branches;
    {
      Enumerator en{b, max_n, {}, 2, nullptr, {}, {}, {}, 0};
      std::vector<EnumFrame> frames;
      en.branches = &frames;
      en.emit = [&](const std::vector<VertexId>& S, double wb) {
        if ((int)S.size() <= 2) absorb(serial_acc, S, wb);
      };
      for (VertexId r : roots) {
        frames.clear();
        en.run_from(r);
        for (auto& fr : frames) branches.push_back({std::move(fr), r});
      }
    }
    std::vector<Acc> accs(branches.size());
    std::atomic<size_t> next{0};
    auto worker = [&]() {
      while (true) {
        size_t i = next.fetch_add(1);
        if (i >= branches.size()) return;
        Enumerator en{b, max_n, {}, -1, nullptr, {}, {}, {}, 0};
        en.emit = [&, i](const std::vector<VertexId>& S, double wb) {
          absorb(accs[i], S, wb);
        };
        en.run_frame(branches[i].first, branches[i].second);
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    for (const auto& acc : accs) {
      for (const auto& [n, rec] : acc.per_n) {
        auto& dst = serial_acc.per_n[n];
        dst.classes += rec.classes;
        if (dst.argmin.empty() || rec.min_boundary < dst.min_boundary - 1e-12) {
          dst.min_boundary = rec.min_boundary;
          dst.argmin = rec.argmin;
        } else if (std::abs(rec.min_boundary - dst.min_boundary) <= 1e-12 &&
                   canonical_form(b, rec.argmin) < canonical_form(b, dst.argmin)) {
          dst.argmin = rec.argmin;
        }
      }
    }
  }

  res.per_n = std::move(serial_acc.per_n);
  for (auto& [n, rec] : res.per_n) {
    rec.argmin_canonical = canonical_form(b, rec.argmin);
    if (res.exact_arithmetic) {
      long long m = std::llround(rec.min_boundary);
      // ratio * n^{d-1} <= m^d in exact integers
      long long lhs = res.ratio;
      for (int t = 0; t < b.dim - 1; ++t) lhs *= n;
      long long rhs = 1;
      for (int t = 0; t < b.dim; ++t) rhs *= m;
      rec.inequality_holds = lhs <= rhs;
      rec.equality = lhs == rhs;
    } else {
      double lhs = res.h_volume * std::pow((double)n, b.dim - 1);
      double rhs = res.c_constant * std::pow(rec.min_boundary, b.dim);
      rec.inequality_holds = lhs <= rhs * (1 + 1e-9);
      rec.equality = close_rel(lhs, rhs, 1e-9);
    }
    if (rec.equality) res.equality_sizes.push_back(n);
  }
  return res;
}

// ---------------------------------------------------------------------------
// triangular census
// ---------------------------------------------------------------------------

namespace {
const std::vector<std::pair<long, long>> kTriDirs = {
    {1, 0}, {0, 1}, {-1, 1}, {-1, 0}, {0, -1}, {1, -1}};
}

bool try_triangular_census(const std::vector<std::pair<long, long>>& pts_in,
                           TriangularCensus& c, std::string* why) {
  auto fail = [&](const char* m) {
    if (why) *why = m;
    return false;
  };
  std::vector<std::pair<long, long>> pts = pts_in;
  std::sort(pts.begin(), pts.end());
  auto has = [&](long m, long n) {
    return std::binary_search(pts.begin(), pts.end(), std::make_pair(m, n));
  };

  long long edges = 0, tri2 = 0;  // triangles double-counted per base vertex
  c = TriangularCensus{};
  for (const auto& [m, n] : pts) {
    std::array<bool, 6> edge_at{};
    std::array<bool, 6> tri_at{};
    int deg = 0;
    for (int i = 0; i < 6; ++i) {
      edge_at[i] = has(m + kTriDirs[i].first, n + kTriDirs[i].second);
      if (edge_at[i]) ++deg;
    }
    bool any_tri = false;
    for (int i = 0; i < 6; ++i) {
      tri_at[i] = edge_at[i] && edge_at[(i + 1) % 6];
      if (tri_at[i]) {
        any_tri = true;
        ++tri2;
      }
    }
    if (!any_tri) return fail("vertex belongs to no triangle of omega");
    for (int i = 0; i < 6; ++i)
      if (edge_at[i] && !tri_at[i] && !tri_at[(i + 5) % 6])
        return fail("dangling edge outside every triangle");
    int arcs = 0;
    for (int i = 0; i < 6; ++i)
      if (tri_at[i] && !tri_at[(i + 5) % 6]) ++arcs;
    if (arcs > 1) return fail("pinched boundary (repeated cycle vertex)");
    edges += deg;
    if (deg == 6)
      c.a[6]++;
    else if (deg >= 2 && deg <= 5)
      c.a[deg - 1]++;  // boundary vertices with i+1 neighbors land in a_i
    else
      return fail("vertex of degree below two");
  }
  if (tri2 % 3 != 0) return fail("triangle double-count inconsistent");
  c.triangles = tri2 / 3;
  c.E_count = edges / 2;
  c.X = (long long)pts.size();

  // connectivity
  {
    std::vector<std::pair<long, long>> stack = {pts.front()};
    std::set<std::pair<long, long>> seen = {pts.front()};
    while (!stack.empty()) {
      auto [m, n] = stack.back();
      stack.pop_back();
      for (const auto& d : kTriDirs) {
        std::pair<long, long> w{m + d.first, n + d.second};
        if (has(w.first, w.second) && seen.insert(w).second) stack.push_back(w);
      }
    }
    if (seen.size() != pts.size()) return fail("omega is not connected");
  }
  if (c.X - c.E_count + c.triangles != 1)
    return fail("boundary is not a single cycle (Euler characteristic != 1)");

  for (int i : {1, 2, 3, 4, 6})
    if (!c.a.count(i)) c.a[i] = 0;
  c.Y = 4 * c.a[1] + 3 * c.a[2] + 2 * c.a[3] + c.a[4];
  if (c.X != c.a[1] + c.a[2] + c.a[3] + c.a[4] + c.a[6])
    return fail("vertex classes do not partition omega");
  if (2 * c.a[1] + c.a[2] - c.a[4] != 6) return fail("Gauss-Bonnet identity fails");
  if (c.Y % 2 != 0) return fail("odd boundary count");
  c.Y_star = c.Y / 2 - 3;
  if (c.Y_star != c.a[1] + c.a[2] + c.a[3] + c.a[4]) return fail("Y* identity fails");
  c.X_star = 2 * c.X - c.Y / 2 + 1;
  if (c.X_star != c.triangles) return fail("X* does not match the triangle count");
  if (2 * c.E_count != 6 * c.X - c.Y) return fail("half-edge identity fails");
  return true;
}

TriangularCensus triangular_census(const LatticeBundle& b, const std::set<VertexId>& omega) {
  if (b.kind != "triangular") throw InputError("census requires the triangular bundle");
  b.require_interior(omega);
  std::vector<std::pair<long, long>> pts;
  for (VertexId v : omega) {
    const auto& co = b.coords.at(v);
    pts.push_back({co[0], co[1]});
  }
  TriangularCensus c;
  std::string why;
  if (!try_triangular_census(pts, c, &why)) throw InputError("census: " + why);
  // cross-check against the oriented boundary of the materialized graph
  SubsetView view = subset_view(b.graph, omega);
  if ((long long)view.boundary.size() != c.Y)
    throw InvariantViolation("census boundary count mismatch");
  return c;
}

double triangular_inequality(const LatticeBundle& b, const std::set<VertexId>& omega) {
  TriangularCensus c = triangular_census(b, omega);
  long long num = (c.Y - 6) * (c.Y - 6);
  long long den = 4 * c.X - c.Y + 2;
  if (den <= 0) throw InvariantViolation("census denominator not positive");
  // algebraic equivalence with (Y*)^2 >= 6 X*, exact in integers
  if (num - 12 * den != 4 * (c.Y_star * c.Y_star - 6 * c.X_star))
    throw InvariantViolation("duality cross-check failed");
  return (double)num / (double)den;
}

// ---------------------------------------------------------------------------
// connectedness reduction
// ---------------------------------------------------------------------------

std::set<VertexId> connectedness_reduction(const LatticeBundle& b,
                                           const std::set<VertexId>& omega) {
  SubsetView view = subset_view(b.graph, omega);
  if (view.components.size() <= 1) return omega;
  if (b.translations.empty()) throw InputError("bundle exposes no translation group");
  const double before = view.weighted_boundary;

  std::set<VertexId> current = view.components.front();
  std::vector<std::set<VertexId>> rest(view.components.begin() + 1, view.components.end());

  std::vector<Vec> dirs;
  for (const auto& t : b.translations) {
    dirs.push_back(scale(t, 1.0 / norm(t)));
    dirs.push_back(scale(t, -1.0 / norm(t)));
  }

  auto steps_of = [&](const Vec& delta, std::vector<long>& steps) {
    std::vector<std::vector<double>> A(b.dim, std::vector<double>(b.translations.size()));
    for (int r = 0; r < b.dim; ++r)
      for (size_t c = 0; c < b.translations.size(); ++c) A[r][c] = b.translations[c][r];
    Vec alpha;
    if (!solve_dense(A, delta, alpha)) return false;
    steps.clear();
    for (double a : alpha) {
      if (std::abs(a - std::lround(a)) > 1e-6) return false;
      steps.push_back(std::lround(a));
    }
    return true;
  };

  for (const auto& comp : rest) {
    bool glued = false;
    for (const Vec& dir : dirs) {
      if (glued) break;
      // extreme point of the current union in direction dir
      VertexId w1 = -1;
      double best = -std::numeric_limits<double>::infinity();
      for (VertexId v : current) {
        double d = dot(b.graph.pos(v), dir);
        if (d > best + 1e-12) {
          best = d;
          w1 = v;
        }
      }
      // neighbor slots of w1 pointing along dir and not occupied by the union
      for (VertexId nb : b.graph.neighbors(w1)) {
        if (glued) break;
        Vec bp = sub(b.graph.pos(nb), b.graph.pos(w1));
        if (dot(bp, dir) <= 1e-9) continue;
        if (current.count(nb)) continue;
        // extreme point of the component in -dir, matching nb's orbit
        std::vector<std::pair<double, VertexId>> w2s;
        for (VertexId v : comp)
          if (b.orbit.at(v) == b.orbit.at(nb))
            w2s.push_back({dot(b.graph.pos(v), dir), v});
        std::sort(w2s.begin(), w2s.end());
        for (const auto& [dval, w2] : w2s) {
          std::vector<long> steps;
          if (!steps_of(sub(b.graph.pos(nb), b.graph.pos(w2)), steps)) continue;
          std::set<VertexId> moved;
          bool ok = true;
          for (VertexId v : comp) {
            VertexId tv = b.translate(v, steps);
            if (tv < 0 || current.count(tv)) {
              ok = false;
              break;
            }
            moved.insert(tv);
          }
          if (!ok || moved.size() != comp.size()) continue;
          current.insert(moved.begin(), moved.end());
          glued = true;
          break;
        }
      }
    }
    if (!glued)
      throw InputError("connectedness reduction exhausted candidate translations");
  }

  SubsetView after = subset_view(b.graph, current);
  if (after.components.size() != 1)
    throw InvariantViolation("reduction produced a disconnected set");
  if (current.size() != omega.size())
    throw InvariantViolation("reduction changed the cardinality");
  if (!(after.weighted_boundary < before - 1e-12))
    throw InvariantViolation("reduction did not decrease the boundary");
  return current;
}

std::string scan_to_csv(const ScanResult& r) {
  std::string out = "n,classes,min_boundary,inequality_holds,equality,example_subset\n";
  for (const auto& [n, rec] : r.per_n) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%d,%lld,%.12g,%d,%d,", n, rec.classes,
                  rec.min_boundary, (int)rec.inequality_holds, (int)rec.equality);
    out += buf;
    std::string ex;
    for (const auto& q : rec.argmin_canonical) {
      ex += ex.empty() ? "" : ";";
      for (size_t i = 0; i < q.size(); ++i)
        ex += (i ? ":" : "") + std::to_string(q[i]);
    }
    out += ex + "\n";
  }
  return out;
}

}  // namespace isoforge
