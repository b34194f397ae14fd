#include "isoforge/pde.hpp"

#include <algorithm>
#include <cmath>

#include "isoforge/jsonout.hpp"

namespace isoforge {

std::map<VertexId, double> laplacian(const GeometricGraph& g, const std::set<VertexId>& omega,
                                     const std::map<VertexId, double>& u) {
  std::map<VertexId, double> out;
  for (VertexId x : omega) {
    double s = 0;
    auto ux = u.find(x);
    if (ux == u.end()) throw InputError("u missing at vertex " + std::to_string(x));
    for (VertexId y : g.neighbors(x)) {
      auto uy = u.find(y);
      if (uy == u.end()) throw InputError("u missing on closure vertex " + std::to_string(y));
      double A = g.edge(x, y).A;
      s += A * A * (uy->second - ux->second);
    }
    out[x] = s;
  }
  return out;
}

std::vector<double> compatibility_sums(const GeometricGraph& g, const SubsetView& view) {
  std::vector<double> sums;
  for (const auto& comp : view.components) {
    double s = 0;
    for (const auto& e : view.boundary)
      if (comp.count(e.from)) s += g.edge(e.from, e.to).A * g.edge(e.from, e.to).g;
    sums.push_back(s);
  }
  return sums;
}

NeumannSolution neumann_solve(const GeometricGraph& g, const std::set<VertexId>& omega,
                              std::optional<std::map<VertexId, double>> f_in) {
  SubsetView view = subset_view(g, omega);
  std::vector<double> compat = compatibility_sums(g, view);

  std::map<VertexId, double> f;
  if (f_in) {
    f = *f_in;
    std::vector<double> defects;
    bool bad = false;
    for (size_t j = 0; j < view.components.size(); ++j) {
      double s = 0;
      for (VertexId x : view.components[j]) {
        auto it = f.find(x);
        if (it == f.end()) throw InputError("f missing at vertex " + std::to_string(x));
        s += it->second;
      }
      double defect = s - compat[j];
      defects.push_back(defect);
      if (std::abs(defect) > 1e-9 * (1.0 + std::abs(compat[j]))) bad = true;
    }
    if (bad) throw CompatibilityError("f violates the divergence compatibility", defects);
  } else {
    for (size_t j = 0; j < view.components.size(); ++j)
      for (VertexId x : view.components[j])
        f[x] = compat[j] / (double)view.components[j].size();
  }

  // Reduced system on omega: interior Laplacian equals f minus the saturated
  // boundary flux sum A*g at each vertex. One vertex per component is pinned.
  std::vector<VertexId> order(omega.begin(), omega.end());
  std::map<VertexId, int> idx;
  for (size_t i = 0; i < order.size(); ++i) idx[order[i]] = (int)i;
  const int n = (int)order.size();
  std::vector<std::vector<double>> M(n, std::vector<double>(n, 0.0));
  std::vector<double> rhs(n, 0.0);
  for (int i = 0; i < n; ++i) {
    VertexId x = order[i];
    double diag = 0, flux = 0;
    for (VertexId y : g.neighbors(x)) {
      double A = g.edge(x, y).A;
      if (omega.count(y)) {
        M[i][idx[y]] += A * A;
        diag += A * A;
      } else {
        flux += A * g.edge(x, y).g;
      }
    }
    M[i][i] -= diag;
    rhs[i] = f[x] - flux;
  }
  for (const auto& comp : view.components) {
    int i = idx[*comp.begin()];
    std::fill(M[i].begin(), M[i].end(), 0.0);
    M[i][i] = 1.0;
    rhs[i] = 0.0;
  }
  Vec sol;
  if (!solve_dense(M, rhs, sol))
    throw InvariantViolation("interior system singular beyond its constant kernel");

  NeumannSolution out;
  out.f = f;
  for (int i = 0; i < n; ++i) out.u[order[i]] = sol[i];

  // residual on the solved rows
  {
    double worst = 0;
    for (int i = 0; i < n; ++i) {
      VertexId x = order[i];
      bool pinned = false;
      for (const auto& comp : view.components)
        if (*comp.begin() == x) pinned = true;
      if (pinned) continue;
      double s = 0, flux = 0, diag = 0;
      for (VertexId y : g.neighbors(x)) {
        double A = g.edge(x, y).A;
        if (omega.count(y)) {
          s += A * A * out.u[y];
          diag += A * A;
        } else {
          flux += A * g.edge(x, y).g;
        }
      }
      worst = std::max(worst, std::abs(s - diag * out.u[x] - (f[x] - flux)));
    }
    out.solve_residual = worst;
    if (worst > 1e-8 * (1.0 + std::abs(compat[0])))
      throw InvariantViolation("linear solve residual too large");
  }

  // Fold the split boundary values back: u(y) = min over in-edges of u(x) + g/A.
  // With the subharmonic sign convention this keeps lap_A u <= f; at least one
  // incident edge per outer vertex is saturated exactly.
  std::map<VertexId, std::vector<OrientedEdge>> in_edges;
  for (const auto& e : view.boundary) in_edges[e.to].push_back(e);
  out.mode = view.unique_inedges ? NeumannMode::naive : NeumannMode::hamamuki;
  for (auto& [y, es] : in_edges) {
    double best = std::numeric_limits<double>::infinity();
    OrientedEdge arg = es.front();
    for (const auto& e : es) {
      const auto& ed = g.edge(e.from, e.to);
      double val = out.u[e.from] + ed.g / ed.A;
      if (val < best - 1e-15 || (std::abs(val - best) <= 1e-15 && e.from < arg.from)) {
        best = val;
        arg = e;
      }
    }
    out.u[y] = best;
    out.selection.push_back(arg);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& e : es) {
      const auto& ed = g.edge(e.from, e.to);
      double s = (out.u[y] - out.u[e.from]) - ed.g / ed.A;
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
    out.slack[y] = {lo, hi};
  }
  std::sort(out.selection.begin(), out.selection.end(), [](const auto& a, const auto& b) {
    return std::tie(a.to, a.from) < std::tie(b.to, b.from);
  });

  out.achieved = laplacian(g, omega, out.u);
  double lhs = 0, rhsum = 0;
  for (VertexId x : omega) lhs += out.achieved[x];
  for (const auto& e : view.boundary) {
    double A = g.edge(e.from, e.to).A;
    rhsum += A * A * (out.u[e.to] - out.u[e.from]);
  }
  out.divergence_residual = std::abs(lhs - rhsum);
  return out;
}

// ---------------------------------------------------------------------------
// directed dual vector
// ---------------------------------------------------------------------------

namespace {

DirectedSystem dual_vector_connected(const GeometricGraph& g, const std::set<VertexId>& omega,
                                     const std::vector<OrientedEdge>& selection,
                                     const SubsetView& view) {
  DirectedSystem sys;
  sys.vertices = view.closure;
  std::map<VertexId, OrientedEdge> sel;
  for (const auto& e : selection) {
    if (!omega.count(e.from) || omega.count(e.to)) continue;
    sel[e.to] = e;
  }
  for (const auto& e : view.boundary)
    if (!sel.count(e.to))
      throw InputError("selection misses outer vertex " + std::to_string(e.to));

  std::vector<VertexId> order(view.closure.begin(), view.closure.end());
  std::map<VertexId, int> idx;
  for (size_t i = 0; i < order.size(); ++i) idx[order[i]] = (int)i;
  const int n = (int)order.size();
  // rows: the directed operator; columns: vertices
  std::vector<std::vector<double>> M(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    VertexId x = order[i];
    if (omega.count(x)) {
      sys.out_degree[x] = g.degree(x);
      for (VertexId y : g.neighbors(x)) {
        double A = g.edge(x, y).A;
        M[i][idx[y]] += A * A;
        M[i][i] -= A * A;
      }
    } else {
      sys.out_degree[x] = 1;
      const auto& e = sel[x];
      M[i][idx[e.from]] += 1.0;
      M[i][i] -= 1.0;
      const auto& ed = g.edge(e.from, e.to);
      sys.v_outer_costs[x] = ed.g / ed.A;
    }
  }
  std::vector<std::vector<double>> Mt(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) Mt[i][j] = M[j][i];
  auto basis = null_space(Mt);
  if (basis.size() != 1)
    throw InvariantViolation("adjoint nullity " + std::to_string(basis.size()) +
                             " != 1 on a connected component");
  Vec v = basis[0];
  // one-signed and nonzero on omega
  double scale_ref = 0;
  for (VertexId x : omega) scale_ref = std::max(scale_ref, std::abs(v[idx[x]]));
  bool pos = false, neg = false;
  for (VertexId x : omega) {
    double val = v[idx[x]];
    if (std::abs(val) <= 1e-9 * scale_ref)
      throw InvariantViolation("dual vector vanishes on omega");
    (val > 0 ? pos : neg) = true;
  }
  if (pos && neg) throw InvariantViolation("dual vector changes sign on omega");
  if (neg)
    for (auto& val : v) val = -val;
  double vmin = std::numeric_limits<double>::infinity(), vmax = 0;
  for (VertexId x : omega) {
    vmin = std::min(vmin, v[idx[x]]);
    vmax = std::max(vmax, v[idx[x]]);
  }
  for (int i = 0; i < n; ++i) sys.v[order[i]] = v[i] / vmin;
  sys.max_over_min = vmax / vmin;
  return sys;
}

}  // namespace

DirectedSystem dual_vector(const GeometricGraph& g, const std::set<VertexId>& omega,
                           const std::vector<OrientedEdge>& selection) {
  SubsetView view = subset_view(g, omega);
  if (view.components.size() == 1) return dual_vector_connected(g, omega, selection, view);
  DirectedSystem merged;
  for (const auto& comp : view.components) {
    SubsetView cv = subset_view(g, comp);
    std::vector<OrientedEdge> sel;
    for (const auto& e : selection)
      if (comp.count(e.from)) sel.push_back(e);
    DirectedSystem part = dual_vector_connected(g, comp, sel, cv);
    merged.vertices.insert(part.vertices.begin(), part.vertices.end());
    merged.out_degree.insert(part.out_degree.begin(), part.out_degree.end());
    merged.v.insert(part.v.begin(), part.v.end());
    merged.v_outer_costs.insert(part.v_outer_costs.begin(), part.v_outer_costs.end());
    merged.max_over_min = std::max(merged.max_over_min, part.max_over_min);
  }
  return merged;
}

// ---------------------------------------------------------------------------
// dense two-phase simplex (Bland's rule)
// ---------------------------------------------------------------------------

namespace {

struct Simplex {
  // min c.x  s.t.  A x = b, x >= 0; b >= 0 assumed after row flips
  int m, n;
  std::vector<std::vector<double>> T;  // tableau m+1 rows, n+1 cols
  std::vector<int> basis;

  static constexpr double eps = 1e-11;

  bool pivot(int row, int col) {
    double p = T[row][col];
    if (std::abs(p) < eps) return false;
    for (int j = 0; j <= n; ++j) T[row][j] /= p;
    for (int i = 0; i <= m; ++i) {
      if (i == row) continue;
      double f = T[i][col];
      if (f == 0) continue;
      for (int j = 0; j <= n; ++j) T[i][j] -= f * T[row][j];
    }
    basis[row] = col;
    return true;
  }

  // returns 0 = optimal, 1 = unbounded
  int run() {
    while (true) {
      int col = -1;  // Bland: lowest-index improving column
      for (int j = 0; j < n; ++j)
        if (T[m][j] < -eps) {
          col = j;
          break;
        }
      if (col < 0) return 0;
      int row = -1;
      double best = 0;
      for (int i = 0; i < m; ++i) {
        if (T[i][col] > eps) {
          double ratio = T[i][n] / T[i][col];
          if (row < 0 || ratio < best - eps ||
              (std::abs(ratio - best) <= eps && basis[i] < basis[row])) {
            row = i;
            best = ratio;
          }
        }
      }
      if (row < 0) return 1;
      pivot(row, col);
    }
  }
};

// Solve min c.x s.t. A x = b (x >= 0). Returns {status, x, value}; status
// 0 = optimal, 1 = unbounded, 2 = infeasible.
int solve_lp(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
             const std::vector<double>& c, std::vector<double>& x, double& value) {
  const int m = (int)A.size(), n = (int)A[0].size();
  Simplex s;
  s.m = m;
  s.n = n + m;  // artificials appended
  s.T.assign(m + 1, std::vector<double>(s.n + 1, 0.0));
  s.basis.assign(m, 0);
  for (int i = 0; i < m; ++i) {
    double sign = b[i] < 0 ? -1.0 : 1.0;
    for (int j = 0; j < n; ++j) s.T[i][j] = sign * A[i][j];
    s.T[i][n + i] = 1.0;
    s.T[i][s.n] = sign * b[i];
    s.basis[i] = n + i;
  }
  // phase 1 objective: sum of artificials
  for (int j = 0; j <= s.n; ++j) {
    double sum = 0;
    for (int i = 0; i < m; ++i) sum += s.T[i][j];
    s.T[m][j] = (j >= n && j < s.n) ? 0.0 : -sum;
  }
  if (s.run() == 1) return 2;
  double phase1 = -s.T[m][s.n];
  if (phase1 > 1e-8) return 2;
  // drive artificials out of the basis where possible
  for (int i = 0; i < m; ++i) {
    if (s.basis[i] >= n) {
      for (int j = 0; j < n; ++j)
        if (std::abs(s.T[i][j]) > Simplex::eps) {
          s.pivot(i, j);
          break;
        }
    }
  }
  // phase 2 objective
  for (int j = 0; j <= s.n; ++j) s.T[m][j] = 0;
  for (int j = 0; j < n; ++j) s.T[m][j] = c[j];
  for (int j = n; j < s.n; ++j) s.T[m][j] = 1e18;  // artificials must stay out
  for (int i = 0; i < m; ++i) {
    double f = s.T[m][s.basis[i]];
    if (f == 0) continue;
    for (int j = 0; j <= s.n; ++j) s.T[m][j] -= f * s.T[i][j];
  }
  int st = s.run();
  if (st == 1) return 1;
  x.assign(n, 0.0);
  for (int i = 0; i < m; ++i)
    if (s.basis[i] < n) x[s.basis[i]] = s.T[i][s.n];
  value = 0;
  for (int j = 0; j < n; ++j) value += c[j] * x[j];
  return 0;
}

}  // namespace

LpResult lp_oracle(const GeometricGraph& g, const std::set<VertexId>& omega,
                   const std::vector<OrientedEdge>& selection) {
  SubsetView view = subset_view(g, omega);
  std::vector<VertexId> order(view.closure.begin(), view.closure.end());
  std::map<VertexId, int> idx;
  for (size_t i = 0; i < order.size(); ++i) idx[order[i]] = (int)i;
  const int nu = (int)order.size();
  // variables: u+ (nu), u- (nu), z+ , z-, slacks (#omega)
  std::vector<VertexId> oorder(omega.begin(), omega.end());
  const int ns = (int)oorder.size();
  const int nvar = 2 * nu + 2 + ns;
  std::vector<std::vector<double>> A;
  std::vector<double> b;
  auto urow = [&](std::vector<double>& row, int i, double coef) {
    row[i] += coef;
    row[nu + i] -= coef;
  };
  for (const auto& e : selection) {
    std::vector<double> row(nvar, 0.0);
    urow(row, idx[e.to], 1.0);
    urow(row, idx[e.from], -1.0);
    const auto& ed = g.edge(e.from, e.to);
    A.push_back(row);
    b.push_back(ed.g / ed.A);
  }
  for (int k = 0; k < ns; ++k) {
    VertexId x = oorder[k];
    std::vector<double> row(nvar, 0.0);
    row[2 * nu] += 1.0;      // z+
    row[2 * nu + 1] -= 1.0;  // z-
    for (VertexId y : g.neighbors(x)) {
      double A2 = g.edge(x, y).A * g.edge(x, y).A;
      urow(row, idx[y], -A2);
      urow(row, idx[x], A2);
    }
    row[2 * nu + 2 + k] = -1.0;  // z - lap u - s = 0
    A.push_back(row);
    b.push_back(0.0);
  }
  std::vector<double> c(nvar, 0.0);
  c[2 * nu] = 1.0;
  c[2 * nu + 1] = -1.0;
  std::vector<double> x;
  double value = 0;
  int st = solve_lp(A, b, c, x, value);
  if (st == 1)
    throw InvariantViolation("boundary-constrained Laplacian LP is unbounded");
  if (st == 2) throw InvariantViolation("LP infeasible; selection malformed");
  LpResult res;
  res.z = value;
  for (int i = 0; i < nu; ++i) res.u[order[i]] = x[i] - x[nu + i];
  // the optimizer must have a constant Laplacian over omega
  auto lap = laplacian(g, omega, res.u);
  double lmin = std::numeric_limits<double>::infinity(), lmax = -lmin;
  for (VertexId v : omega) {
    lmin = std::min(lmin, lap[v]);
    lmax = std::max(lmax, lap[v]);
  }
  if (lmax - lmin > 1e-8 * (1.0 + std::abs(lmax)))
    throw InvariantViolation("LP optimizer has nonconstant Laplacian");
  return res;
}

OptimalConstantResult optimal_constant(const GeometricGraph& g, const std::set<VertexId>& omega,
                                       long selection_cap) {
  SubsetView view = subset_view(g, omega);
  if (view.components.size() != 1) throw InputError("omega must be connected");
  std::vector<double> compat = compatibility_sums(g, view);
  OptimalConstantResult out;
  out.upper_bound = compat[0] / (double)omega.size();

  std::map<VertexId, std::vector<OrientedEdge>> in_edges;
  for (const auto& e : view.boundary) in_edges[e.to].push_back(e);
  std::vector<VertexId> outers;
  for (auto& [y, es] : in_edges) {
    std::sort(es.begin(), es.end(),
              [](const auto& a, const auto& b) { return a.from < b.from; });
    outers.push_back(y);
  }
  long count = 1;
  for (const auto& y : outers) {
    count *= (long)in_edges[y].size();
    if (count > selection_cap) {
      out.truncated = true;
      count = selection_cap;
      break;
    }
  }
  std::vector<size_t> pick(outers.size(), 0);
  long emitted = 0;
  bool have_best = false;
  while (emitted < count) {
    std::vector<OrientedEdge> sel;
    for (size_t i = 0; i < outers.size(); ++i) sel.push_back(in_edges[outers[i]][pick[i]]);
    DirectedSystem sys = dual_vector(g, omega, sel);
    double num = 0, den = 0;
    for (VertexId y : outers) num += sys.v.at(y) * sys.v_outer_costs.at(y);
    for (VertexId x : omega) den += sys.v.at(x);
    double C = num / den;
    // lower bound from the dual vector (trivial for nonnegative costs)
    double lb = std::min(0.0, -num / ((double)omega.size() * 1.0));
    if (C < lb - 1e-9)
      throw InvariantViolation("selection value below its lower bound");
    out.per_selection.push_back({sel, C, sys.max_over_min});
    if (!have_best || C < out.C - 1e-15) {
      out.C = C;
      out.best_selection = sel;
      have_best = true;
    }
    ++emitted;
    // mixed-radix increment, lexicographic over outer vertices
    int i = (int)pick.size() - 1;
    while (i >= 0) {
      if (++pick[i] < in_edges[outers[i]].size()) break;
      pick[i] = 0;
      --i;
    }
    if (i < 0) break;
  }
  if (!have_best) throw InvariantViolation("no selection enumerated");

  LpResult lp = lp_oracle(g, omega, out.best_selection);
  out.lp_crosscheck = lp.z;
  if (std::abs(lp.z - out.C) > 1e-9 * std::max(1.0, std::abs(out.C)))
    throw InvariantViolation("LP and dual-vector formula disagree: " +
                             std::to_string(lp.z) + " vs " + std::to_string(out.C));
  if (out.C > out.upper_bound + 1e-9)
    throw InvariantViolation("optimal constant exceeds the solvable-constant bound");
  // the LP optimizer's argmax must contain the support of the dual vector
  {
    auto lap = laplacian(g, omega, lp.u);
    double lmax = -std::numeric_limits<double>::infinity();
    for (VertexId x : omega) lmax = std::max(lmax, lap[x]);
    DirectedSystem sys = dual_vector(g, omega, out.best_selection);
    for (VertexId x : omega)
      if (sys.v.at(x) > 1e-9 && lap[x] < lmax - 1e-8 * (1.0 + std::abs(lmax)))
        throw InvariantViolation("argmax does not contain the dual support");
  }
  return out;
}

std::string NeumannSolution::to_json() const {
  JsonWriter w;
  w.begin_object();
  w.key("divergence_residual").value(divergence_residual);
  w.key("f").begin_object();
  for (const auto& [x, v] : f) w.key(std::to_string(x)).value(v);
  w.end_object();
  w.key("laplacian").begin_object();
  for (const auto& [x, v] : achieved) w.key(std::to_string(x)).value(v);
  w.end_object();
  w.key("mode").value(mode == NeumannMode::naive ? "naive" : "hamamuki");
  w.key("selection").begin_array();
  for (const auto& e : selection) {
    w.begin_object();
    w.key("from").value((long long)e.from);
    w.key("to").value((long long)e.to);
    w.end_object();
  }
  w.end_array();
  w.key("solve_residual").value(solve_residual);
  w.key("u").begin_object();
  for (const auto& [x, v] : u) w.key(std::to_string(x)).value(v);
  w.end_object();
  w.end_object();
  return w.str();
}

}  // namespace isoforge
