#include "isoforge/polytope.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "isoforge/jsonout.hpp"

namespace isoforge {

namespace {

struct Plane {
  Vec n;       // unit normal
  double b;    // offset for unit normal
  bool box;    // synthetic bounding-box plane
};

// k-dimensional measure of the face spanned by `verts`, lying in the affine flat cut
// out by `on` (unit normals of active planes). Recurses on ridges; k = d - |on|.
double face_measure(const std::vector<Plane>& planes, const std::vector<Vec>& all_verts,
                    std::vector<int> verts, std::vector<int> on, int d, double act_tol) {
  const int k = d - (int)on.size();
  if (verts.empty()) return 0.0;
  if (k <= 0) return 1.0;  // 0-dimensional counting measure
  if (k == 1) {
    double m = 0;
    for (size_t i = 0; i < verts.size(); ++i)
      for (size_t j = i + 1; j < verts.size(); ++j)
        m = std::max(m, dist(all_verts[verts[i]], all_verts[verts[j]]));
    return m;
  }
  Vec c(d, 0.0);
  for (int vi : verts) c = add(c, all_verts[vi]);
  c = scale(c, 1.0 / (double)verts.size());

  std::vector<Vec> on_normals;
  for (int pi : on) on_normals.push_back(planes[pi].n);

  std::set<std::vector<int>> seen_ridges;
  double measure = 0;
  for (int pi = 0; pi < (int)planes.size(); ++pi) {
    if (std::find(on.begin(), on.end(), pi) != on.end()) continue;
    std::vector<int> ridge;
    for (int vi : verts)
      if (std::abs(dot(planes[pi].n, all_verts[vi]) - planes[pi].b) <= act_tol)
        ridge.push_back(vi);
    if ((int)ridge.size() < k) continue;  // a (k-1)-dimensional ridge needs >= k vertices
    if (!seen_ridges.insert(ridge).second) continue;
    // height of the ridge plane seen from c inside the current flat:
    // project the plane normal onto the flat's linear space first
    Vec pn = planes[pi].n;
    std::vector<Vec> onb;
    for (const Vec& nn : on_normals) {
      Vec v = nn;
      for (const Vec& u : onb) v = sub(v, scale(u, dot(u, v)));
      double l = norm(v);
      if (l > 1e-10) onb.push_back(scale(v, 1.0 / l));
    }
    Vec proj = pn;
    for (const Vec& u : onb) proj = sub(proj, scale(u, dot(u, proj)));
    double pl = norm(proj);
    if (pl < 1e-10) continue;  // plane parallel to the flat
    double h = std::abs(planes[pi].b - dot(pn, c)) / pl;
    std::vector<int> on2 = on;
    on2.push_back(pi);
    double rm = face_measure(planes, all_verts, ridge, on2, d, act_tol);
    measure += h * rm;
  }
  return measure / (double)k;
}

}  // namespace

bool Polytope::contains(const Vec& p, double slack) const {
  for (const auto& h : halfspaces) {
    double nl = norm(h.normal);
    if (nl == 0) continue;
    if (dot(h.normal, p) > h.offset + Tol::feas(h.offset) + slack * nl) return false;
  }
  return true;
}

Vec Polytope::centroid() const {
  Vec c(dim, 0.0);
  if (vertices.empty()) return c;
  for (const auto& v : vertices) c = add(c, v);
  return scale(c, 1.0 / (double)vertices.size());
}

double Polytope::minkowski_residual() const {
  Vec s(dim, 0.0);
  double total = 0;
  for (const auto& f : facets) {
    s = add(s, scale(f.normal, f.area));
    total += f.area;
  }
  if (total == 0) return 0;
  return norm(s) / total;
}

double Polytope::second_moment(const Vec& p) const {
  // Fan of simplices from the vertex centroid over facet triangulations.
  // For a simplex with vertices v0..vd:
  //   integral |x-p|^2 dx = vol/((d+1)(d+2)) * (|sum(vi-p)|^2 + sum|vi-p|^2)
  if (dim == 1) {
    if (vertices.size() < 2) return 0;
    double lo = vertices[0][0], hi = lo;
    for (const auto& v : vertices) {
      lo = std::min(lo, v[0]);
      hi = std::max(hi, v[0]);
    }
    double a = lo - p[0], b = hi - p[0];
    return (b * b * b - a * a * a) / 3.0;
  }
  Vec c = centroid();
  double total = 0;
  for (const auto& f : facets) {
    if (f.vertices.size() < (size_t)dim) continue;
    // triangulate the facet as a fan from its first vertex (convex facets)
    // 2D: facet is a segment; 3D: polygon ordered below in construction.
    const auto& fv = f.vertices;
    for (size_t i = 1; i + 1 < fv.size() || (dim == 2 && i < 2 && fv.size() == 2); ++i) {
      std::vector<Vec> simplex;
      simplex.push_back(c);
      if (dim == 2) {
        if (fv.size() != 2 || i > 1) break;
        simplex.push_back(vertices[fv[0]]);
        simplex.push_back(vertices[fv[1]]);
      } else {
        simplex.push_back(vertices[fv[0]]);
        simplex.push_back(vertices[fv[i]]);
        simplex.push_back(vertices[fv[i + 1]]);
      }
      if ((int)simplex.size() != dim + 1) break;
      // simplex volume via determinant
      std::vector<std::vector<double>> M(dim, std::vector<double>(dim));
      for (int r = 0; r < dim; ++r)
        for (int cc = 0; cc < dim; ++cc) M[r][cc] = simplex[r + 1][cc] - simplex[0][cc];
      double det = 1.0;
      {  // small LU determinant
        auto A = M;
        for (int col = 0; col < dim; ++col) {
          int piv = col;
          for (int r = col + 1; r < dim; ++r)
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
          if (std::abs(A[piv][col]) < 1e-14) {
            det = 0;
            break;
          }
          if (piv != col) {
            std::swap(A[piv], A[col]);
            det = -det;
          }
          det *= A[col][col];
          for (int r = col + 1; r < dim; ++r) {
            double fmul = A[r][col] / A[col][col];
            for (int cc = col; cc < dim; ++cc) A[r][cc] -= fmul * A[col][cc];
          }
        }
      }
      double vol = std::abs(det);
      for (int q = 2; q <= dim; ++q) vol /= q;
      if (vol <= 0) continue;
      Vec sum(dim, 0.0);
      double sq = 0;
      for (const auto& sv : simplex) {
        Vec dvec = sub(sv, p);
        sum = add(sum, dvec);
        sq += norm2(dvec);
      }
      total += vol / ((double)(dim + 1) * (dim + 2)) * (norm2(sum) + sq);
    }
  }
  return total;
}

double Polytope::vertex_hausdorff(const Polytope& a, const Polytope& b) {
  auto one_sided = [](const Polytope& x, const Polytope& y) {
    double worst = 0;
    for (const auto& v : x.vertices) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& w : y.vertices) best = std::min(best, dist(v, w));
      worst = std::max(worst, best);
    }
    return x.vertices.empty() ? 0.0 : worst;
  };
  if (a.vertices.empty() != b.vertices.empty())
    return std::numeric_limits<double>::infinity();
  return std::max(one_sided(a, b), one_sided(b, a));
}

Polytope intersect_halfspaces(std::vector<Halfspace> hs, int dim) {
  Polytope out;
  out.dim = dim;
  out.halfspaces = hs;

  // Normalize to unit normals, merge parallel duplicates keeping the tighter offset.
  std::vector<Plane> planes;
  for (const auto& h : hs) {
    double l = norm(h.normal);
    if (l <= 0) throw InputError("halfspace with zero normal");
    Plane p{scale(h.normal, 1.0 / l), h.offset / l, false};
    bool merged = false;
    for (auto& q : planes) {
      if (q.box) continue;
      if (dist(q.n, p.n) < 1e-12) {
        q.b = std::min(q.b, p.b);
        merged = true;
        break;
      }
    }
    if (!merged) planes.push_back(p);
  }

  double bscale = 1.0;
  for (const auto& p : planes) bscale = std::max(bscale, std::abs(p.b));
  const double box_r = 1e7 * bscale;
  const size_t n_real = planes.size();
  for (int i = 0; i < dim; ++i) {
    for (double s : {1.0, -1.0}) {
      Plane p;
      p.n.assign(dim, 0.0);
      p.n[i] = s;
      p.b = box_r;
      p.box = true;
      planes.push_back(p);
    }
  }

  // Enumerate d-subsets of planes, keep feasible solutions, deduplicate.
  const int m = (int)planes.size();
  std::vector<int> idx(dim);
  std::vector<Vec> verts;
  std::vector<bool> vert_on_box;
  std::vector<int> comb(dim);
  std::vector<std::vector<int>> combos;
  {
    std::vector<int> c(dim);
    // iterative combination enumeration
    for (int i = 0; i < dim; ++i) c[i] = i;
    while (true) {
      combos.push_back(c);
      int i = dim - 1;
      while (i >= 0 && c[i] == m - dim + i) --i;
      if (i < 0) break;
      ++c[i];
      for (int j = i + 1; j < dim; ++j) c[j] = c[j - 1] + 1;
    }
  }
  for (const auto& c : combos) {
    std::vector<std::vector<double>> A(dim, std::vector<double>(dim));
    std::vector<double> b(dim);
    for (int r = 0; r < dim; ++r) {
      A[r] = planes[c[r]].n;
      b[r] = planes[c[r]].b;
    }
    Vec x;
    if (!solve_dense(A, b, x, 1e-10)) continue;
    bool feas = true;
    for (const auto& p : planes) {
      if (dot(p.n, x) > p.b + Tol::feas(p.b)) {
        feas = false;
        break;
      }
    }
    if (!feas) continue;
    bool dup = false;
    for (const auto& v : verts)
      if (dist(v, x) < Tol::vert * (1.0 + norm(x))) {
        dup = true;
        break;
      }
    if (dup) continue;
    bool on_box = false;
    for (int r = 0; r < dim; ++r)
      if (planes[c[r]].box) on_box = true;
    verts.push_back(x);
    vert_on_box.push_back(on_box);
  }

  if (verts.empty()) {
    out.empty_interior = true;
    out.volume = 0;
    return out;
  }

  out.unbounded = false;
  for (size_t i = 0; i < verts.size(); ++i) {
    // a vertex genuinely on the synthetic box means a recession direction exists
    if (vert_on_box[i]) out.unbounded = true;
  }
  if (out.unbounded) {
    // report only the finite vertices; volume is the +infinity sentinel
    for (size_t i = 0; i < verts.size(); ++i)
      if (!vert_on_box[i]) out.vertices.push_back(verts[i]);
    out.volume = std::numeric_limits<double>::infinity();
    return out;
  }
  out.vertices = verts;

  // activity tolerance scales with coordinates actually present
  double vscale = 1.0;
  for (const auto& v : out.vertices) vscale = std::max(vscale, norm(v));
  const double act_tol = 1e-7 * vscale;

  // facets per real plane
  for (size_t pi = 0; pi < n_real; ++pi) {
    std::vector<int> on;
    for (int vi = 0; vi < (int)out.vertices.size(); ++vi)
      if (std::abs(dot(planes[pi].n, out.vertices[vi]) - planes[pi].b) <= act_tol)
        on.push_back(vi);
    if ((int)on.size() < dim) continue;
    Facet f;
    f.normal = planes[pi].n;
    f.vertices = on;
    if (dim == 3) {
      // order polygon vertices angularly in the facet plane for fan triangulation
      Vec c(3, 0.0);
      for (int vi : on) c = add(c, out.vertices[vi]);
      c = scale(c, 1.0 / (double)on.size());
      Vec u0 = sub(out.vertices[on[0]], c);
      double l0 = norm(u0);
      if (l0 > 1e-14) {
        u0 = scale(u0, 1.0 / l0);
        Vec w = {f.normal[1] * u0[2] - f.normal[2] * u0[1],
                 f.normal[2] * u0[0] - f.normal[0] * u0[2],
                 f.normal[0] * u0[1] - f.normal[1] * u0[0]};
        std::sort(f.vertices.begin(), f.vertices.end(), [&](int a, int b) {
          Vec va = sub(out.vertices[a], c), vb = sub(out.vertices[b], c);
          return std::atan2(dot(va, w), dot(va, u0)) < std::atan2(dot(vb, w), dot(vb, u0));
        });
      }
    }
    std::vector<Plane> all = planes;
    f.area = face_measure(all, out.vertices, f.vertices, {(int)pi}, dim, act_tol);
    if (f.area <= act_tol * act_tol && dim > 1) continue;  // grazing plane, no real facet
    out.facets.push_back(f);
  }
  if (dim == 1) {
    // facets of an interval are its endpoints, 0-dimensional measure 1 each
    out.facets.clear();
    double lo = out.vertices[0][0], hi = lo;
    for (const auto& v : out.vertices) {
      lo = std::min(lo, v[0]);
      hi = std::max(hi, v[0]);
    }
    for (double s : {-1.0, 1.0}) {
      Facet f;
      f.normal = {s};
      f.area = 1.0;
      for (int vi = 0; vi < (int)out.vertices.size(); ++vi)
        if (std::abs(out.vertices[vi][0] - (s > 0 ? hi : lo)) < Tol::vert) f.vertices.push_back(vi);
      out.facets.push_back(f);
    }
    out.volume = hi - lo;
    out.empty_interior = out.volume <= Tol::vert;
    return out;
  }

  // volume as a fan from the vertex centroid over facets
  Vec c = out.centroid();
  double vol = 0;
  for (const auto& f : out.facets) {
    double h = std::abs(dot(f.normal, c) -
                        dot(f.normal, out.vertices[f.vertices[0]]));
    vol += h * f.area;
  }
  out.volume = vol / (double)dim;
  out.empty_interior = out.volume <= std::pow(act_tol, dim);
  return out;
}

Polytope polytope_product(const Polytope& a, const Polytope& b) {
  Polytope out;
  out.dim = a.dim + b.dim;
  auto pad = [&](const Vec& v, bool first) {
    Vec r(out.dim, 0.0);
    if (first)
      for (int i = 0; i < a.dim; ++i) r[i] = v[i];
    else
      for (int i = 0; i < b.dim; ++i) r[a.dim + i] = v[i];
    return r;
  };
  for (const auto& h : a.halfspaces) out.halfspaces.push_back({pad(h.normal, true), h.offset});
  for (const auto& h : b.halfspaces) out.halfspaces.push_back({pad(h.normal, false), h.offset});
  for (const auto& va : a.vertices)
    for (const auto& vb : b.vertices) {
      Vec v = pad(va, true);
      for (int i = 0; i < b.dim; ++i) v[a.dim + i] = vb[i];
      out.vertices.push_back(v);
    }
  out.volume = a.volume * b.volume;
  out.unbounded = a.unbounded || b.unbounded;
  out.empty_interior = a.empty_interior || b.empty_interior;
  for (const auto& f : a.facets) {
    Facet nf;
    nf.normal = pad(f.normal, true);
    nf.area = f.area * b.volume;
    out.facets.push_back(nf);
  }
  for (const auto& f : b.facets) {
    Facet nf;
    nf.normal = pad(f.normal, false);
    nf.area = f.area * a.volume;
    out.facets.push_back(nf);
  }
  return out;
}

Polytope simplex_polytope(const std::vector<Vec>& verts) {
  if (verts.empty()) throw InputError("empty simplex");
  const int d = (int)verts[0].size();
  if ((int)verts.size() != d + 1) throw InputError("simplex needs d+1 vertices");
  std::vector<Halfspace> hs;
  for (int skip = 0; skip <= d; ++skip) {
    std::vector<Vec> face;
    for (int i = 0; i <= d; ++i)
      if (i != skip) face.push_back(verts[i]);
    std::vector<std::vector<double>> rows;
    for (size_t i = 1; i < face.size(); ++i) rows.push_back(sub(face[i], face[0]));
    if (rows.empty()) rows.push_back(Vec(d, 0.0));
    auto ns = null_space(rows);
    if (ns.empty()) throw InputError("degenerate simplex");
    Vec n = scale(ns[0], 1.0 / norm(ns[0]));
    double b = dot(n, face[0]);
    if (dot(n, verts[skip]) > b) {  // orient away from the excluded vertex
      n = scale(n, -1.0);
      b = -b;
    }
    hs.push_back({n, b});
  }
  return intersect_halfspaces(hs, d);
}

std::string polytope_to_json(const Polytope& p) {
  JsonWriter w;
  w.begin_object();
  w.key("dim").value(p.dim);
  w.key("empty_interior").value(p.empty_interior);
  w.key("facets").begin_array();
  for (const auto& f : p.facets) {
    w.begin_object();
    w.key("area").value(f.area);
    w.key("n").value(f.normal);
    w.end_object();
  }
  w.end_array();
  w.key("halfspaces").begin_array();
  for (const auto& h : p.halfspaces) {
    w.begin_object();
    w.key("b").value(h.offset);
    w.key("n").value(h.normal);
    w.end_object();
  }
  w.end_array();
  w.key("unbounded").value(p.unbounded);
  w.key("vertices").begin_array();
  for (const auto& v : p.vertices) w.value(v);
  w.end_array();
  w.key("volume").value(p.volume);
  w.end_object();
  return w.str();
}

}  // namespace isoforge
