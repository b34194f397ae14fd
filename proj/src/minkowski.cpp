#include "isoforge/minkowski.hpp"

#include <algorithm>

namespace isoforge {

namespace {

std::vector<Vec> merge_duplicate_directions(const std::vector<Vec>& fan) {
  // H_v(c) cap H_v(c') = H_v(min), and the budget is additive, so vectors sharing a
  // direction act as one vector whose length is the summed length.
  std::vector<Vec> merged;
  std::vector<double> lengths;
  for (const auto& v : fan) {
    double l = norm(v);
    if (l <= 0) throw InputError("fan vector of zero length");
    Vec u = scale(v, 1.0 / l);
    bool found = false;
    for (size_t i = 0; i < merged.size(); ++i) {
      if (dist(scale(merged[i], 1.0 / lengths[i]), u) < 1e-10) {
        lengths[i] += l;
        merged[i] = scale(u, lengths[i]);
        found = true;
        break;
      }
    }
    if (!found) {
      merged.push_back(v);
      lengths.push_back(l);
    }
  }
  return merged;
}

Polytope build(const std::vector<Vec>& fan, const std::vector<double>& c, int dim) {
  std::vector<Halfspace> hs;
  for (size_t i = 0; i < fan.size(); ++i) hs.push_back({fan[i], c[i]});
  return intersect_halfspaces(hs, dim);
}

// Facet area per fan index; zero if the halfspace is inactive at this c.
std::vector<double> facet_areas(const Polytope& p, const std::vector<Vec>& fan) {
  std::vector<double> areas(fan.size(), 0.0);
  for (size_t i = 0; i < fan.size(); ++i) {
    Vec u = scale(fan[i], 1.0 / norm(fan[i]));
    for (const auto& f : p.facets)
      if (dist(f.normal, u) < 1e-8) areas[i] += f.area;
  }
  return areas;
}

}  // namespace

MinkowskiSolution minkowski_constant(const std::vector<Vec>& fan_in, int max_iter) {
  if (fan_in.empty()) throw InputError("empty fan");
  const int dim = (int)fan_in[0].size();
  MinkowskiSolution sol;
  sol.fan = merge_duplicate_directions(fan_in);
  const int n = (int)sol.fan.size();

  Vec sum(dim, 0.0);
  double total_len = 0;
  std::vector<std::vector<double>> span_rows;
  for (const auto& v : sol.fan) {
    sum = add(sum, v);
    total_len += norm(v);
    span_rows.push_back(v);
  }
  if (norm(sum) > Tol::geom * total_len || matrix_rank(span_rows) < dim) {
    sol.feasible = false;
    return sol;
  }
  sol.feasible = true;

  std::vector<double> c(n, 1.0 / n);
  Polytope poly = build(sol.fan, c, dim);
  double step = 0.5 / n;
  for (int it = 0; it < max_iter; ++it) {
    sol.iterations = it;
    std::vector<double> areas = facet_areas(poly, sol.fan);
    std::vector<double> ratio(n);
    double rmax = 0, rmin = std::numeric_limits<double>::infinity(), gmean = 0;
    for (int i = 0; i < n; ++i) {
      ratio[i] = areas[i] / norm(sol.fan[i]);
      rmax = std::max(rmax, ratio[i]);
      rmin = std::min(rmin, ratio[i]);
      gmean += ratio[i];
    }
    gmean /= n;
    if (rmax > 0 && (rmax - rmin) <= 1e-8 * rmax) {
      sol.c = c;
      sol.polytope = poly;
      sol.constant = poly.volume;
      sol.alpha = dim * poly.volume;
      return sol;
    }
    // projected gradient: subtract the mean so the budget stays on the simplex
    std::vector<double> dir(n);
    double dnorm = 0;
    for (int i = 0; i < n; ++i) {
      dir[i] = ratio[i] - gmean;
      dnorm = std::max(dnorm, std::abs(dir[i]));
    }
    if (dnorm == 0) {
      sol.c = c;
      sol.polytope = poly;
      sol.constant = poly.volume;
      sol.alpha = dim * poly.volume;
      return sol;
    }
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      std::vector<double> c2(n);
      for (int i = 0; i < n; ++i) c2[i] = c[i] + step * dir[i] / dnorm;
      Polytope p2 = build(sol.fan, c2, dim);
      if (p2.volume > poly.volume) {
        c = c2;
        poly = p2;
        step *= 1.3;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // gradient produced no ascent at machine resolution: treat as converged if
      // ratios are within a looser band, else keep shrinking via the iter budget
      if (rmax > 0 && (rmax - rmin) <= 1e-7 * rmax) {
        sol.c = c;
        sol.polytope = poly;
        sol.constant = poly.volume;
        sol.alpha = dim * poly.volume;
        return sol;
      }
    }
  }
  sol.c = c;
  sol.polytope = poly;
  sol.constant = poly.volume;
  sol.alpha = dim * poly.volume;
  throw IterationLimitError("minkowski_constant: no convergence after max_iter", sol);
}

Polytope wulff_shape(const std::vector<Vec>& fan) {
  if (fan.empty()) throw InputError("empty fan");
  const int dim = (int)fan[0].size();
  std::vector<Halfspace> hs;
  for (const auto& v : fan) {
    double l = norm(v);
    if (l <= 0) throw InputError("fan vector of zero length");
    hs.push_back({scale(v, 1.0 / l), 1.0});
  }
  return intersect_halfspaces(hs, dim);
}

}  // namespace isoforge
