#include "isoforge/transport.hpp"

#include <algorithm>
#include <cmath>

#include "isoforge/jsonout.hpp"
#include "isoforge/minkowski.hpp"

namespace isoforge {

PowerDiagram power_diagram(const std::vector<Vec>& sites, const std::vector<double>& weights,
                           const Polytope& body) {
  if (sites.empty()) throw InputError("no sites");
  if (weights.size() != sites.size()) throw InputError("weights/sites size mismatch");
  if (body.unbounded || body.vertices.empty()) throw InputError("body must be bounded");
  for (size_t i = 0; i < sites.size(); ++i)
    for (size_t j = i + 1; j < sites.size(); ++j)
      if (dist(sites[i], sites[j]) < 1e-12) throw InputError("duplicate sites");

  PowerDiagram pd;
  pd.sites = sites;
  pd.weights = weights;
  pd.body = body;
  const int d = body.dim;
  for (size_t i = 0; i < sites.size(); ++i) {
    std::vector<Halfspace> hs = body.halfspaces;
    for (size_t j = 0; j < sites.size(); ++j) {
      if (j == i) continue;
      // |p-x|^2 - w(p) <= |q-x|^2 - w(q)  <=>  2(q-p).x <= |q|^2-|p|^2 - w(q)+w(p)
      Vec n = scale(sub(sites[j], sites[i]), 2.0);
      double b = norm2(sites[j]) - norm2(sites[i]) - weights[j] + weights[i];
      hs.push_back({n, b});
    }
    Polytope cell = intersect_halfspaces(hs, d);
    pd.volumes.push_back(cell.volume);
    pd.empty_cell.push_back(cell.empty_interior || cell.vertices.empty());
    pd.cells.push_back(std::move(cell));
  }
  return pd;
}

namespace {
// Kantorovich dual value for equal targets t: sum_p t w_p + int_H min_q(|x-q|^2 - w_q)
double dual_value(const PowerDiagram& pd, double target) {
  double val = 0;
  for (size_t i = 0; i < pd.sites.size(); ++i) {
    val += target * pd.weights[i];
    if (!pd.empty_cell[i])
      val += pd.cells[i].second_moment(pd.sites[i]) - pd.weights[i] * pd.volumes[i];
  }
  return val;
}
}  // namespace

FitResult fit_equal_volumes(const std::vector<Vec>& sites, const Polytope& body,
                            int max_iter, double vol_tol_rel) {
  const size_t n = sites.size();
  if (n == 0) throw InputError("no sites");
  const double target = body.volume / (double)n;
  std::vector<double> w(n, 0.0);
  PowerDiagram pd = power_diagram(sites, w, body);
  double F = dual_value(pd, target);
  double step = std::pow(target, 2.0 / body.dim);
  FitResult out;
  for (int it = 0; it < max_iter; ++it) {
    double res = 0;
    for (size_t i = 0; i < n; ++i) res = std::max(res, std::abs(pd.volumes[i] - target));
    if (res <= vol_tol_rel * body.volume) {
      out.diagram = pd;
      out.iterations = it;
      out.residual = res;
      out.potential.sites = sites;
      for (size_t i = 0; i < n; ++i)
        out.potential.values.push_back((norm2(sites[i]) - w[i]) / 2.0);
      return out;
    }
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      std::vector<double> w2(n);
      for (size_t i = 0; i < n; ++i) w2[i] = w[i] + step * (target - pd.volumes[i]);
      for (size_t i = n; i-- > 0;) w2[i] -= w2[0];  // pin w(site0) = 0
      PowerDiagram pd2 = power_diagram(sites, w2, body);
      double F2 = dual_value(pd2, target);
      if (F2 >= F - 1e-14 * std::abs(F)) {  // ascent step must not decrease the dual
        w = w2;
        pd = std::move(pd2);
        F = F2;
        step *= 1.2;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  double res = 0;
  for (size_t i = 0; i < n; ++i) res = std::max(res, std::abs(pd.volumes[i] - target));
  throw FitError("fit_equal_volumes did not converge", res);
}

Polytope aleksandrov_cell(const AleksandrovSolution& sol, size_t site, const Polytope& body) {
  // {x : x.p - c_p >= x.q - c_q for all q} within the body
  std::vector<Halfspace> hs = body.halfspaces;
  const Vec& p = sol.sites[site];
  for (size_t j = 0; j < sol.sites.size(); ++j) {
    if (j == site) continue;
    Vec n = sub(sol.sites[j], p);
    hs.push_back({n, sol.values[j] - sol.values[site]});
  }
  return intersect_halfspaces(hs, body.dim);
}

std::string SufficiencyReport::first_failure() const {
  if (!reciprocal) return "edges are not perpendicular to the dual facets";
  if (!simplicial) return "dual cells are not simplices (cannot tile the target shape)";
  if (!equal_volumes) return "dual cells have unequal volumes";
  if (!ratio1_constant) return "facet/(length*weight^2) ratio is not constant";
  if (!ratio2_constant) return "facet*length/cost^2 ratio is not constant";
  if (!c_constant) return "cell-optimization constant varies across orbits";
  return "";
}

SufficiencyReport verify_sufficiency(const LatticeBundle& b) {
  SufficiencyReport rep;
  const int d = b.dim;

  rep.vol_min = std::numeric_limits<double>::infinity();
  rep.vol_max = 0;
  for (const auto& [id, cell] : b.dual_cells) {
    rep.vol_min = std::min(rep.vol_min, cell.volume);
    rep.vol_max = std::max(rep.vol_max, cell.volume);
    if ((int)cell.vertices.size() != d + 1) rep.simplicial = false;
  }
  if (rep.vol_max - rep.vol_min > 1e-9 * rep.vol_max) rep.equal_volumes = false;

  rep.ratio1_min = rep.ratio2_min = std::numeric_limits<double>::infinity();
  rep.ratio1_max = rep.ratio2_max = 0;
  for (const auto& [k, e] : b.graph.edges) {
    double F = b.facet_area(k.first, k.second);
    Vec dv = sub(b.graph.pos(k.second), b.graph.pos(k.first));
    double ell = norm(dv);
    // reciprocity: the edge must align with a dual facet normal; measured as the
    // relative component of the edge orthogonal to the normal
    const Polytope& cu = b.dual_cells.at(k.first);
    double best_sine = 1.0;
    for (const auto& f : cu.facets) {
      Vec perp = sub(dv, scale(f.normal, dot(f.normal, dv)));
      best_sine = std::min(best_sine, norm(perp) / ell);
    }
    rep.worst_reciprocity = std::max(rep.worst_reciprocity, best_sine);
    if (best_sine > Tol::geom) rep.reciprocal = false;

    double r1 = F / (ell * e.A * e.A);
    rep.ratio1_min = std::min(rep.ratio1_min, r1);
    rep.ratio1_max = std::max(rep.ratio1_max, r1);
    if (e.g > 0) {
      double r2 = F * ell / (e.g * e.g);
      rep.ratio2_min = std::min(rep.ratio2_min, r2);
      rep.ratio2_max = std::max(rep.ratio2_max, r2);
    }
  }
  if (rep.ratio1_max - rep.ratio1_min > 1e-9 * rep.ratio1_max) rep.ratio1_constant = false;
  if (rep.ratio2_max - rep.ratio2_min > 1e-9 * rep.ratio2_max) rep.ratio2_constant = false;

  // C_{V_x} per orbit, computed on one full-degree representative each
  std::map<int, VertexId> reps;
  for (const auto& [id, orb] : b.orbit)
    if (b.core.count(id) && !reps.count(orb)) reps[orb] = id;
  double cmin = std::numeric_limits<double>::infinity(), cmax = 0;
  for (const auto& [orb, id] : reps) {
    std::vector<Vec> fan;
    for (VertexId y : b.graph.neighbors(id)) {
      double A = b.graph.edge(id, y).A;
      fan.push_back(scale(sub(b.graph.pos(y), b.graph.pos(id)), A * A));
    }
    MinkowskiSolution ms = minkowski_constant(fan);
    if (!ms.feasible) {
      rep.c_constant = false;
      rep.detail += "infeasible fan at orbit " + std::to_string(orb) + "; ";
      continue;
    }
    cmin = std::min(cmin, ms.constant);
    cmax = std::max(cmax, ms.constant);
  }
  if (!reps.empty() && cmax - cmin > 1e-7 * cmax) rep.c_constant = false;
  rep.c_value = cmax;
  return rep;
}

std::string PowerDiagram::to_json() const {
  JsonWriter w;
  w.begin_object();
  w.key("body_volume").value(body.volume);
  w.key("cells").begin_array();
  for (size_t i = 0; i < sites.size(); ++i) {
    w.begin_object();
    w.key("empty").value((bool)empty_cell[i]);
    w.key("site").value(sites[i]);
    w.key("volume").value(volumes[i]);
    w.key("weight").value(weights[i]);
    w.end_object();
  }
  w.end_array();
  w.end_object();
  return w.str();
}

std::string SufficiencyReport::to_json() const {
  JsonWriter w;
  w.begin_object();
  w.key("c_constant").value(c_constant);
  w.key("c_value").value(c_value);
  w.key("equal_volumes").value(equal_volumes);
  w.key("first_failure").value(first_failure());
  w.key("pass").value(pass());
  w.key("ratio1").begin_array().value(ratio1_min).value(ratio1_max).end_array();
  w.key("ratio2").begin_array().value(ratio2_min).value(ratio2_max).end_array();
  w.key("reciprocal").value(reciprocal);
  w.key("simplicial").value(simplicial);
  w.key("volumes").begin_array().value(vol_min).value(vol_max).end_array();
  w.key("worst_reciprocity").value(worst_reciprocity);
  w.end_object();
  return w.str();
}

}  // namespace isoforge
