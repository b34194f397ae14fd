#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "isoforge/isoperimetry.hpp"
#include "isoforge/jsonout.hpp"
#include "isoforge/minkowski.hpp"
#include "isoforge/pde.hpp"
#include "isoforge/subdifferential.hpp"
#include "isoforge/transport.hpp"

using namespace isoforge;

namespace {

struct Options {
  std::string lattice = "honeycomb";
  int window = 4;
  int max_n = 6;
  int jobs = 0;
  std::string out;
  std::string format = "json";
  double tol_geom = Tol::geom;
  long selection_cap = 100000;
  std::string fan;
  std::vector<int> omega_ids;
  std::string reference;  // kind:k
  int hex_k = 0;
  std::vector<double> affine;
  std::vector<double> lambdas;
};

LatticeBundle build_bundle(const Options& o) {
  if (o.lattice == "honeycomb" && o.affine.size() == 4)
    return make_honeycomb(o.window,
                          std::array<double, 4>{o.affine[0], o.affine[1], o.affine[2], o.affine[3]});
  if (o.lattice == "grid" && !o.lambdas.empty())
    return make_product_grid({o.lambdas}, o.window);
  return generate(o.lattice, o.window);
}

std::vector<Vec> parse_fan(const std::string& s) {
  std::vector<Vec> fan;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ';')) {
    Vec v;
    std::stringstream ps(part);
    std::string num;
    while (std::getline(ps, num, ',')) v.push_back(std::stod(num));
    if (!v.empty()) fan.push_back(v);
  }
  return fan;
}

std::set<VertexId> resolve_omega(const Options& o, const LatticeBundle& b) {
  if (!o.reference.empty()) {
    auto pos = o.reference.find(':');
    std::string kind = o.reference.substr(0, pos);
    int k = pos == std::string::npos ? 1 : std::stoi(o.reference.substr(pos + 1));
    ReferenceKind rk;
    if (kind == "hex_triangular")
      rk = ReferenceKind::hex_triangular;
    else if (kind == "hex_honeycomb")
      rk = ReferenceKind::hex_honeycomb;
    else if (kind == "rhombic_dodeca_bcc")
      rk = ReferenceKind::rhombic_dodeca_bcc;
    else
      throw InputError("unknown reference kind: " + kind);
    return reference_subset(b, rk, k);
  }
  if (!o.omega_ids.empty()) return std::set<VertexId>(o.omega_ids.begin(), o.omega_ids.end());
  throw InputError("provide --omega or --reference");
}

void write_report(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text << "\n";
  } else {
    std::ofstream f(o.out, std::ios::binary);
    f << text << "\n";
  }
}

int run_minkowski(const Options& o) {
  std::vector<Vec> fan;
  if (!o.fan.empty()) {
    fan = parse_fan(o.fan);
  } else {
    LatticeBundle b = build_bundle(o);
    VertexId root = *b.core.begin();
    fan = neighbor_fan(b.graph, root).vectors;
  }
  MinkowskiSolution ms = minkowski_constant(fan);
  JsonWriter w;
  w.begin_object();
  w.key("alpha").value(ms.alpha);
  w.key("c").value(ms.c.empty() ? Vec{} : Vec(ms.c.begin(), ms.c.end()));
  w.key("constant").value(ms.constant);
  w.key("feasible").value(ms.feasible);
  w.key("iterations").value(ms.iterations);
  w.key("volume").value(ms.feasible ? ms.polytope.volume : 0.0);
  w.end_object();
  write_report(o, w.str());
  return 0;
}

int run_verify(const Options& o) {
  LatticeBundle b = build_bundle(o);
  SufficiencyReport rep = verify_sufficiency(b);
  Polytope H = target_polytope(b.graph, {}, true);
  JsonWriter w;
  w.begin_object();
  w.key("C").value(rep.c_value);
  w.key("H_volume").value(H.volume);
  w.key("kind").value(b.kind);
  w.key("report").value(rep.to_json());
  w.end_object();
  write_report(o, w.str());
  return rep.pass() ? 0 : 0;  // a failing verifier is a successful report
}

int run_neumann(const Options& o) {
  LatticeBundle b = build_bundle(o);
  std::set<VertexId> omega = resolve_omega(o, b);
  b.require_interior(omega);
  NeumannSolution sol = neumann_solve(b.graph, omega);
  write_report(o, sol.to_json());
  return 0;
}

int run_chain(const Options& o) {
  LatticeBundle b = build_bundle(o);
  std::set<VertexId> omega = resolve_omega(o, b);
  b.require_interior(omega);
  NeumannSolution sol = neumann_solve(b.graph, omega);
  ChainReport rep = chain_report(b.graph, omega, sol.u);
  if (o.format == "csv")
    write_report(o, "vol_hg,vol_union,sum_prox,sum_bound,rhs,eq_a,eq_b,eq_c,eq_d\n" +
                        rep.to_csv_row());
  else
    write_report(o, rep.to_json());
  return 0;
}

int run_scan(const Options& o) {
  LatticeBundle b = build_bundle(o);
  int jobs = o.jobs > 0 ? o.jobs : (int)std::thread::hardware_concurrency();
  ScanResult r = scan(b, o.max_n, std::max(1, jobs));
  if (o.format == "csv") {
    write_report(o, scan_to_csv(r));
  } else {
    JsonWriter w;
    w.begin_object();
    w.key("C").value(r.c_constant);
    w.key("H_volume").value(r.h_volume);
    w.key("equality_sizes").begin_array();
    for (int n : r.equality_sizes) w.value(n);
    w.end_array();
    w.key("exact").value(r.exact_arithmetic);
    w.key("observational").value(r.observational);
    w.key("per_n").begin_object();
    for (const auto& [n, rec] : r.per_n) {
      w.key(std::to_string(n)).begin_object();
      w.key("classes").value(rec.classes);
      w.key("equality").value(rec.equality);
      w.key("holds").value(rec.inequality_holds);
      w.key("min_boundary").value(rec.min_boundary);
      w.end_object();
    }
    w.end_object();
    w.end_object();
    write_report(o, w.str());
  }
  return 0;
}

int run_census(const Options& o) {
  LatticeBundle b = make_triangular(std::max(o.window, o.hex_k + 1));
  std::set<VertexId> omega = reference_subset(b, ReferenceKind::hex_triangular, o.hex_k);
  TriangularCensus c = triangular_census(b, omega);
  double ratio = triangular_inequality(b, omega);
  JsonWriter w;
  w.begin_object();
  w.key("E").value(c.E_count);
  w.key("X").value(c.X);
  w.key("X_star").value(c.X_star);
  w.key("Y").value(c.Y);
  w.key("Y_star").value(c.Y_star);
  w.key("a").begin_object();
  for (const auto& [i, v] : c.a) w.key(std::to_string(i)).value(v);
  w.end_object();
  w.key("ratio").value(ratio);
  w.end_object();
  write_report(o, w.str());
  return 0;
}

int run_otfit(const Options& o) {
  LatticeBundle b = build_bundle(o);
  std::set<VertexId> omega = resolve_omega(o, b);
  b.require_interior(omega);
  Polytope H = target_polytope(b.graph, {}, true);
  std::vector<Vec> sites;
  for (VertexId v : omega) sites.push_back(b.graph.pos(v));
  FitResult fit = fit_equal_volumes(sites, H);
  write_report(o, fit.diagram.to_json());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"iso-forge: sharp discrete isoperimetric constants and shapes"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--jobs", o.jobs, "worker count (default: hardware)");
  for (auto* sc : {app.add_subcommand("minkowski", "cell-optimization constant of a fan"),
                   app.add_subcommand("neumann", "discrete Neumann solve on a subset"),
                   app.add_subcommand("chain", "inequality-chain report for a subset"),
                   app.add_subcommand("scan", "exhaustive isoperimetric scan"),
                   app.add_subcommand("ot-fit", "equal-volume semidiscrete transport fit"),
                   app.add_subcommand("census", "triangular-lattice hexagon census"),
                   app.add_subcommand("verify", "sufficiency verifier for a lattice")}) {
    sc->add_option("--lattice", o.lattice, "honeycomb|triangular|bcc|fcc|grid|grid1|grid3");
    sc->add_option("--window", o.window, "materialization radius");
    sc->add_option("--max-n", o.max_n, "scan size cap");
    sc->add_option("--out", o.out, "output path (default stdout)");
    sc->add_option("--format", o.format, "json|csv");
    sc->add_option("--tol-geom", o.tol_geom, "geometric tolerance override");
    sc->add_option("--selection-cap", o.selection_cap, "selection enumeration cap");
    sc->add_option("--fan", o.fan, "fan as x,y;x,y;... (minkowski)");
    sc->add_option("--omega", o.omega_ids, "subset vertex ids");
    sc->add_option("--reference", o.reference, "reference subset kind:k");
    sc->add_option("--hex-k", o.hex_k, "hexagon size for census");
    sc->add_option("--affine", o.affine, "2x2 row-major deformation (honeycomb)");
    sc->add_option("--lambda", o.lambdas, "grid scalings");
  }
  CLI11_PARSE(app, argc, argv);
  try {
    if (app.got_subcommand("minkowski")) return run_minkowski(o);
    if (app.got_subcommand("neumann")) return run_neumann(o);
    if (app.got_subcommand("chain")) return run_chain(o);
    if (app.got_subcommand("scan")) return run_scan(o);
    if (app.got_subcommand("ot-fit")) return run_otfit(o);
    if (app.got_subcommand("census")) return run_census(o);
    if (app.got_subcommand("verify")) return run_verify(o);
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
