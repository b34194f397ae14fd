#ifndef ISOFORGE_ISOPERIMETRY_HPP
#define ISOFORGE_ISOPERIMETRY_HPP

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "isoforge/lattices.hpp"

namespace isoforge {

// Canonical translation-class form: lattice coordinates shifted so the
// lexicographically smallest tuple is the origin reference.
std::vector<std::vector<long>> canonical_form(const LatticeBundle& b,
                                              const std::set<VertexId>& omega);

// Redelmeier-style enumeration of connected subsets, one representative per
// translation class, sizes 1..max_n. The sink observes each subset as a vertex
// list; enumeration order is deterministic.
void enumerate_connected_subsets(const LatticeBundle& b, int max_n,
                                 const std::function<void(const std::vector<VertexId>&)>& sink);

struct SizeRecord {
  double min_boundary = 0;
  std::set<VertexId> argmin;
  std::vector<std::vector<long>> argmin_canonical;
  long long classes = 0;
  bool inequality_holds = true;
  bool equality = false;
};

struct ScanResult {
  std::map<int, SizeRecord> per_n;
  std::vector<int> equality_sizes;
  double c_constant = 0;      // C_{G,A}
  double h_volume = 0;        // |H| of the lattice-wide target body
  long long ratio = 0;        // |H|/C when integral; 0 otherwise
  bool exact_arithmetic = false;
  bool observational = false;  // sufficiency verifier failed; inequality not asserted
};

// Exhaustive minimization of the weighted boundary over connected subsets per
// size, with the inequality ratio * (#X)^{d-1} <= (#_g boundary)^d checked in
// exact integers whenever the constants allow it.
ScanResult scan(const LatticeBundle& b, int max_n, int jobs = 1);

struct TriangularCensus {
  std::map<int, long long> a;  // i in {1,2,3,4,6}
  long long X = 0, Y = 0, X_star = 0, Y_star = 0, E_count = 0;
  long long triangles = 0;
};

// Boundary-vertex census of a union-of-triangles subset with a single
// non-repeating boundary cycle; validates the hypotheses and the five counting
// identities exactly.
TriangularCensus triangular_census(const LatticeBundle& b, const std::set<VertexId>& omega);

// Nothrow variant on raw lattice coordinates for enumeration-scale filtering;
// returns false with the failing hypothesis instead of throwing.
bool try_triangular_census(const std::vector<std::pair<long, long>>& pts, TriangularCensus& out,
                           std::string* why = nullptr);

// (Y-6)^2 / (4X - Y + 2); always >= 12, equality exactly on the perfect hexagons.
double triangular_inequality(const LatticeBundle& b, const std::set<VertexId>& omega);

// Glues components by translation to a connected subset of equal cardinality and
// strictly smaller boundary; identity on connected input.
std::set<VertexId> connectedness_reduction(const LatticeBundle& b,
                                           const std::set<VertexId>& omega);

std::string scan_to_csv(const ScanResult& r);

}  // namespace isoforge

#endif
