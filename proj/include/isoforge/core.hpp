#ifndef ISOFORGE_CORE_HPP
#define ISOFORGE_CORE_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace isoforge {

using Vec = std::vector<double>;

// Central tolerances, stated once and used everywhere.
struct Tol {
  static constexpr double vert = 1e-9;           // vertex dedup
  static constexpr double geom = 1e-8;           // geometric residuals (Minkowski closure, span)
  static constexpr double solver = 1e-10;        // linear-solve residuals
  static constexpr double chain_eq = 1e-6;       // chain equality flags (relative)
  static double feas(double offset) { return 1e-9 * (1.0 + std::abs(offset)); }
};

struct InputError : std::runtime_error {
  explicit InputError(const std::string& m) : std::runtime_error(m) {}
};
struct InvariantViolation : std::runtime_error {
  explicit InvariantViolation(const std::string& m) : std::runtime_error(m) {}
};

inline double dot(const Vec& a, const Vec& b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}
inline double norm2(const Vec& a) { return dot(a, a); }
inline double norm(const Vec& a) { return std::sqrt(norm2(a)); }
inline Vec sub(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}
inline Vec add(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}
inline Vec scale(const Vec& a, double s) {
  Vec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] * s;
  return r;
}
inline double dist(const Vec& a, const Vec& b) { return norm(sub(a, b)); }

inline bool close_rel(double a, double b, double rel) {
  double m = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) <= rel * m;
}

// Dense Gaussian elimination with partial pivoting; returns false if singular.
bool solve_dense(std::vector<std::vector<double>> A, std::vector<double> b, Vec& out,
                 double pivot_tol = 1e-12);

// Rank of a small dense matrix (rows of equal length), with relative pivot threshold.
int matrix_rank(std::vector<std::vector<double>> A, double rel_tol = 1e-10);

// Null space basis of A (n_cols-dim vectors); used for the adjoint directed systems.
std::vector<Vec> null_space(std::vector<std::vector<double>> A, double rel_tol = 1e-10);

// Deterministic RNG seeded from ISOFORGE_SEED (default 0).
std::mt19937_64 make_rng(uint64_t salt = 0);

}  // namespace isoforge

#endif
