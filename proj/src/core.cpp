#include "isoforge/core.hpp"

#include <algorithm>
#include <cstdlib>

namespace isoforge {

bool solve_dense(std::vector<std::vector<double>> A, std::vector<double> b, Vec& out,
                 double pivot_tol) {
  const int n = (int)A.size();
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
    if (std::abs(A[piv][col]) < pivot_tol) return false;
    std::swap(A[piv], A[col]);
    std::swap(b[piv], b[col]);
    for (int r = col + 1; r < n; ++r) {
      double f = A[r][col] / A[col][col];
      if (f == 0) continue;
      for (int c = col; c < n; ++c) A[r][c] -= f * A[col][c];
      b[r] -= f * b[col];
    }
  }
  out.assign(n, 0.0);
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < n; ++c) s -= A[r][c] * out[c];
    out[r] = s / A[r][r];
  }
  return true;
}

namespace {
// Row echelon reduction; returns pivot columns. A is modified in place.
std::vector<int> echelon(std::vector<std::vector<double>>& A, double rel_tol) {
  if (A.empty()) return {};
  const int rows = (int)A.size(), cols = (int)A[0].size();
  double scale = 0;
  for (auto& r : A)
    for (double v : r) scale = std::max(scale, std::abs(v));
  if (scale == 0) return {};
  const double tol = rel_tol * scale;
  std::vector<int> pivots;
  int r0 = 0;
  for (int c = 0; c < cols && r0 < rows; ++c) {
    int piv = r0;
    for (int r = r0 + 1; r < rows; ++r)
      if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
    if (std::abs(A[piv][c]) <= tol) continue;
    std::swap(A[piv], A[r0]);
    for (int r = 0; r < rows; ++r) {
      if (r == r0) continue;
      double f = A[r][c] / A[r0][c];
      if (f == 0) continue;
      for (int cc = 0; cc < cols; ++cc) A[r][cc] -= f * A[r0][cc];
    }
    pivots.push_back(c);
    ++r0;
  }
  return pivots;
}
}  // namespace

int matrix_rank(std::vector<std::vector<double>> A, double rel_tol) {
  return (int)echelon(A, rel_tol).size();
}

std::vector<Vec> null_space(std::vector<std::vector<double>> A, double rel_tol) {
  if (A.empty()) return {};
  const int cols = (int)A[0].size();
  std::vector<int> pivots = echelon(A, rel_tol);
  std::vector<bool> is_pivot(cols, false);
  for (int c : pivots) is_pivot[c] = true;
  std::vector<Vec> basis;
  for (int free = 0; free < cols; ++free) {
    if (is_pivot[free]) continue;
    Vec v(cols, 0.0);
    v[free] = 1.0;
    // back-substitute pivot rows (already fully reduced)
    for (size_t pr = 0; pr < pivots.size(); ++pr) {
      int pc = pivots[pr];
      v[pc] = -A[pr][free] / A[pr][pc];
    }
    basis.push_back(v);
  }
  return basis;
}

std::mt19937_64 make_rng(uint64_t salt) {
  uint64_t seed = 0;
  if (const char* s = std::getenv("ISOFORGE_SEED")) seed = std::strtoull(s, nullptr, 10);
  return std::mt19937_64(seed * 0x9e3779b97f4a7c15ULL + salt + 1);
}

}  // namespace isoforge
