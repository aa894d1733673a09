#pragma once

#include <cmath>
#include <stdexcept>

namespace qbe {

/// Uniform grid on the periodic square [-pi, pi]^2 with n points per axis
/// (n a power of two, n >= 8). Row-major storage, x along the first index.
struct Grid {
  int n = 0;

  Grid() = default;
  explicit Grid(int n_) : n(n_) {
    if (n < 8 || (n & (n - 1)) != 0)
      throw std::invalid_argument("Grid: n must be a power of two >= 8");
  }

  double dx() const { return 2.0 * M_PI / n; }
  double x(int i) const { return -M_PI + i * dx(); }
  double y(int j) const { return -M_PI + j * dx(); }
  std::size_t size() const { return std::size_t(n) * n; }
  std::size_t idx(int i, int j) const { return std::size_t(i) * n + j; }

  /// Integer wavenumber along x for spectral row i (r2c layout keeps the
  /// full range along x and the non-negative half along y).
  int kx(int i) const { return i <= n / 2 ? i : i - n; }
  int ky(int j) const { return j; }
  int spec_cols() const { return n / 2 + 1; }
  std::size_t spec_size() const { return std::size_t(n) * spec_cols(); }

  bool operator==(const Grid& o) const { return n == o.n; }
};

}  // namespace qbe
