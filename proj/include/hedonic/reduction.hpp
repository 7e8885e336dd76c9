#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <ostream>
#include <span>
#include <vector>

#include "hedonic/core_model.hpp"
#include "hedonic/surplus.hpp"

namespace hedonic {

inline constexpr double kTieTol = 1e-10;

/// sbar(x_i, y_j) = max_k s(x_i, y_j, z_k) with the selected Z index.
struct ReducedSurplus {
  Matrix value;                       // n_x x n_y
  std::vector<std::size_t> argmax;    // row-major n_x * n_y, smallest maximising k
  std::vector<bool> tie;              // another k within kTieTol of the max
  std::vector<bool> boundary;         // argmax sits on the boundary of the Z point cloud

  std::size_t nx() const noexcept { return value.rows(); }
  std::size_t ny() const noexcept { return value.cols(); }
  std::size_t zbar(std::size_t i, std::size_t j) const { return argmax[i * ny() + j]; }
  bool tied(std::size_t i, std::size_t j) const { return tie[i * ny() + j]; }
  bool on_boundary(std::size_t i, std::size_t j) const { return boundary[i * ny() + j]; }

  bool any_tie() const { return std::find(tie.begin(), tie.end(), true) != tie.end(); }
  bool any_boundary() const { return std::find(boundary.begin(), boundary.end(), true) != boundary.end(); }
};

namespace detail {

/// Flags Z points lying on a face of the axis-aligned bounding box of Z,
/// along any coordinate where Z actually varies.
inline std::vector<bool> boundary_flags(std::span<const Point> Z) {
  std::vector<bool> out(Z.size(), false);
  if (Z.empty()) return out;
  const std::size_t d = Z.front().size();
  for (std::size_t a = 0; a < d; ++a) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& z : Z) {
      lo = std::min(lo, z[a]);
      hi = std::max(hi, z[a]);
    }
    if (lo == hi) continue;
    for (std::size_t k = 0; k < Z.size(); ++k)
      if (Z[k][a] == lo || Z[k][a] == hi) out[k] = true;
  }
  return out;
}

}  // namespace detail

inline ReducedSurplus reduce(const SurplusTensor& t, std::span<const Point> Z, double tie_tol = kTieTol) {
  const std::size_t nx = t.nx(), ny = t.ny(), nz = t.nz();
  const auto edge = detail::boundary_flags(Z);
  ReducedSurplus r{Matrix(nx, ny), std::vector<std::size_t>(nx * ny, 0), std::vector<bool>(nx * ny, false),
                   std::vector<bool>(nx * ny, false)};
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j) {
      std::size_t best = 0;
      for (std::size_t k = 1; k < nz; ++k)
        if (t(i, j, k) > t(i, j, best)) best = k;
      const double top = t(i, j, best);
      bool tie = false;
      for (std::size_t k = 0; k < nz && !tie; ++k)
        if (k != best && top - t(i, j, k) <= tie_tol) tie = true;
      r.value(i, j) = top;
      r.argmax[i * ny + j] = best;
      r.tie[i * ny + j] = tie;
      r.boundary[i * ny + j] = edge[best];
    }
  return r;
}

inline ReducedSurplus reduce(const SurplusModel& s, std::span<const Point> X, std::span<const Point> Y,
                             std::span<const Point> Z, double tie_tol = kTieTol) {
  if (X.empty() || Y.empty() || Z.empty()) throw Error(ErrorCode::EmptyGrid, "reduce over an empty point set");
  return reduce(SurplusTensor(s, X, Y, Z), Z, tie_tol);
}

/// V^s(x_i) = max_{j,k} s(x_i, y_j, z_k) - V_j.
inline std::vector<double> c_transform_V(const SurplusTensor& t, std::span<const double> V) {
  if (V.size() != t.ny()) throw Error(ErrorCode::SizeMismatch, "V does not match Y");
  std::vector<double> out(t.nx(), -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < t.nx(); ++i)
    for (std::size_t j = 0; j < t.ny(); ++j)
      for (std::size_t k = 0; k < t.nz(); ++k) out[i] = std::max(out[i], t(i, j, k) - V[j]);
  return out;
}

/// U^s(y_j) = max_{i,k} s(x_i, y_j, z_k) - U_i.
inline std::vector<double> c_transform_U(const SurplusTensor& t, std::span<const double> U) {
  if (U.size() != t.nx()) throw Error(ErrorCode::SizeMismatch, "U does not match X");
  std::vector<double> out(t.ny(), -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < t.nx(); ++i)
    for (std::size_t j = 0; j < t.ny(); ++j)
      for (std::size_t k = 0; k < t.nz(); ++k) out[j] = std::max(out[j], t(i, j, k) - U[i]);
  return out;
}

inline std::vector<double> c_transform_V(const SurplusModel& s, std::span<const double> V, std::span<const Point> X,
                                         std::span<const Point> Y, std::span<const Point> Z) {
  return c_transform_V(SurplusTensor(s, X, Y, Z), V);
}

inline std::vector<double> c_transform_U(const SurplusModel& s, std::span<const double> U, std::span<const Point> X,
                                         std::span<const Point> Y, std::span<const Point> Z) {
  return c_transform_U(SurplusTensor(s, X, Y, Z), U);
}

/// CSV rows: i,j,sbar,zbar_index,tie_flag
inline void write_reduced_csv(std::ostream& os, const ReducedSurplus& r) {
  const auto old = os.precision(17);
  os << "i,j,sbar,zbar_index,tie_flag\n";
  for (std::size_t i = 0; i < r.nx(); ++i)
    for (std::size_t j = 0; j < r.ny(); ++j)
      os << i << ',' << j << ',' << r.value(i, j) << ',' << r.zbar(i, j) << ',' << (r.tied(i, j) ? 1 : 0) << '\n';
  os.precision(old);
}

}  // namespace hedonic
