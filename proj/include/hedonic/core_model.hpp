#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "hedonic/error.hpp"

namespace hedonic {

using Point = std::vector<double>;

/// Weighted point cloud on one side of the market.
struct DiscreteMeasure {
  std::vector<Point> points;
  std::vector<double> weights;

  std::size_t size() const noexcept { return points.size(); }
  std::size_t dim() const noexcept { return points.empty() ? 0 : points.front().size(); }

  friend bool operator==(const DiscreteMeasure&, const DiscreteMeasure&) = default;
};

inline constexpr double kInputMassTol = 1e-12;
inline constexpr double kSolverMassTol = 1e-9;

/// Throws on the first violated invariant: dimension, sign, total mass,
/// distinctness, in that order.
inline void validate_measure(const DiscreteMeasure& m, double sum_tol = kInputMassTol) {
  if (m.points.empty()) throw Error(ErrorCode::EmptyMeasure, "measure has no points");
  if (m.points.size() != m.weights.size())
    throw Error(ErrorCode::DimensionMismatch, "points and weights differ in length");
  const std::size_t d = m.points.front().size();
  for (std::size_t i = 0; i < m.points.size(); ++i)
    if (m.points[i].size() != d)
      throw Error(ErrorCode::DimensionMismatch, "point " + std::to_string(i) + " has dimension " +
                                                    std::to_string(m.points[i].size()) +
                                                    ", expected " + std::to_string(d));
  double total = 0.0;
  for (std::size_t i = 0; i < m.weights.size(); ++i) {
    if (!(m.weights[i] >= 0.0))
      throw Error(ErrorCode::NegativeWeight, "weight " + std::to_string(i) + " is negative");
    total += m.weights[i];
  }
  if (std::abs(total - 1.0) > sum_tol) {
    std::ostringstream os;
    os.precision(17);
    os << "weights sum to " << total;
    throw Error(ErrorCode::WeightSumMismatch, os.str());
  }
  std::vector<std::size_t> order(m.points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return m.points[a] < m.points[b]; });
  for (std::size_t i = 1; i < order.size(); ++i)
    if (m.points[order[i]] == m.points[order[i - 1]])
      throw Error(ErrorCode::DuplicatePoint, "points " + std::to_string(order[i - 1]) + " and " +
                                                 std::to_string(order[i]) + " coincide");
}

inline DiscreteMeasure uniform_measure(std::vector<Point> points) {
  DiscreteMeasure m;
  const double w = points.empty() ? 0.0 : 1.0 / static_cast<double>(points.size());
  m.weights.assign(points.size(), w);
  m.points = std::move(points);
  return m;
}

inline DiscreteMeasure point_mass(const Point& p) { return DiscreteMeasure{{p}, {1.0}}; }

struct GridAxis {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 1;

  double spacing() const { return count > 1 ? (upper - lower) / static_cast<double>(count - 1) : 0.0; }

  double at(std::size_t i) const {
    if (count == 1) return lower;
    if (i + 1 == count) return upper;
    return lower + static_cast<double>(i) * spacing();
  }

  friend bool operator==(const GridAxis&, const GridAxis&) = default;
};

/// Tensor-product grid; the last axis varies fastest in points().
struct GridSpec {
  std::vector<GridAxis> axes;

  std::size_t dim() const noexcept { return axes.size(); }

  std::size_t size() const noexcept {
    std::size_t n = axes.empty() ? 0 : 1;
    for (const auto& a : axes) n *= a.count;
    return n;
  }

  void validate() const {
    if (axes.empty()) throw Error(ErrorCode::EmptyGrid, "grid has no axes");
    for (const auto& a : axes) {
      if (a.count == 0) throw Error(ErrorCode::EmptyGrid, "grid axis with zero points");
      if (a.count > 1 && !(a.lower < a.upper))
        throw Error(ErrorCode::EmptyGrid, "grid axis needs lower < upper");
    }
  }

  std::vector<Point> points() const {
    validate();
    std::vector<Point> out;
    out.reserve(size());
    std::vector<std::size_t> idx(axes.size(), 0);
    for (std::size_t n = 0; n < size(); ++n) {
      Point p(axes.size());
      for (std::size_t a = 0; a < axes.size(); ++a) p[a] = axes[a].at(idx[a]);
      out.push_back(std::move(p));
      for (std::size_t a = axes.size(); a-- > 0;) {
        if (++idx[a] < axes[a].count) break;
        idx[a] = 0;
      }
    }
    return out;
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

inline GridSpec grid_1d(double lower, double upper, std::size_t count) {
  return GridSpec{{GridAxis{lower, upper, count}}};
}

enum class Axis : std::uint8_t { X = 0, Y = 1, Z = 2 };

struct CouplingEntry {
  std::array<std::size_t, 3> index{0, 0, 0};  // (i, j, k); k unused for arity 2
  double mass = 0.0;

  std::size_t i() const noexcept { return index[0]; }
  std::size_t j() const noexcept { return index[1]; }
  std::size_t k() const noexcept { return index[2]; }

  friend bool operator==(const CouplingEntry&, const CouplingEntry&) = default;
};

/// Sparse nonnegative mass on index pairs or triples. Entries are kept sorted
/// by index tuple; zero-mass entries are dropped on construction.
class Coupling {
 public:
  Coupling() = default;

  /// shape = (n_x, n_y, n_z); n_z is ignored for arity 2.
  Coupling(int arity, std::array<std::size_t, 3> shape, std::vector<CouplingEntry> entries)
      : arity_(arity), shape_(shape) {
    if (arity != 2 && arity != 3) throw Error(ErrorCode::BadAxes, "coupling arity must be 2 or 3");
    if (arity == 2) shape_[2] = 1;
    entries_.reserve(entries.size());
    for (auto& e : entries) {
      if (!(e.mass >= 0.0) || !std::isfinite(e.mass))
        throw Error(ErrorCode::InvalidMass, "coupling mass must be finite and nonnegative");
      if (arity == 2) e.index[2] = 0;
      for (std::size_t a = 0; a < 3; ++a)
        if (e.index[a] >= shape_[a]) throw Error(ErrorCode::IndexOutOfRange, "coupling index out of range");
      if (e.mass > 0.0) entries_.push_back(e);
    }
    std::sort(entries_.begin(), entries_.end(),
              [](const CouplingEntry& a, const CouplingEntry& b) { return a.index < b.index; });
    for (std::size_t n = 1; n < entries_.size(); ++n)
      if (entries_[n].index == entries_[n - 1].index)
        throw Error(ErrorCode::DuplicateEntry, "coupling index tuple repeated");
  }

  int arity() const noexcept { return arity_; }
  const std::array<std::size_t, 3>& shape() const noexcept { return shape_; }
  std::span<const CouplingEntry> entries() const noexcept { return entries_; }
  std::size_t support_size() const noexcept { return entries_.size(); }

  double total_mass() const {
    double t = 0.0;
    for (const auto& e : entries_) t += e.mass;
    return t;
  }

  friend bool operator==(const Coupling&, const Coupling&) = default;

 private:
  int arity_ = 3;
  std::array<std::size_t, 3> shape_{0, 0, 0};
  std::vector<CouplingEntry> entries_;
};

/// Payoffs: U over buyer points, V over seller points.
struct DualPotentials {
  std::vector<double> U;
  std::vector<double> V;

  friend bool operator==(const DualPotentials&, const DualPotentials&) = default;
};

inline std::vector<double> marginal(const Coupling& c, Axis axis) {
  const auto a = static_cast<std::size_t>(axis);
  if (c.arity() == 2 && axis == Axis::Z) throw Error(ErrorCode::BadAxes, "arity-2 coupling has no Z axis");
  std::vector<double> w(c.shape()[a], 0.0);
  for (const auto& e : c.entries()) w[e.index[a]] += e.mass;
  return w;
}

/// Pushforward onto one axis, carrying the supplied points along.
inline DiscreteMeasure project(const Coupling& c, Axis axis, std::span<const Point> points) {
  auto w = marginal(c, axis);
  if (points.size() != w.size()) throw Error(ErrorCode::SizeMismatch, "point list does not match coupling shape");
  return DiscreteMeasure{std::vector<Point>(points.begin(), points.end()), std::move(w)};
}

/// Pushforward of an arity-3 coupling onto two of its axes (e.g. gamma_XY).
/// The result is an arity-2 coupling whose "first" and "second" axes are the
/// two kept axes in X < Y < Z order.
inline Coupling project(const Coupling& c, Axis first, Axis second) {
  if (c.arity() != 3) throw Error(ErrorCode::BadAxes, "pair projection needs an arity-3 coupling");
  if (first == second) throw Error(ErrorCode::BadAxes, "projection axes must differ");
  if (second < first) std::swap(first, second);
  const auto a = static_cast<std::size_t>(first);
  const auto b = static_cast<std::size_t>(second);
  std::map<std::array<std::size_t, 3>, double> acc;
  for (const auto& e : c.entries()) acc[{e.index[a], e.index[b], 0}] += e.mass;
  std::vector<CouplingEntry> out;
  out.reserve(acc.size());
  for (const auto& [idx, m] : acc) out.push_back({idx, m});
  return Coupling(2, {c.shape()[a], c.shape()[b], 1}, std::move(out));
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::SizeMismatch, "vector lengths differ");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Largest deviation of the coupling's declared marginals from the given
/// weights; pass an empty alpha to leave the Z-marginal free.
inline double marginal_error(const Coupling& c, std::span<const double> mu, std::span<const double> nu,
                             std::span<const double> alpha = {}) {
  double err = std::max(max_abs_diff(marginal(c, Axis::X), mu), max_abs_diff(marginal(c, Axis::Y), nu));
  if (!alpha.empty()) err = std::max(err, max_abs_diff(marginal(c, Axis::Z), alpha));
  return err;
}

inline void check_marginals(const Coupling& c, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                            const DiscreteMeasure* alpha = nullptr, double tol = kSolverMassTol) {
  const double err = marginal_error(c, mu.weights, nu.weights,
                                    alpha ? std::span<const double>(alpha->weights) : std::span<const double>{});
  if (err > tol) {
    std::ostringstream os;
    os.precision(17);
    os << "marginal deviation " << err << " exceeds " << tol;
    throw Error(ErrorCode::MarginalMismatch, os.str());
  }
}

}  // namespace hedonic
