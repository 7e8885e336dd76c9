#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "hedonic/core_model.hpp"
#include "hedonic/error.hpp"
#include "hedonic/linalg.hpp"

namespace hedonic {

class SurplusModel;

/// Ascending coefficients c0 + c1 t + c2 t^2 + ...
using Polynomial = std::vector<double>;

namespace detail {

inline double poly_eval(const Polynomial& c, double t) {
  double acc = 0.0;
  for (std::size_t p = c.size(); p-- > 0;) acc = acc * t + c[p];
  return acc;
}

inline double poly_deriv(const Polynomial& c, double t) {
  double acc = 0.0;
  for (std::size_t p = c.size(); p-- > 1;) acc = acc * t + static_cast<double>(p) * c[p];
  return acc;
}

/// t^p and its first derivative with p a nonnegative integer (0^0 = 1).
inline double ipow(double t, int p) { return p == 0 ? 1.0 : std::pow(t, p); }
inline double dipow(double t, int p) { return p == 0 ? 0.0 : p * ipow(t, p - 1); }

/// sum_{p,q} c(p,q) a^p b^q with derivatives.
struct Bivariate {
  double value = 0, da = 0, db = 0, dab = 0;
};

inline Bivariate bivariate(const Matrix& c, double a, double b) {
  Bivariate out;
  for (std::size_t p = 0; p < c.rows(); ++p)
    for (std::size_t q = 0; q < c.cols(); ++q) {
      const double k = c(p, q);
      if (k == 0.0) continue;
      const int ip = static_cast<int>(p), iq = static_cast<int>(q);
      out.value += k * ipow(a, ip) * ipow(b, iq);
      out.da += k * dipow(a, ip) * ipow(b, iq);
      out.db += k * ipow(a, ip) * dipow(b, iq);
      out.dab += k * dipow(a, ip) * dipow(b, iq);
    }
  return out;
}

}  // namespace detail

/// s = x'Ay + x'Bz + y'Cz + z'Dz + sum_a f(x_a) + sum_b g(y_b) + sum_c h(z_c).
struct Bilinear {
  Matrix A, B, C, D;
  Polynomial f, g, h;
};

/// One-dimensional u = xy + xz, v = -yz - a z^2.
struct Counterexample {
  double a = 0.5;
};

/// Two-dimensional surplus whose G matrix has signature (2,4,0) everywhere:
/// e^{x1+y1}cos(x2-y2) + e^{x1+z1}cos(x2-z2) + e^{y1+z1}cos(z2-y2)
///   - e^{2x1} - e^{2y1} - e^{2z1}.
struct ExpCos {};

struct Monomial {
  double coef = 1.0;
  int px = 0, py = 0, pz = 0;
};

/// One-dimensional sum of monomials c x^px y^py z^pz (e.g. xyz).
struct Supermodular1D {
  std::vector<Monomial> terms;
};

/// One-dimensional u(x,z) = sum u(p,q) x^p z^q and v(y,z) = sum v(p,q) y^p z^q.
/// No direct buyer-seller interaction.
struct StrictlyHedonic {
  Matrix u;
  Matrix v;
};

/// Values on the tensor grid X x Y x Z (all axes concatenated, last axis
/// fastest). Evaluation is multilinear inside the box; derivatives are
/// central differences with the grid spacing, one-sided at the boundary.
struct Tabulated {
  GridSpec x_grid, y_grid, z_grid;
  std::vector<double> values;
};

/// s = u + v with u and v given as separate models of matching dimensions.
struct Split {
  std::shared_ptr<const SurplusModel> u;
  std::shared_ptr<const SurplusModel> v;
};

struct Dims {
  std::size_t x = 1, y = 1, z = 1;
  std::size_t total() const noexcept { return x + y + z; }
  friend bool operator==(const Dims&, const Dims&) = default;
};

class SurplusModel {
 public:
  using Family = std::variant<Bilinear, Counterexample, ExpCos, Supermodular1D, StrictlyHedonic, Tabulated, Split>;

  SurplusModel(Family family) : family_(std::move(family)) { dims_ = validate(); }

  const Family& family() const noexcept { return family_; }
  Dims dims() const noexcept { return dims_; }

  std::string_view name() const {
    return std::visit(
        [](const auto& f) -> std::string_view {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, Bilinear>) return "bilinear";
          else if constexpr (std::is_same_v<T, Counterexample>) return "counterexample";
          else if constexpr (std::is_same_v<T, ExpCos>) return "expcos";
          else if constexpr (std::is_same_v<T, Supermodular1D>) return "supermodular1d";
          else if constexpr (std::is_same_v<T, StrictlyHedonic>) return "strictly_hedonic";
          else if constexpr (std::is_same_v<T, Tabulated>) return "tabulated";
          else return "split";
        },
        family_);
  }

  /// True when buyer and seller utilities are available separately.
  bool has_uv() const {
    return std::holds_alternative<Counterexample>(family_) || std::holds_alternative<StrictlyHedonic>(family_) ||
           std::holds_alternative<Split>(family_);
  }

  template <class T>
  const T* get_if() const noexcept {
    return std::get_if<T>(&family_);
  }

 private:
  Dims validate() const;

  Family family_;
  Dims dims_;
};

inline Dims SurplusModel::validate() const {
  return std::visit(
      [](const auto& f) -> Dims {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Bilinear>) {
          const Dims d{f.A.rows(), f.A.cols(), f.B.cols()};
          if (d.x == 0 || d.y == 0 || d.z == 0)
            throw Error(ErrorCode::ShapeMismatch, "bilinear A and B must be nonempty");
          if (f.B.rows() != d.x || f.C.rows() != d.y || f.C.cols() != d.z)
            throw Error(ErrorCode::ShapeMismatch, "bilinear A, B, C shapes disagree");
          if (!f.D.empty() && (f.D.rows() != d.z || f.D.cols() != d.z))
            throw Error(ErrorCode::ShapeMismatch, "bilinear D must be n_z x n_z");
          return d;
        } else if constexpr (std::is_same_v<T, ExpCos>) {
          return Dims{2, 2, 2};
        } else if constexpr (std::is_same_v<T, Tabulated>) {
          f.x_grid.validate();
          f.y_grid.validate();
          f.z_grid.validate();
          if (f.values.size() != f.x_grid.size() * f.y_grid.size() * f.z_grid.size())
            throw Error(ErrorCode::ShapeMismatch, "tabulated value count does not match grids");
          return Dims{f.x_grid.dim(), f.y_grid.dim(), f.z_grid.dim()};
        } else if constexpr (std::is_same_v<T, Split>) {
          if (!f.u || !f.v) throw Error(ErrorCode::ShapeMismatch, "split surplus needs both parts");
          if (f.u->dims() != f.v->dims()) throw Error(ErrorCode::ShapeMismatch, "split parts differ in dimension");
          return f.u->dims();
        } else {
          return Dims{1, 1, 1};
        }
      },
      family_);
}

inline SurplusModel make_counterexample(double a = 0.5) { return SurplusModel(Counterexample{a}); }
inline SurplusModel make_expcos() { return SurplusModel(ExpCos{}); }
inline SurplusModel make_monomials(std::vector<Monomial> terms) { return SurplusModel(Supermodular1D{std::move(terms)}); }
inline SurplusModel make_bilinear(Matrix A, Matrix B, Matrix C, Matrix D = {}, Polynomial f = {}, Polynomial g = {},
                                  Polynomial h = {}) {
  return SurplusModel(Bilinear{std::move(A), std::move(B), std::move(C), std::move(D), std::move(f), std::move(g),
                               std::move(h)});
}
inline SurplusModel make_split(SurplusModel u, SurplusModel v) {
  return SurplusModel(Split{std::make_shared<const SurplusModel>(std::move(u)),
                            std::make_shared<const SurplusModel>(std::move(v))});
}

namespace detail {

inline void check_dims(const SurplusModel& s, const Point& x, const Point& y, const Point& z) {
  const Dims d = s.dims();
  if (x.size() != d.x || y.size() != d.y || z.size() != d.z)
    throw Error(ErrorCode::DimensionMismatch, std::string("point dimensions do not match surplus '") +
                                                  std::string(s.name()) + "'");
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

/// x' M y
inline double form(const Point& x, const Matrix& m, const Point& y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) acc += x[i] * m(i, j) * y[j];
  return acc;
}

// --- ExpCos building block T(a,b) = e^{a1+b1} cos(a2-b2) ---

struct ExpCosPair {
  double value;
  double da[2];
  double db[2];
  Matrix dab;  // 2x2, rows indexed by a, cols by b
};

inline ExpCosPair expcos_pair(const Point& a, const Point& b) {
  const double e = std::exp(a[0] + b[0]);
  const double c = std::cos(a[1] - b[1]);
  const double s = std::sin(a[1] - b[1]);
  ExpCosPair p{e * c, {e * c, -e * s}, {e * c, e * s}, Matrix{{e * c, e * s}, {-e * s, e * c}}};
  return p;
}

// --- Tabulated helpers ---

struct TabulatedGrid {
  std::vector<GridAxis> axes;
  std::vector<std::size_t> strides;
};

inline TabulatedGrid flatten(const Tabulated& t) {
  TabulatedGrid g;
  for (const auto* spec : {&t.x_grid, &t.y_grid, &t.z_grid})
    g.axes.insert(g.axes.end(), spec->axes.begin(), spec->axes.end());
  g.strides.assign(g.axes.size(), 1);
  for (std::size_t a = g.axes.size(); a-- > 1;) g.strides[a - 1] = g.strides[a] * g.axes[a].count;
  return g;
}

inline Point concat(const Point& x, const Point& y, const Point& z) {
  Point p;
  p.reserve(x.size() + y.size() + z.size());
  p.insert(p.end(), x.begin(), x.end());
  p.insert(p.end(), y.begin(), y.end());
  p.insert(p.end(), z.begin(), z.end());
  return p;
}

inline double tabulated_eval(const Tabulated& t, const TabulatedGrid& g, const Point& p) {
  const std::size_t dims = g.axes.size();
  std::vector<std::size_t> base(dims);
  std::vector<double> frac(dims);
  for (std::size_t a = 0; a < dims; ++a) {
    const auto& ax = g.axes[a];
    const double slack = 1e-12 * std::max(1.0, std::abs(ax.upper - ax.lower));
    if (p[a] < ax.lower - slack || p[a] > ax.upper + slack)
      throw Error(ErrorCode::OutOfGrid, "coordinate outside tabulated grid");
    if (ax.count == 1) {
      base[a] = 0;
      frac[a] = 0.0;
      continue;
    }
    const double h = ax.spacing();
    double u = (p[a] - ax.lower) / h;
    u = std::clamp(u, 0.0, static_cast<double>(ax.count - 1));
    std::size_t c = static_cast<std::size_t>(std::floor(u));
    if (c >= ax.count - 1) c = ax.count - 2;
    base[a] = c;
    frac[a] = u - static_cast<double>(c);
  }
  double acc = 0.0;
  for (std::size_t corner = 0; corner < (std::size_t{1} << dims); ++corner) {
    double w = 1.0;
    std::size_t flat = 0;
    for (std::size_t a = 0; a < dims; ++a) {
      const bool up = (corner >> a) & 1U;
      if (up && g.axes[a].count == 1) {
        w = 0.0;
        break;
      }
      w *= up ? frac[a] : 1.0 - frac[a];
      flat += (base[a] + (up ? 1 : 0)) * g.strides[a];
    }
    if (w != 0.0) acc += w * t.values[flat];
  }
  return acc;
}

/// Clamped symmetric step around p[a] inside the grid box.
inline std::pair<double, double> fd_bracket(const GridAxis& ax, double v) {
  const double h = ax.spacing();
  return {std::max(v - h, ax.lower), std::min(v + h, ax.upper)};
}

inline double tabulated_partial(const Tabulated& t, const TabulatedGrid& g, Point p, std::size_t a) {
  const auto& ax = g.axes[a];
  if (ax.count == 1) return 0.0;
  const auto [lo, hi] = fd_bracket(ax, p[a]);
  p[a] = hi;
  const double fp = tabulated_eval(t, g, p);
  p[a] = lo;
  const double fm = tabulated_eval(t, g, p);
  return (fp - fm) / (hi - lo);
}

inline double tabulated_mixed(const Tabulated& t, const TabulatedGrid& g, Point p, std::size_t a, std::size_t b) {
  if (g.axes[a].count == 1 || g.axes[b].count == 1) return 0.0;
  const auto [alo, ahi] = fd_bracket(g.axes[a], p[a]);
  const auto [blo, bhi] = fd_bracket(g.axes[b], p[b]);
  auto at = [&](double va, double vb) {
    p[a] = va;
    p[b] = vb;
    return tabulated_eval(t, g, p);
  };
  return (at(ahi, bhi) - at(ahi, blo) - at(alo, bhi) + at(alo, blo)) / ((ahi - alo) * (bhi - blo));
}

}  // namespace detail

inline double eval(const SurplusModel& s, const Point& x, const Point& y, const Point& z);

/// Buyer utility u(x,y,z); MissingUV for families that only define s.
inline double eval_u(const SurplusModel& s, const Point& x, const Point& y, const Point& z) {
  detail::check_dims(s, x, y, z);
  if (s.get_if<Counterexample>()) return x[0] * y[0] + x[0] * z[0];
  if (const auto* h = s.get_if<StrictlyHedonic>()) return detail::bivariate(h->u, x[0], z[0]).value;
  if (const auto* sp = s.get_if<Split>()) return eval(*sp->u, x, y, z);
  throw Error(ErrorCode::MissingUV, std::string("surplus '") + std::string(s.name()) + "' has no separate u");
}

/// Seller utility v(x,y,z); MissingUV for families that only define s.
inline double eval_v(const SurplusModel& s, const Point& x, const Point& y, const Point& z) {
  detail::check_dims(s, x, y, z);
  if (const auto* c = s.get_if<Counterexample>()) return -y[0] * z[0] - c->a * z[0] * z[0];
  if (const auto* h = s.get_if<StrictlyHedonic>()) return detail::bivariate(h->v, y[0], z[0]).value;
  if (const auto* sp = s.get_if<Split>()) return eval(*sp->v, x, y, z);
  throw Error(ErrorCode::MissingUV, std::string("surplus '") + std::string(s.name()) + "' has no separate v");
}

inline double eval(const SurplusModel& s, const Point& x, const Point& y, const Point& z) {
  detail::check_dims(s, x, y, z);
  return std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Bilinear>) {
          double acc = detail::form(x, f.A, y) + detail::form(x, f.B, z) + detail::form(y, f.C, z);
          if (!f.D.empty()) acc += detail::form(z, f.D, z);
          for (double xa : x) acc += detail::poly_eval(f.f, xa);
          for (double yb : y) acc += detail::poly_eval(f.g, yb);
          for (double zc : z) acc += detail::poly_eval(f.h, zc);
          return acc;
        } else if constexpr (std::is_same_v<T, Counterexample> || std::is_same_v<T, StrictlyHedonic> ||
                             std::is_same_v<T, Split>) {
          return eval_u(s, x, y, z) + eval_v(s, x, y, z);
        } else if constexpr (std::is_same_v<T, ExpCos>) {
          return detail::expcos_pair(x, y).value + detail::expcos_pair(x, z).value +
                 detail::expcos_pair(y, z).value - std::exp(2 * x[0]) - std::exp(2 * y[0]) - std::exp(2 * z[0]);
        } else if constexpr (std::is_same_v<T, Supermodular1D>) {
          double acc = 0.0;
          for (const auto& m : f.terms)
            acc += m.coef * detail::ipow(x[0], m.px) * detail::ipow(y[0], m.py) * detail::ipow(z[0], m.pz);
          return acc;
        } else {
          return detail::tabulated_eval(f, detail::flatten(f), detail::concat(x, y, z));
        }
      },
      s.family());
}

/// Gradients with respect to one argument group.
enum class Arg { X, Y, Z };

inline Point grad(const SurplusModel& s, Arg which, const Point& x, const Point& y, const Point& z) {
  detail::check_dims(s, x, y, z);
  return std::visit(
      [&](const auto& f) -> Point {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Bilinear>) {
          const auto deriv = [](const Polynomial& p, const Point& pt) {
            Point out(pt.size());
            for (std::size_t i = 0; i < pt.size(); ++i) out[i] = detail::poly_deriv(p, pt[i]);
            return out;
          };
          auto add = [](Point a, const Point& b) {
            for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
            return a;
          };
          switch (which) {
            case Arg::X: return add(add(f.A * std::span<const double>(y), f.B * std::span<const double>(z)), deriv(f.f, x));
            case Arg::Y:
              return add(add(f.A.transpose() * std::span<const double>(x), f.C * std::span<const double>(z)),
                         deriv(f.g, y));
            case Arg::Z: {
              Point g = add(f.B.transpose() * std::span<const double>(x), f.C.transpose() * std::span<const double>(y));
              if (!f.D.empty()) g = add(g, (f.D + f.D.transpose()) * std::span<const double>(z));
              return add(g, deriv(f.h, z));
            }
          }
          return {};
        } else if constexpr (std::is_same_v<T, Counterexample>) {
          switch (which) {
            case Arg::X: return {y[0] + z[0]};
            case Arg::Y: return {x[0] - z[0]};
            case Arg::Z: return {x[0] - y[0] - 2.0 * f.a * z[0]};
          }
          return {};
        } else if constexpr (std::is_same_v<T, ExpCos>) {
          const auto xy = detail::expcos_pair(x, y);
          const auto xz = detail::expcos_pair(x, z);
          const auto yz = detail::expcos_pair(y, z);
          switch (which) {
            case Arg::X: return {xy.da[0] + xz.da[0] - 2 * std::exp(2 * x[0]), xy.da[1] + xz.da[1]};
            case Arg::Y: return {xy.db[0] + yz.da[0] - 2 * std::exp(2 * y[0]), xy.db[1] + yz.da[1]};
            case Arg::Z: return {xz.db[0] + yz.db[0] - 2 * std::exp(2 * z[0]), xz.db[1] + yz.db[1]};
          }
          return {};
        } else if constexpr (std::is_same_v<T, Supermodular1D>) {
          double acc = 0.0;
          for (const auto& m : f.terms) {
            const double fx = which == Arg::X ? detail::dipow(x[0], m.px) : detail::ipow(x[0], m.px);
            const double fy = which == Arg::Y ? detail::dipow(y[0], m.py) : detail::ipow(y[0], m.py);
            const double fz = which == Arg::Z ? detail::dipow(z[0], m.pz) : detail::ipow(z[0], m.pz);
            acc += m.coef * fx * fy * fz;
          }
          return {acc};
        } else if constexpr (std::is_same_v<T, StrictlyHedonic>) {
          const auto u = detail::bivariate(f.u, x[0], z[0]);
          const auto v = detail::bivariate(f.v, y[0], z[0]);
          switch (which) {
            case Arg::X: return {u.da};
            case Arg::Y: return {v.da};
            case Arg::Z: return {u.db + v.db};
          }
          return {};
        } else if constexpr (std::is_same_v<T, Split>) {
          Point a = grad(*f.u, which, x, y, z);
          const Point b = grad(*f.v, which, x, y, z);
          for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
          return a;
        } else {
          const auto g = detail::flatten(f);
          const Point p = detail::concat(x, y, z);
          const std::size_t offset = which == Arg::X ? 0 : which == Arg::Y ? x.size() : x.size() + y.size();
          const std::size_t n = which == Arg::X ? x.size() : which == Arg::Y ? y.size() : z.size();
          Point out(n);
          for (std::size_t i = 0; i < n; ++i) out[i] = detail::tabulated_partial(f, g, p, offset + i);
          return out;
        }
      },
      s.family());
}

inline Point grad_x(const SurplusModel& s, const Point& x, const Point& y, const Point& z) {
  return grad(s, Arg::X, x, y, z);
}
inline Point grad_y(const SurplusModel& s, const Point& x, const Point& y, const Point& z) {
  return grad(s, Arg::Y, x, y, z);
}
inline Point grad_z(const SurplusModel& s, const Point& x, const Point& y, const Point& z) {
  return grad(s, Arg::Z, x, y, z);
}

/// Mixed second-derivative blocks D2_xy (n_x x n_y), D2_xz, D2_yz.
struct HessianBlocks {
  Matrix xy, xz, yz;
};

inline HessianBlocks hessian_blocks(const SurplusModel& s, const Point& x, const Point& y, const Point& z) {
  detail::check_dims(s, x, y, z);
  return std::visit(
      [&](const auto& f) -> HessianBlocks {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Bilinear>) {
          return {f.A, f.B, f.C};
        } else if constexpr (std::is_same_v<T, Counterexample>) {
          return {Matrix{{1.0}}, Matrix{{1.0}}, Matrix{{-1.0}}};
        } else if constexpr (std::is_same_v<T, ExpCos>) {
          return {detail::expcos_pair(x, y).dab, detail::expcos_pair(x, z).dab, detail::expcos_pair(y, z).dab};
        } else if constexpr (std::is_same_v<T, Supermodular1D>) {
          double hxy = 0, hxz = 0, hyz = 0;
          for (const auto& m : f.terms) {
            const double X = detail::ipow(x[0], m.px), Y = detail::ipow(y[0], m.py), Z = detail::ipow(z[0], m.pz);
            const double dX = detail::dipow(x[0], m.px), dY = detail::dipow(y[0], m.py),
                         dZ = detail::dipow(z[0], m.pz);
            hxy += m.coef * dX * dY * Z;
            hxz += m.coef * dX * Y * dZ;
            hyz += m.coef * X * dY * dZ;
          }
          return {Matrix{{hxy}}, Matrix{{hxz}}, Matrix{{hyz}}};
        } else if constexpr (std::is_same_v<T, StrictlyHedonic>) {
          return {Matrix{{0.0}}, Matrix{{detail::bivariate(f.u, x[0], z[0]).dab}},
                  Matrix{{detail::bivariate(f.v, y[0], z[0]).dab}}};
        } else if constexpr (std::is_same_v<T, Split>) {
          const auto a = hessian_blocks(*f.u, x, y, z);
          const auto b = hessian_blocks(*f.v, x, y, z);
          return {a.xy + b.xy, a.xz + b.xz, a.yz + b.yz};
        } else {
          const auto g = detail::flatten(f);
          const Point p = detail::concat(x, y, z);
          const std::size_t nx = x.size(), ny = y.size(), nz = z.size();
          HessianBlocks h{Matrix(nx, ny), Matrix(nx, nz), Matrix(ny, nz)};
          for (std::size_t i = 0; i < nx; ++i)
            for (std::size_t j = 0; j < ny; ++j) h.xy(i, j) = detail::tabulated_mixed(f, g, p, i, nx + j);
          for (std::size_t i = 0; i < nx; ++i)
            for (std::size_t k = 0; k < nz; ++k) h.xz(i, k) = detail::tabulated_mixed(f, g, p, i, nx + ny + k);
          for (std::size_t j = 0; j < ny; ++j)
            for (std::size_t k = 0; k < nz; ++k) h.yz(j, k) = detail::tabulated_mixed(f, g, p, nx + j, nx + ny + k);
          return h;
        }
      },
      s.family());
}

/// Block matrix [[0, Hxy, Hxz], [Hxy', 0, Hyz], [Hxz', Hyz', 0]].
inline Matrix assemble_G(const HessianBlocks& b) {
  const std::size_t nx = b.xy.rows(), ny = b.xy.cols(), nz = b.xz.cols();
  if (b.xz.rows() != nx || b.yz.rows() != ny || b.yz.cols() != nz)
    throw Error(ErrorCode::ShapeMismatch, "Hessian block shapes are inconsistent");
  Matrix g(nx + ny + nz, nx + ny + nz);
  auto place = [&](const Matrix& m, std::size_t r0, std::size_t c0) {
    for (std::size_t r = 0; r < m.rows(); ++r)
      for (std::size_t c = 0; c < m.cols(); ++c) {
        g(r0 + r, c0 + c) = m(r, c);
        g(c0 + c, r0 + r) = m(r, c);
      }
  };
  place(b.xy, 0, nx);
  place(b.xz, 0, nx + ny);
  place(b.yz, nx, nx + ny);
  return g;
}

/// Equal-dimension cross-check: the inertia of
/// M = Hzy Hxy^{-1} Hxz + Hzx Hyx^{-1} Hyz predicts (lambda+, lambda-) = (n + r-, n + r+).
struct SignatureCrossCheck {
  Matrix M;
  std::vector<double> eigenvalues;
  std::size_t r_plus = 0;
  std::size_t r_minus = 0;
  bool consistent = false;
};

struct SignatureReport {
  Point x, y, z;
  Matrix G;
  std::vector<double> eigenvalues;  // ascending
  std::size_t lambda_plus = 0, lambda_minus = 0, lambda_zero = 0;
  std::size_t dimension_bound = 0;  // n_x + n_y + n_z - lambda_minus
  double zero_threshold = 0.0;
  double eigen_residual = 0.0;
  std::optional<SignatureCrossCheck> cross_check;
  std::string cross_check_status;  // "ok", "SingularBlock" or "dimensions differ"
};

inline constexpr double kZeroEigenRel = 1e-9;
inline constexpr double kSingularPivotRel = 1e-10;

inline SignatureReport signature(const SurplusModel& s, const Point& x, const Point& y, const Point& z) {
  const HessianBlocks blocks = hessian_blocks(s, x, y, z);
  SignatureReport rep;
  rep.x = x;
  rep.y = y;
  rep.z = z;
  rep.G = assemble_G(blocks);
  const auto eig = jacobi_eigen(rep.G);
  rep.eigenvalues = eig.values;
  rep.eigen_residual = eig.max_residual;
  const Inertia in = classify_eigenvalues(eig.values, kZeroEigenRel);
  rep.lambda_plus = in.positive;
  rep.lambda_minus = in.negative;
  rep.lambda_zero = in.zero;
  rep.zero_threshold = in.threshold;
  rep.dimension_bound = rep.G.rows() - rep.lambda_minus;

  const Dims d = s.dims();
  if (!(d.x == d.y && d.y == d.z)) {
    rep.cross_check_status = "dimensions differ";
    return rep;
  }
  const LuDecomposition lxy(blocks.xy, kSingularPivotRel), lxz(blocks.xz, kSingularPivotRel),
      lyz(blocks.yz, kSingularPivotRel);
  if (lxy.singular() || lxz.singular() || lyz.singular()) {
    rep.cross_check_status = "SingularBlock";
    return rep;
  }
  const Matrix hzy = blocks.yz.transpose();
  const Matrix hzx = blocks.xz.transpose();
  const Matrix hyx_inv = LuDecomposition(blocks.xy.transpose(), kSingularPivotRel).inverse();
  const Matrix first = hzy * lxy.inverse() * blocks.xz;
  const Matrix second = hzx * hyx_inv * blocks.yz;
  SignatureCrossCheck cc;
  cc.M = symmetric_part(first + second);
  cc.eigenvalues = jacobi_eigen(cc.M).values;
  const Inertia r = classify_eigenvalues(cc.eigenvalues, kZeroEigenRel);
  cc.r_plus = r.positive;
  cc.r_minus = r.negative;
  const std::size_t n = d.x;
  cc.consistent = rep.lambda_plus == n + cc.r_minus && rep.lambda_minus == n + cc.r_plus;
  rep.cross_check = std::move(cc);
  rep.cross_check_status = "ok";
  return rep;
}

/// sum over support of mass * s(x_i, y_j, z_k).
inline double coupling_objective(const Coupling& c, const SurplusModel& s, std::span<const Point> X,
                                 std::span<const Point> Y, std::span<const Point> Z) {
  if (c.arity() != 3) throw Error(ErrorCode::BadAxes, "surplus objective needs an arity-3 coupling");
  if (X.size() != c.shape()[0] || Y.size() != c.shape()[1] || Z.size() != c.shape()[2])
    throw Error(ErrorCode::SizeMismatch, "point lists do not match coupling shape");
  double acc = 0.0;
  for (const auto& e : c.entries()) {
    const double v = eval(s, X[e.i()], Y[e.j()], Z[e.k()]);
    if (!std::isfinite(v)) throw Error(ErrorCode::EvalDomainError, "surplus is not finite on the support");
    acc += e.mass * v;
  }
  return acc;
}

/// Arity-2 objective against a dense reward matrix (e.g. the reduced surplus).
inline double coupling_objective(const Coupling& c, const Matrix& reward) {
  if (c.arity() != 2) throw Error(ErrorCode::BadAxes, "matrix objective needs an arity-2 coupling");
  if (reward.rows() != c.shape()[0] || reward.cols() != c.shape()[1])
    throw Error(ErrorCode::SizeMismatch, "reward matrix does not match coupling shape");
  double acc = 0.0;
  for (const auto& e : c.entries()) acc += e.mass * reward(e.i(), e.j());
  return acc;
}

/// Dense tensor of s over X x Y x Z, index (i * n_y + j) * n_z + k.
class SurplusTensor {
 public:
  SurplusTensor(const SurplusModel& s, std::span<const Point> X, std::span<const Point> Y, std::span<const Point> Z)
      : nx_(X.size()), ny_(Y.size()), nz_(Z.size()), values_(nx_ * ny_ * nz_) {
    if (X.empty() || Y.empty() || Z.empty()) throw Error(ErrorCode::EmptyGrid, "surplus tensor over an empty set");
    for (std::size_t i = 0; i < nx_; ++i)
      for (std::size_t j = 0; j < ny_; ++j)
        for (std::size_t k = 0; k < nz_; ++k) {
          const double v = eval(s, X[i], Y[j], Z[k]);
          if (!std::isfinite(v)) throw Error(ErrorCode::EvalDomainError, "surplus is not finite on the grid");
          values_[(i * ny_ + j) * nz_ + k] = v;
        }
  }

  double operator()(std::size_t i, std::size_t j, std::size_t k) const { return values_[(i * ny_ + j) * nz_ + k]; }
  std::size_t nx() const noexcept { return nx_; }
  std::size_t ny() const noexcept { return ny_; }
  std::size_t nz() const noexcept { return nz_; }
  std::span<const double> values() const noexcept { return values_; }

 private:
  std::size_t nx_, ny_, nz_;
  std::vector<double> values_;
};

}  // namespace hedonic
