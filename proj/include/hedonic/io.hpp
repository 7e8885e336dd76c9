#pragma once

// Readers and writers for the CSV and JSON file formats. The JSON writer sorts
// keys and prints numbers with %.17g so repeated runs are byte-identical.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hedonic/core_model.hpp"
#include "hedonic/diagnostics.hpp"
#include "hedonic/error.hpp"
#include "hedonic/solver.hpp"
#include "hedonic/surplus.hpp"

namespace hedonic::io {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Canonical emitter

namespace detail {

inline std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  if (v == 0.0) return "0";  // folds -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void emit(std::ostream& os, const json& j, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << '{' << nl;
      bool first = true;
      for (const auto& [k, v] : j.items()) {  // std::map keeps keys sorted
        if (!first) os << ',' << nl;
        first = false;
        os << pad << json(k).dump() << (indent > 0 ? ": " : ":");
        emit(os, v, indent, depth + 1);
      }
      os << nl << close_pad << '}';
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      // Scalar arrays stay on one line.
      const bool flat = std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_primitive(); });
      os << '[' << (flat ? "" : nl);
      bool first = true;
      for (const auto& v : j) {
        if (!first) os << ',' << (flat ? (indent > 0 ? " " : "") : nl);
        first = false;
        if (!flat) os << pad;
        emit(os, v, indent, depth + 1);
      }
      os << (flat ? "" : nl) << (flat ? "" : close_pad) << ']';
      return;
    }
    case json::value_t::number_float: os << format_double(j.get<double>()); return;
    default: os << j.dump(); return;
  }
}

}  // namespace detail

inline std::string canonical_dump(const json& j, int indent = 2) {
  std::ostringstream os;
  detail::emit(os, j, indent, 0);
  os << '\n';
  return os.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::ParseError, "cannot write " + path);
  f << text;
}

inline std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::ParseError, "cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, what + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Measures

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
  }
  return out;
}

inline double parse_number(const std::string& s, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size())
    throw Error(ErrorCode::ParseError, "bad number '" + s + "' on line " + std::to_string(line));
  return v;
}

}  // namespace detail

/// Header row required; the last column is the weight. Validation is left
/// to validate_measure so the caller sees the specific invariant violated.
inline DiscreteMeasure parse_measure_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "measure CSV is empty");
  const auto header = detail::split_csv_line(line);
  if (header.size() < 2 || header.back() != "weight")
    throw Error(ErrorCode::ParseError, "measure CSV header must be x1..xd,weight");
  const std::size_t d = header.size() - 1;
  DiscreteMeasure m;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != d + 1)
      throw Error(ErrorCode::DimensionMismatch, "line " + std::to_string(lineno) + " has the wrong column count");
    Point p(d);
    for (std::size_t a = 0; a < d; ++a) p[a] = detail::parse_number(cells[a], lineno);
    m.points.push_back(std::move(p));
    m.weights.push_back(detail::parse_number(cells[d], lineno));
  }
  return m;
}

inline DiscreteMeasure read_measure_csv(const std::string& path) {
  std::istringstream in(read_text(path));
  return parse_measure_csv(in);
}

/// Point list for Z: same layout as a measure CSV, the weight column optional.
inline std::vector<Point> read_points_csv(const std::string& path) {
  std::istringstream in(read_text(path));
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "points CSV is empty");
  const auto header = detail::split_csv_line(line);
  const std::size_t d = header.size() - (header.back() == "weight" ? 1 : 0);
  if (d == 0) throw Error(ErrorCode::ParseError, "points CSV has no coordinate columns");
  std::vector<Point> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size())
      throw Error(ErrorCode::DimensionMismatch, "line " + std::to_string(lineno) + " has the wrong column count");
    Point p(d);
    for (std::size_t a = 0; a < d; ++a) p[a] = detail::parse_number(cells[a], lineno);
    out.push_back(std::move(p));
  }
  if (out.empty()) throw Error(ErrorCode::EmptyGrid, "points CSV has no rows");
  return out;
}

inline std::string measure_csv(const DiscreteMeasure& m) {
  std::ostringstream os;
  const std::size_t d = m.points.empty() ? 0 : m.points.front().size();
  for (std::size_t a = 0; a < d; ++a) os << 'x' << (a + 1) << ',';
  os << "weight\n";
  for (std::size_t n = 0; n < m.size(); ++n) {
    for (double v : m.points[n]) os << detail::format_double(v) << ',';
    os << detail::format_double(m.weights[n]) << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Couplings

inline json to_json(const Coupling& c) {
  json entries = json::array();
  for (const auto& e : c.entries()) {
    json row = {{"i", e.i()}, {"j", e.j()}, {"mass", e.mass}};
    if (c.arity() == 3) row["k"] = e.k();
    entries.push_back(std::move(row));
  }
  json shape = json::array({c.shape()[0], c.shape()[1]});
  if (c.arity() == 3) shape.push_back(c.shape()[2]);
  return {{"arity", c.arity()}, {"shape", shape}, {"entries", entries}};
}

/// "shape" is optional; without it the shape is the smallest one that fits.
inline Coupling coupling_from_json(const json& j) {
  try {
    const int arity = j.at("arity").get<int>();
    if (arity != 2 && arity != 3) throw Error(ErrorCode::BadAxes, "coupling arity must be 2 or 3");
    std::vector<CouplingEntry> entries;
    std::array<std::size_t, 3> shape{0, 0, arity == 2 ? 1u : 0u};
    for (const auto& e : j.at("entries")) {
      CouplingEntry ce;
      ce.index[0] = e.at("i").get<std::size_t>();
      ce.index[1] = e.at("j").get<std::size_t>();
      if (arity == 3) ce.index[2] = e.at("k").get<std::size_t>();
      ce.mass = e.at("mass").get<double>();
      for (std::size_t a = 0; a < static_cast<std::size_t>(arity); ++a)
        shape[a] = std::max(shape[a], ce.index[a] + 1);
      entries.push_back(ce);
    }
    if (j.contains("shape")) {
      const auto& s = j.at("shape");
      if (s.size() != static_cast<std::size_t>(arity)) throw Error(ErrorCode::ShapeMismatch, "coupling shape length");
      for (std::size_t a = 0; a < s.size(); ++a) shape[a] = s[a].get<std::size_t>();
    }
    return Coupling(arity, shape, std::move(entries));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("coupling JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Matrices and surplus models

inline json to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const json& j, const char* what) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, std::string(what) + " must be an array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = rows ? j[0].size() : 0;
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols)
      throw Error(ErrorCode::ShapeMismatch, std::string(what) + " rows have unequal length");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

namespace detail {

inline json grid_json(const GridSpec& g) {
  json axes = json::array();
  for (const auto& a : g.axes) axes.push_back({{"lower", a.lower}, {"upper", a.upper}, {"count", a.count}});
  return axes;
}

inline GridSpec grid_from_json(const json& j) {
  GridSpec g;
  for (const auto& a : j)
    g.axes.push_back({a.at("lower").get<double>(), a.at("upper").get<double>(), a.at("count").get<std::size_t>()});
  return g;
}

}  // namespace detail

inline json to_json(const SurplusModel& s) {
  return std::visit(
      [&](const auto& f) -> json {
        using T = std::decay_t<decltype(f)>;
        json j = {{"family", std::string(s.name())}};
        if constexpr (std::is_same_v<T, Bilinear>) {
          j["A"] = to_json(f.A);
          j["B"] = to_json(f.B);
          j["C"] = to_json(f.C);
          if (!f.D.empty()) j["D"] = to_json(f.D);
          if (!f.f.empty()) j["f"] = f.f;
          if (!f.g.empty()) j["g"] = f.g;
          if (!f.h.empty()) j["h"] = f.h;
        } else if constexpr (std::is_same_v<T, Counterexample>) {
          j["a"] = f.a;
        } else if constexpr (std::is_same_v<T, Supermodular1D>) {
          json terms = json::array();
          for (const auto& t : f.terms) terms.push_back({{"coef", t.coef}, {"px", t.px}, {"py", t.py}, {"pz", t.pz}});
          j["terms"] = terms;
        } else if constexpr (std::is_same_v<T, StrictlyHedonic>) {
          j["u"] = to_json(f.u);
          j["v"] = to_json(f.v);
        } else if constexpr (std::is_same_v<T, Tabulated>) {
          j["x_grid"] = detail::grid_json(f.x_grid);
          j["y_grid"] = detail::grid_json(f.y_grid);
          j["z_grid"] = detail::grid_json(f.z_grid);
          j["values"] = f.values;
        } else if constexpr (std::is_same_v<T, Split>) {
          j["u"] = to_json(*f.u);
          j["v"] = to_json(*f.v);
        }
        return j;
      },
      s.family());
}

inline SurplusModel surplus_from_json(const json& j) {
  try {
    const std::string family = j.at("family").get<std::string>();
    if (family == "bilinear") {
      Bilinear b{matrix_from_json(j.at("A"), "A"), matrix_from_json(j.at("B"), "B"), matrix_from_json(j.at("C"), "C"),
                 j.contains("D") ? matrix_from_json(j.at("D"), "D") : Matrix{}, j.value("f", Polynomial{}),
                 j.value("g", Polynomial{}), j.value("h", Polynomial{})};
      return SurplusModel(std::move(b));
    }
    if (family == "counterexample") return make_counterexample(j.value("a", 0.5));
    if (family == "expcos") return make_expcos();
    if (family == "supermodular1d") {
      std::vector<Monomial> terms;
      for (const auto& t : j.at("terms"))
        terms.push_back({t.value("coef", 1.0), t.value("px", 0), t.value("py", 0), t.value("pz", 0)});
      return make_monomials(std::move(terms));
    }
    if (family == "strictly_hedonic")
      return SurplusModel(StrictlyHedonic{matrix_from_json(j.at("u"), "u"), matrix_from_json(j.at("v"), "v")});
    if (family == "tabulated")
      return SurplusModel(Tabulated{detail::grid_from_json(j.at("x_grid")), detail::grid_from_json(j.at("y_grid")),
                                    detail::grid_from_json(j.at("z_grid")), j.at("values").get<std::vector<double>>()});
    if (family == "split") return make_split(surplus_from_json(j.at("u")), surplus_from_json(j.at("v")));
    throw Error(ErrorCode::ParseError, "unknown surplus family '" + family + "'");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("surplus JSON: ") + e.what());
  }
}

inline SurplusModel read_surplus_json(const std::string& path) {
  return surplus_from_json(parse_json(read_text(path), path));
}

// ---------------------------------------------------------------------------
// Results and reports

inline std::string potentials_csv(const DualPotentials& p) {
  std::ostringstream os;
  os << "side,index,value\n";
  for (std::size_t i = 0; i < p.U.size(); ++i) os << "U," << i << ',' << detail::format_double(p.U[i]) << '\n';
  for (std::size_t j = 0; j < p.V.size(); ++j) os << "V," << j << ',' << detail::format_double(p.V[j]) << '\n';
  return os.str();
}

/// Reads the CSV written by potentials_csv. Rows may appear in any order.
inline DualPotentials parse_potentials_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || detail::split_csv_line(line) != std::vector<std::string>{"side", "index", "value"})
    throw Error(ErrorCode::ParseError, "potentials CSV header must be side,index,value");
  DualPotentials p;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != 3 || (cells[0] != "U" && cells[0] != "V"))
      throw Error(ErrorCode::ParseError, "bad potentials row on line " + std::to_string(lineno));
    auto& vec = cells[0] == "U" ? p.U : p.V;
    const auto idx = static_cast<std::size_t>(detail::parse_number(cells[1], lineno));
    if (vec.size() <= idx) vec.resize(idx + 1, std::nan(""));
    vec[idx] = detail::parse_number(cells[2], lineno);
  }
  for (const auto* vec : {&p.U, &p.V})
    for (double v : *vec)
      if (!std::isfinite(v)) throw Error(ErrorCode::ParseError, "potentials CSV has missing or non-finite entries");
  return p;
}

inline DualPotentials read_potentials_csv(const std::string& path) {
  std::istringstream in(read_text(path));
  return parse_potentials_csv(in);
}

inline json to_json(const SolveResult& r) {
  json j = {{"method", r.method},
            {"objective", r.objective},
            {"dual_objective", r.dual_objective},
            {"gap", r.gap},
            {"iterations", r.iterations},
            {"degenerate_optimum", r.degenerate},
            {"U", r.potentials.U},
            {"V", r.potentials.V},
            {"coupling", to_json(r.coupling)}};
  if (!r.z_potential.empty()) j["W"] = r.z_potential;
  return j;
}

inline json to_json(const StabilityReport& r) {
  return {{"max_grid_residual", r.max_grid_residual},
          {"max_support_residual", r.max_support_residual},
          {"stable", r.stable},
          {"worst", r.worst},
          {"tol", r.tol}};
}

inline json to_json(const PurityReport& r) {
  return {{"buyer_seller_pure", r.buyer_seller_pure},
          {"buyer_good_pure", r.buyer_good_pure},
          {"pure", r.pure},
          {"y_fanout", r.y_fanout},
          {"z_fanout", r.z_fanout},
          {"yz_fanout", r.yz_fanout},
          {"F_Y", r.F_Y},
          {"F_Z", r.F_Z},
          {"mass_threshold", r.mass_threshold}};
}

inline json to_json(const PriceTable& t) {
  json rows = json::array();
  for (const auto& r : t.rows)
    rows.push_back({{"i", r.i},
                    {"j", r.j},
                    {"k", r.k},
                    {"price_buyer", r.price_buyer},
                    {"price_seller", r.price_seller},
                    {"discrepancy", r.discrepancy}});
  return {{"rows", rows}, {"max_discrepancy", t.max_discrepancy}};
}

inline json to_json(const TwistReport& r) {
  json j = {{"criterion", r.criterion}, {"verdict", std::string(to_string(r.verdict))}, {"tol", r.tol}};
  if (r.criterion_value) j["criterion_value"] = *r.criterion_value;
  if (r.witness) {
    json w = {{"description", r.witness->description}, {"value", r.witness->value}};
    if (!r.witness->point.empty()) w["point"] = r.witness->point;
    if (!r.witness->matrix.empty()) w["matrix"] = to_json(r.witness->matrix);
    j["witness"] = w;
  }
  return j;
}

inline json to_json(const SignatureReport& r) {
  json j = {{"x", r.x},
            {"y", r.y},
            {"z", r.z},
            {"G", to_json(r.G)},
            {"eigenvalues", r.eigenvalues},
            {"signature", {r.lambda_plus, r.lambda_minus, r.lambda_zero}},
            {"dimension_bound", r.dimension_bound},
            {"zero_threshold", r.zero_threshold},
            {"eigen_residual", r.eigen_residual},
            {"cross_check_status", r.cross_check_status}};
  if (r.cross_check)
    j["cross_check"] = {{"M", to_json(r.cross_check->M)},
                        {"eigenvalues", r.cross_check->eigenvalues},
                        {"r_plus", r.cross_check->r_plus},
                        {"r_minus", r.cross_check->r_minus},
                        {"consistent", r.cross_check->consistent}};
  return j;
}

inline json to_json(const SupportDimensionReport& r) {
  return {{"mean_local_dimension", r.mean_local_dimension},
          {"estimate", r.estimate},
          {"support_points", r.support_points},
          {"radius", r.radius},
          {"cutoff", r.cutoff},
          {"bound", r.bound.dimension_bound},
          {"signature_at_centroid", to_json(r.bound)},
          {"heuristic", r.heuristic}};
}

}  // namespace hedonic::io
