#include "flatdyn/report_io.hpp"

#include <cmath>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

#include "flatdyn/errors.hpp"

namespace flatdyn {

namespace {

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json optional_number(const std::optional<double>& v) { return v ? number_or_null(*v) : Json(nullptr); }

Json series(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(number_or_null(x));
  return a;
}

}  // namespace

Json to_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number_or_null(v(i)));
  return a;
}

Json to_json(const SpectrumReport& r) {
  Json eig = Json::array();
  for (const auto& z : r.eigenvalues) eig.push_back({{"re", number_or_null(z.real())}, {"im", number_or_null(z.imag())}});
  return {{"eigenvalues", eig},
          {"min_real_part", number_or_null(r.min_real_part)},
          {"max_real_part", number_or_null(r.max_real_part)},
          {"classification", to_string(r.classification)},
          {"tolerance_used", r.tolerance_used}};
}

Json to_json(const PositivityReport& r) {
  return {{"samples_checked", r.samples_checked},
          {"min_value", number_or_null(r.min_value)},
          {"attaining_point", to_json(r.attaining_point)},
          {"verdict", r.verdict}};
}

Json to_json(const InequalityEstimate& r) {
  Json sups = Json::array();
  for (const auto& s : r.per_radius_sup) sups.push_back({{"radius", s.radius}, {"sup", optional_number(s.sup)}});
  Json attaining = nullptr;
  if (r.valid > 0)
    attaining = {{"point", to_json(r.attaining.point)},
                 {"f", number_or_null(r.attaining.f_value)},
                 {"xf", number_or_null(r.attaining.xf_value)},
                 {"ratio", optional_number(r.attaining.ratio)}};
  return {{"rhs", to_string(r.rhs)},
          {"c_hat", r.valid > 0 ? number_or_null(r.c_hat) : Json(nullptr)},
          {"attaining", attaining},
          {"samples", r.samples},
          {"valid", r.valid},
          {"flagged", r.flagged},
          {"per_radius_sup", sups}};
}

Json to_json(const FlatnessReport& r) {
  Json table = Json::array();
  for (Eigen::Index i = 0; i < r.ratio_table.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < r.ratio_table.cols(); ++k) row.push_back(number_or_null(r.ratio_table(i, k)));
    table.push_back(row);
  }
  Json verdicts = Json::array();
  Json flags = Json::array();
  for (std::size_t k = 0; k < r.verdicts.size(); ++k) {
    verdicts.push_back(to_string(r.verdicts[k]));
    flags.push_back(r.verdict(static_cast<int>(k)));
  }
  return {{"radii", series(r.radii)},
          {"k_max", r.k_max},
          {"directions", r.directions},
          {"flat_tol", r.flat_tol},
          {"ratio_table", table},
          {"verdict_detail", verdicts},
          {"verdict", flags},
          {"overall", to_string(r.overall)},
          {"overall_verdict", r.overall_verdict()}};
}

Json to_json(const WitnessBound& w) {
  return {{"p", to_json(w.p)},
          {"q", to_json(w.q)},
          {"c", w.c},
          {"lambda", number_or_null(w.lambda)},
          {"theta", number_or_null(w.theta)},
          {"exponent", number_or_null(w.exponent)},
          {"k_const", number_or_null(w.k_const)},
          {"orbit_ratio_sup", number_or_null(w.orbit_ratio_sup)},
          {"checked_points", w.checked_points},
          {"min_margin", number_or_null(w.min_margin)}};
}

Json to_json(const GsCertificate& c) {
  const auto& k = c.hypothesis_constant;
  Json constant = {{"c_used", number_or_null(k.c_used)},
                   {"c_source", k.c_from_user ? "user" : "outer_band_sup"},
                   {"passed", k.passed},
                   {"estimate", to_json(k.estimate)}};
  Json spectrum = to_json(c.hypothesis_spectrum);
  spectrum["passed"] = c.spectrum_passed;
  Json inner = to_json(c.hypothesis_inner_product);
  inner["passed"] = c.hypothesis_inner_product.verdict;
  Json flat = to_json(c.hypothesis_flatness);
  flat["passed"] = c.hypothesis_flatness.overall_verdict();
  Json j = {{"radius", c.radius},
            {"rhs", to_string(c.rhs)},
            {"seed", c.seed},
            {"flat_tol", c.flat_tol},
            {"hypotheses",
             {{"spectrum", spectrum}, {"inner_product", inner}, {"constant", constant}, {"flatness", flat}}},
            {"f_sup_on_domain", number_or_null(c.f_sup_on_domain)},
            {"conclusion", c.conclusion.label()},
            {"reason", c.conclusion.reason},
            {"witness", c.witness ? to_json(*c.witness) : Json(nullptr)}};
  if (!c.witness_note.empty()) j["witness_note"] = c.witness_note;
  return j;
}

Json to_json(const SinkRateFit& f) {
  return {{"theta", number_or_null(f.theta)},
          {"lambda", number_or_null(f.lambda)},
          {"rms_log_residual", number_or_null(f.rms_log_residual)},
          {"samples_used", f.samples_used},
          {"excluded_at_anchor", f.excluded_at_anchor}};
}

Json to_json(const MaximalInterval& m) {
  const auto end = [](const IntervalEnd& e) {
    return Json{{"kind", to_string(e.kind)}, {"time", number_or_null(e.time)}};
  };
  return {{"t_minus", end(m.t_minus)}, {"t_plus", end(m.t_plus)}};
}

Json to_json(const GronwallReport& r) {
  return {{"c", r.c}, {"max_violation", number_or_null(r.max_violation)}, {"verdict", r.verdict}};
}

Json to_json(const IntegratorConfig& c) {
  return {{"method", to_string(c.method)},   {"step", c.step},
          {"rel_tol", c.rel_tol},            {"abs_tol", c.abs_tol},
          {"min_step", c.min_step},          {"max_step", c.max_step},
          {"t_max", c.t_max},                {"escape_radius", c.escape_radius},
          {"convergence_radius", c.convergence_radius}, {"convergence_dwell", c.convergence_dwell}};
}

Json to_json(const ProblemSpec& s) {
  Json j = {{"dimension", s.dimension}, {"field", s.field_components}};
  if (s.has_function()) j["f"] = s.scalar_function;
  if (s.f_origin_value) j["f_origin_value"] = *s.f_origin_value;
  j["radius"] = s.radius;
  if (s.c) j["c"] = *s.c;
  j["seed"] = s.seed;
  j["rhs"] = to_string(s.rhs);
  j["integrator"] = to_json(s.integrator);
  return j;
}

namespace {

template <typename T>
T get_as(const Json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("spec key '") + key + "': " + e.what());
  }
}

}  // namespace

void apply_integrator_json(const Json& j, IntegratorConfig& c) {
  if (!j.is_object()) throw InvalidArgument("'integrator' must be an object");
  if (j.contains("method")) c.method = method_from_string(get_as<std::string>(j, "method"));
  if (j.contains("step")) c.step = get_as<double>(j, "step");
  if (j.contains("rel_tol")) c.rel_tol = get_as<double>(j, "rel_tol");
  if (j.contains("abs_tol")) c.abs_tol = get_as<double>(j, "abs_tol");
  if (j.contains("min_step")) c.min_step = get_as<double>(j, "min_step");
  if (j.contains("max_step")) c.max_step = get_as<double>(j, "max_step");
  if (j.contains("t_max")) c.t_max = get_as<double>(j, "t_max");
  if (j.contains("escape_radius")) c.escape_radius = get_as<double>(j, "escape_radius");
  if (j.contains("convergence_radius")) c.convergence_radius = get_as<double>(j, "convergence_radius");
  if (j.contains("convergence_dwell")) c.convergence_dwell = get_as<int>(j, "convergence_dwell");
}

ProblemSpec problem_from_json(const Json& j) {
  if (!j.is_object()) throw InvalidArgument("problem spec must be a JSON object");
  ProblemSpec s;
  if (j.contains("field")) {
    const Json& f = j.at("field");
    if (f.is_string())
      s.field_components = split_components(f.get<std::string>());
    else
      s.field_components = get_as<std::vector<std::string>>(j, "field");
  }
  if (j.contains("f")) s.scalar_function = get_as<std::string>(j, "f");
  if (j.contains("dimension")) s.dimension = get_as<int>(j, "dimension");
  else if (!s.field_components.empty()) s.dimension = static_cast<int>(s.field_components.size());
  if (j.contains("f_origin_value") && !j.at("f_origin_value").is_null())
    s.f_origin_value = get_as<double>(j, "f_origin_value");
  if (j.contains("radius")) s.radius = get_as<double>(j, "radius");
  if (j.contains("c") && !j.at("c").is_null()) s.c = get_as<double>(j, "c");
  if (j.contains("seed")) s.seed = get_as<std::uint64_t>(j, "seed");
  if (j.contains("rhs")) s.rhs = rhs_mode_from_string(get_as<std::string>(j, "rhs"));
  if (j.contains("integrator")) apply_integrator_json(j.at("integrator"), s.integrator);
  return s;
}

std::string dump_json(const Json& j, int indent) { return j.dump(indent < 0 ? -1 : indent); }

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  if (s.empty()) throw InvalidArgument("empty CSV number");
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) throw InvalidArgument("bad CSV number '" + s + "'");
  return v;
}

bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

void expect_header(std::istream& in, const std::string& header) {
  std::string line;
  if (!next_line(in, line) || line != header) throw InvalidArgument("expected CSV header '" + header + "'");
}

/// Reads numeric rows of exactly `width` cells until EOF or a comment line.
std::vector<std::vector<double>> read_rows(std::istream& in, std::size_t width, std::string* comment = nullptr) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (next_line(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (comment) *comment = line;
      break;
    }
    const auto cells = split_csv(line);
    if (cells.size() != width) throw InvalidArgument("CSV row has " + std::to_string(cells.size()) + " cells");
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(parse_double(c));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

void write_orbit_csv(std::ostream& out, const Orbit& orbit) {
  const Eigen::Index n = orbit.states.empty() ? 0 : orbit.states.front().size();
  out << "t";
  for (Eigen::Index i = 1; i <= n; ++i) out << ",x" << i;
  out << '\n';
  for (std::size_t k = 0; k < orbit.size(); ++k) {
    out << format_number(orbit.times[k]);
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << format_number(orbit.states[k](i));
    out << '\n';
  }
  out << "# termination=" << to_string(orbit.termination) << '\n';
}

Orbit read_orbit_csv(std::istream& in, Direction direction) {
  std::string line;
  if (!next_line(in, line)) throw InvalidArgument("empty orbit CSV");
  const auto header = split_csv(line);
  if (header.size() < 2 || header[0] != "t") throw InvalidArgument("orbit CSV header must be t,x1,...,xn");
  for (std::size_t i = 1; i < header.size(); ++i)
    if (header[i] != "x" + std::to_string(i)) throw InvalidArgument("orbit CSV header must be t,x1,...,xn");

  std::string comment;
  const auto rows = read_rows(in, header.size(), &comment);
  const std::string prefix = "# termination=";
  if (comment.rfind(prefix, 0) != 0) throw InvalidArgument("orbit CSV lacks the termination line");

  Orbit orbit;
  orbit.direction = direction;
  orbit.termination = termination_from_string(comment.substr(prefix.size()));
  for (const auto& r : rows) {
    orbit.times.push_back(r[0]);
    Vector x(static_cast<Eigen::Index>(r.size() - 1));
    for (std::size_t i = 1; i < r.size(); ++i) x(static_cast<Eigen::Index>(i - 1)) = r[i];
    orbit.states.push_back(std::move(x));
  }
  if (orbit.termination == Termination::ConvergedToSingularity && !orbit.states.empty())
    orbit.singular_point = orbit.states.back();
  return orbit;
}

void write_gronwall_csv(std::ostream& out, const GronwallReport& r) {
  out << "t,observed,bound\n";
  for (std::size_t k = 0; k < r.times.size(); ++k)
    out << format_number(r.times[k]) << ',' << format_number(r.observed[k]) << ',' << format_number(r.bound[k])
        << '\n';
}

GronwallReport read_gronwall_csv(std::istream& in) {
  expect_header(in, "t,observed,bound");
  GronwallReport r;
  for (const auto& row : read_rows(in, 3)) {
    r.times.push_back(row[0]);
    r.observed.push_back(row[1]);
    r.bound.push_back(row[2]);
  }
  return r;
}

void write_flatness_csv(std::ostream& out, const FlatnessReport& r) {
  out << "radius,k,ratio\n";
  for (Eigen::Index i = 0; i < r.ratio_table.rows(); ++i)
    for (Eigen::Index k = 0; k < r.ratio_table.cols(); ++k)
      out << format_number(r.radii[static_cast<std::size_t>(i)]) << ',' << k << ','
          << format_number(r.ratio_table(i, k)) << '\n';
}

FlatnessReport read_flatness_csv(std::istream& in) {
  expect_header(in, "radius,k,ratio");
  const auto rows = read_rows(in, 3);
  FlatnessReport r;
  int k_max = -1;
  for (const auto& row : rows) {
    if (row[1] == 0.0) r.radii.push_back(row[0]);
    k_max = std::max(k_max, static_cast<int>(row[1]));
  }
  if (r.radii.empty() || k_max < 0 || rows.size() != r.radii.size() * static_cast<std::size_t>(k_max + 1))
    throw InvalidArgument("flatness CSV is not a complete radius x k table");
  r.k_max = k_max;
  r.ratio_table = Matrix::Zero(static_cast<Eigen::Index>(r.radii.size()), k_max + 1);
  for (std::size_t idx = 0; idx < rows.size(); ++idx)
    r.ratio_table(static_cast<Eigen::Index>(idx / (k_max + 1)), static_cast<Eigen::Index>(rows[idx][1])) =
        rows[idx][2];
  return r;
}

void write_ratio_sup_csv(std::ostream& out, const std::vector<RadiusSup>& sups) {
  out << "radius,sup\n";
  for (const auto& s : sups) out << format_number(s.radius) << ',' << (s.sup ? format_number(*s.sup) : "") << '\n';
}

std::vector<RadiusSup> read_ratio_sup_csv(std::istream& in) {
  expect_header(in, "radius,sup");
  std::vector<RadiusSup> out;
  std::string line;
  while (next_line(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 2) throw InvalidArgument("ratio_sup CSV row must have 2 cells");
    RadiusSup s{parse_double(cells[0]), std::nullopt};
    if (!cells[1].empty()) s.sup = parse_double(cells[1]);
    out.push_back(s);
  }
  return out;
}

void write_witness_csv(std::ostream& out, const WitnessBound& w) {
  out << "t,lhs,rhs\n";
  for (std::size_t k = 0; k < w.times.size(); ++k)
    out << format_number(w.times[k]) << ',' << format_number(w.lhs[k]) << ',' << format_number(w.rhs[k]) << '\n';
}

WitnessBound read_witness_csv(std::istream& in) {
  expect_header(in, "t,lhs,rhs");
  WitnessBound w;
  for (const auto& row : read_rows(in, 3)) {
    w.times.push_back(row[0]);
    w.lhs.push_back(row[1]);
    w.rhs.push_back(row[2]);
  }
  w.checked_points = static_cast<int>(w.times.size());
  return w;
}

}  // namespace flatdyn
