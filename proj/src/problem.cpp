#include "flatdyn/problem.hpp"

#include <algorithm>
#include <cmath>

#include "flatdyn/errors.hpp"

namespace flatdyn {

namespace {

constexpr int kArityProbe = 1 << 20;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\n\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\n\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void ProblemSpec::validate() const {
  if (dimension < 1) throw InvalidArgument("dimension must be a positive integer");
  if (static_cast<int>(field_components.size()) != dimension)
    throw ArityError("field has " + std::to_string(field_components.size()) + " components but dimension is " +
                     std::to_string(dimension));
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidArgument("radius must be positive");
  if (c && !(*c >= 0.0 && std::isfinite(*c))) throw InvalidArgument("c must be finite and non-negative");
  integrator.validate();
  for (const auto& t : field_components) parse(t, dimension);
  if (has_function()) parse(scalar_function, dimension);
}

VectorField ProblemSpec::field() const {
  validate();
  return VectorField::parse(field_components);
}

ParsedFunction ProblemSpec::function() const {
  if (!has_function()) throw InvalidArgument("no scalar function given (use --f)");
  return parse(scalar_function, dimension).with_origin_value(f_origin_value);
}

std::vector<std::string> split_components(const std::string& text) {
  std::vector<std::string> out;
  int depth = 0;
  std::string current;
  for (char ch : text) {
    if (ch == '(') ++depth;
    if (ch == ')') --depth;
    if (ch == ',' && depth == 0) {
      out.push_back(trim(current));
      current.clear();
    } else {
      current += ch;
    }
  }
  out.push_back(trim(current));
  for (const auto& c : out)
    if (c.empty()) throw SyntaxError(0, "field component", text);
  return out;
}

int infer_dimension(const std::vector<std::string>& texts) {
  int n = 1;
  for (const auto& t : texts) n = std::max(n, max_variable_index(parse(t, kArityProbe).body()));
  return n;
}

namespace {

ProblemSpec make_spec(std::vector<std::string> field, std::string f, std::optional<double> origin = std::nullopt) {
  ProblemSpec s;
  s.dimension = static_cast<int>(field.size());
  s.field_components = std::move(field);
  s.scalar_function = std::move(f);
  s.f_origin_value = origin;
  return s;
}

std::vector<CatalogEntry> build_catalog() {
  using K = Conclusion::Kind;
  std::vector<CatalogEntry> c = {
      {"flat-bump-1d", make_spec({"x1"}, "exp(-1/(x1^2))", 0.0), {K::HypothesisFailed, "constant", {}},
       "flat nonzero f under h = x; |x f'/f| = 2/x^2 has no finite bound near 0"},
      {"flat-bump-2d", make_spec({"x1", "x2"}, "exp(-1/(x1^2+x2^2))", 0.0), {K::HypothesisFailed, "constant", {}},
       "radial flat bump; X.f / f = 2/|x|^2 diverges"},
      {"linear-sink-2d", make_spec({"-x1", "-x2"}, "x1^2+x2^2"), {K::HypothesisFailed, "spectrum", {}},
       "h = -x: the origin is a sink, eigenvalues -1, -1"},
      {"nonlinear-source-2d", make_spec({"x1+x1^3", "x2+x2^3"}, "0"), {K::MustVanish, {}, {}},
       "Jacobian I at 0, <h(x),x> = |x|^2 + sum x_i^4, f = 0"},
      {"norm-squared-2d", make_spec({"x1", "x2"}, "x1^2+x2^2"), {K::HypothesisFailed, "flatness", {}},
       "X.f = 2f holds with c = 2 but f is not flat (order 2)"},
      {"paper-example-n2-zero-f", make_spec({"x1", "x2"}, "0"), {K::MustVanish, {}, {}},
       "h(x) = x in two variables with f = 0: Jacobian I, <h(x),x> = |x|^2"},
      {"power-2c-1d", make_spec({"x1"}, "x1^2"), {K::HypothesisFailed, "flatness", {}},
       "x f' = 2f: equality case of the inequality with c = 2, f not flat"},
      {"quartic-1d", make_spec({"x1"}, "x1^4"), {K::HypothesisFailed, "flatness", {}},
       "x f' = 4f: inequality holds with c = 4, f vanishes to order 4 only"},
      {"rotation-2d", make_spec({"x2", "-x1"}, "x1^2+x2^2"), {K::HypothesisFailed, "spectrum", {}},
       "rotation field, eigenvalues +-i"},
      {"shear-source-2d", make_spec({"x1+10*x2", "x2"}, "0"), {K::HypothesisFailed, "inner_product", {}},
       "source (eigenvalues 1, 1) with <h(x),x> < 0 along x1 = -x2"},
  };
  std::sort(c.begin(), c.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  return c;
}

}  // namespace

const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> entries = build_catalog();
  return entries;
}

const CatalogEntry& catalog_entry(const std::string& name) {
  for (const auto& e : catalog())
    if (e.name == name) return e;
  throw InvalidArgument("unknown catalog entry '" + name + "'");
}

}  // namespace flatdyn
