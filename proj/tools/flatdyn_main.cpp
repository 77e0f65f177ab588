#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "flatdyn/certifier.hpp"
#include "flatdyn/errors.hpp"
#include "flatdyn/field.hpp"
#include "flatdyn/flow.hpp"
#include "flatdyn/inequality.hpp"
#include "flatdyn/problem.hpp"
#include "flatdyn/report_io.hpp"

namespace fd = flatdyn;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitInconclusive = 4;

struct GlobalOptions {
  std::string spec_path;
  std::optional<std::uint64_t> seed;
  double tol_hyperbolic = fd::kDefaultHyperbolicTolerance;
  double flat_tol = fd::kDefaultFlatTolerance;
  std::optional<double> radius;
  int json_indent = 2;
};

struct ProblemOptions {
  std::string field;
  std::optional<int> dim;
  std::string f;
  std::optional<double> f_origin;
  std::optional<double> c;
};

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  for (const auto& cell : fd::split_components(text)) {
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end != cell.c_str() + cell.size() || !std::isfinite(v))
      throw fd::InvalidArgument(std::string("bad number '") + cell + "' in " + what);
    out.push_back(v);
  }
  return out;
}

fd::ProblemSpec load_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw fd::InvalidArgument("cannot open spec file '" + path + "'");
  fd::Json j;
  try {
    j = fd::Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw fd::InvalidArgument("spec file '" + path + "': " + e.what());
  }
  return fd::problem_from_json(j);
}

/// File (or catalog) values first, then inline flags on top.
fd::ProblemSpec resolve_spec(const GlobalOptions& g, const ProblemOptions& p,
                             const std::optional<fd::ProblemSpec>& base = std::nullopt) {
  fd::ProblemSpec s = base ? *base : (g.spec_path.empty() ? fd::ProblemSpec{} : load_spec_file(g.spec_path));
  if (base && !g.spec_path.empty()) throw fd::InvalidArgument("--spec and --catalog are mutually exclusive");
  if (!p.field.empty()) {
    s.field_components = fd::split_components(p.field);
    s.dimension = 0;
  }
  if (!p.f.empty()) s.scalar_function = p.f;
  if (p.f_origin) s.f_origin_value = p.f_origin;
  if (p.c) s.c = p.c;
  if (g.seed) s.seed = *g.seed;
  if (g.radius) s.radius = *g.radius;
  if (p.dim) s.dimension = *p.dim;
  if (s.dimension == 0) {
    if (s.field_components.empty()) throw fd::InvalidArgument("no vector field given (use --field or --spec)");
    std::vector<std::string> texts = s.field_components;
    if (s.has_function()) texts.push_back(s.scalar_function);
    s.dimension = std::max(fd::infer_dimension(texts), static_cast<int>(s.field_components.size()));
  }
  s.validate();
  return s;
}

fd::Sampler sampler_for(const fd::ProblemSpec& s) {
  fd::Sampler sampler;
  sampler.seed = s.seed;
  return sampler;
}

void emit(const fd::Json& j, const GlobalOptions& g) { std::cout << fd::dump_json(j, g.json_indent) << '\n'; }

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw fd::InvalidArgument("cannot write '" + path.string() + "'");
  return out;
}

void add_problem_options(CLI::App* sub, ProblemOptions& p, bool with_f, bool with_c) {
  sub->add_option("--field", p.field, "vector field components, comma separated (\"x1,-x2\")");
  sub->add_option("--dim", p.dim, "dimension (inferred from the variables when omitted)")->check(CLI::PositiveNumber);
  if (with_f) {
    sub->add_option("--f", p.f, "scalar function f");
    sub->add_option("--f-origin", p.f_origin, "value of f at the origin (for removable singularities)");
  }
  if (with_c) sub->add_option("--c", p.c, "inequality constant c")->check(CLI::NonNegativeNumber);
}

// ---------------------------------------------------------------------------

int cmd_analyze(const GlobalOptions& g, const ProblemOptions& p) {
  const fd::ProblemSpec s = resolve_spec(g, p);
  const fd::VectorField h = s.field();
  const fd::Vector origin = fd::Vector::Zero(s.dimension);
  fd::Json j;
  j["dimension"] = s.dimension;
  j["radius"] = s.radius;
  j["seed"] = s.seed;
  j["spectrum"] = fd::to_json(fd::classify_singularity(h, origin, g.tol_hyperbolic));
  j["inner_product"] = fd::to_json(fd::inner_product_positivity(h, s.radius, sampler_for(s)));
  emit(j, g);
  return 0;
}

struct FlowOptions {
  std::string x0;
  std::optional<double> t;
  std::string direction = "forward";
  std::string out;
  std::optional<std::string> method;
  std::optional<double> step;
  double escape_radius = 1e3;
};

int cmd_flow(const GlobalOptions& g, const ProblemOptions& p, const FlowOptions& o) {
  fd::ProblemSpec s = resolve_spec(g, p);
  const fd::VectorField h = s.field();
  const std::vector<double> x0v = parse_list(o.x0, "--x0");
  if (static_cast<int>(x0v.size()) != s.dimension)
    throw fd::ArityError("--x0 has " + std::to_string(x0v.size()) + " entries, dimension is " +
                         std::to_string(s.dimension));
  const fd::Vector x0 = Eigen::Map<const fd::Vector>(x0v.data(), s.dimension);

  fd::IntegratorConfig cfg = s.integrator;
  cfg.escape_radius = o.escape_radius;
  if (o.t) cfg.t_max = *o.t;
  if (o.method) cfg.method = fd::method_from_string(*o.method);
  if (o.step) cfg.step = *o.step;
  cfg.validate();
  const fd::Direction dir = fd::direction_from_string(o.direction);
  const fd::Orbit orbit = fd::integrate(h, x0, cfg, dir);

  if (!o.out.empty()) {
    auto out = open_out(o.out);
    fd::write_orbit_csv(out, orbit);
  }

  fd::Json j;
  j["direction"] = fd::to_string(dir);
  j["method"] = fd::to_string(cfg.method);
  j["termination"] = fd::to_string(orbit.termination);
  j["samples"] = orbit.size();
  j["final_time"] = orbit.times.back();
  j["final_state"] = fd::to_json(orbit.final_state());
  if (orbit.singular_point) {
    j["singular_point"] = fd::to_json(*orbit.singular_point);
    try {
      j["fit"] = fd::to_json(fd::fit_sink_rate(orbit, *orbit.singular_point));
    } catch (const fd::NumericalError& e) {
      j["fit"] = nullptr;
      j["fit_note"] = e.what();
    }
  }
  if (!o.out.empty()) j["csv"] = o.out;
  emit(j, g);
  return 0;
}

struct CertifyOptions {
  std::string catalog;
  std::string rhs;
  std::string plot_dir;
  bool no_witness = false;
};

int cmd_certify(const GlobalOptions& g, const ProblemOptions& p, const CertifyOptions& o) {
  std::optional<fd::ProblemSpec> base;
  if (!o.catalog.empty()) base = fd::catalog_entry(o.catalog).spec;
  fd::ProblemSpec s = resolve_spec(g, p, base);
  if (!o.rhs.empty()) s.rhs = fd::rhs_mode_from_string(o.rhs);
  const fd::VectorField h = s.field();
  const fd::ParsedFunction f = s.function();

  fd::CertifyConfig cfg;
  cfg.tol_hyperbolic = g.tol_hyperbolic;
  cfg.flat_tol = g.flat_tol;
  cfg.sampler = sampler_for(s);
  cfg.c = s.c;
  cfg.rhs = s.rhs;
  cfg.integrator = s.integrator;
  cfg.compute_witness = !o.no_witness;
  const fd::GsCertificate cert = fd::certify_gs(h, f, s.radius, cfg);

  if (!o.plot_dir.empty()) {
    const std::filesystem::path dir(o.plot_dir);
    std::filesystem::create_directories(dir);
    auto flat = open_out(dir / "flatness.csv");
    fd::write_flatness_csv(flat, cert.hypothesis_flatness);
    auto sup = open_out(dir / "ratio_sup.csv");
    fd::write_ratio_sup_csv(sup, cert.hypothesis_constant.estimate.per_radius_sup);
    auto wit = open_out(dir / "witness.csv");
    fd::write_witness_csv(wit, cert.witness ? *cert.witness : fd::WitnessBound{});
  }

  fd::Json j;
  if (!o.catalog.empty()) j["catalog"] = o.catalog;
  j["problem"] = fd::to_json(s);
  j["certificate"] = fd::to_json(cert);
  emit(j, g);
  return cert.conclusion.kind == fd::Conclusion::Kind::Inconclusive ? kExitInconclusive : 0;
}

struct FlatnessOptions {
  std::string f;
  std::optional<int> dim;
  std::string catalog_f;
  std::string radii;
  int k_max = 8;
  int directions = 0;
  std::string csv;
};

int cmd_flatness(const GlobalOptions& g, const FlatnessOptions& o) {
  if (o.f.empty() == o.catalog_f.empty()) throw fd::InvalidArgument("give exactly one of --f and --catalog-f");
  std::optional<fd::ParsedFunction> f;
  if (!o.catalog_f.empty()) {
    f = fd::catalog_entry(o.catalog_f).spec.function();
  } else {
    const int n = o.dim ? *o.dim : fd::infer_dimension({o.f});
    f = fd::parse(o.f, n);
  }
  const double radius = g.radius.value_or(1.0);
  if (!(radius > 0.0)) throw fd::InvalidArgument("radius must be positive");
  const std::vector<double> radii = o.radii.empty() ? fd::default_flatness_radii(radius) : parse_list(o.radii, "--radii");
  const fd::FlatnessReport r =
      fd::flatness_probe(*f, radii, o.k_max, o.directions, g.flat_tol, g.seed.value_or(42));
  if (!o.csv.empty()) {
    auto out = open_out(o.csv);
    fd::write_flatness_csv(out, r);
  }
  fd::Json j;
  j["f"] = fd::to_string(*f);
  j["seed"] = g.seed.value_or(42);
  j["flatness"] = fd::to_json(r);
  emit(j, g);
  return 0;
}

struct GronwallOptions {
  std::string orbit_path;
  std::string x0;
  std::optional<double> t;
  std::string direction = "forward";
  double c = 0.0;
  double slack = 1e-6;
  std::string csv;
  double escape_radius = 1e3;
};

int cmd_gronwall(const GlobalOptions& g, const ProblemOptions& p, const GronwallOptions& o) {
  const fd::ProblemSpec s = resolve_spec(g, p);
  const fd::ParsedFunction f = s.function();
  const fd::Direction dir = fd::direction_from_string(o.direction);
  fd::Orbit orbit;
  if (!o.orbit_path.empty()) {
    if (!o.x0.empty()) throw fd::InvalidArgument("give either --orbit or --x0, not both");
    std::ifstream in(o.orbit_path);
    if (!in) throw fd::InvalidArgument("cannot open orbit file '" + o.orbit_path + "'");
    orbit = fd::read_orbit_csv(in, dir);
    if (orbit.size() == 0) throw fd::InvalidArgument("orbit file has no samples");
    if (orbit.states.front().size() != s.dimension) throw fd::ArityError("orbit dimension does not match the problem");
  } else {
    if (o.x0.empty()) throw fd::InvalidArgument("give --orbit or --x0");
    const std::vector<double> x0v = parse_list(o.x0, "--x0");
    if (static_cast<int>(x0v.size()) != s.dimension) throw fd::ArityError("--x0 length does not match dimension");
    fd::IntegratorConfig cfg = s.integrator;
    cfg.escape_radius = o.escape_radius;
    if (o.t) cfg.t_max = *o.t;
    cfg.validate();
    orbit = fd::integrate(s.field(), Eigen::Map<const fd::Vector>(x0v.data(), s.dimension), cfg, dir);
  }
  const fd::GronwallReport r = fd::verify_gronwall_along_orbit(orbit, f, o.c, o.slack);
  if (!o.csv.empty()) {
    auto out = open_out(o.csv);
    fd::write_gronwall_csv(out, r);
  }
  fd::Json j = fd::to_json(r);
  j["slack"] = r.slack;
  j["samples"] = r.times.size();
  j["termination"] = fd::to_string(orbit.termination);
  emit(j, g);
  return 0;
}

int cmd_catalog_list() {
  for (const auto& e : fd::catalog()) std::cout << e.name << '\t' << e.expected.label() << '\n';
  return 0;
}

int cmd_catalog_show(const GlobalOptions& g, const std::string& name) {
  const fd::CatalogEntry& e = fd::catalog_entry(name);
  fd::Json j;
  j["name"] = e.name;
  j["spec"] = fd::to_json(e.spec);
  j["expected_conclusion"] = e.expected.label();
  j["note"] = e.note;
  emit(j, g);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flatdyn: flows, flatness and differential-inequality certificates"};
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--spec", g.spec_path, "problem spec JSON file; inline flags override it");
  app.add_option("--seed", g.seed, "sampler seed (default 42)");
  app.add_option("--tol-hyperbolic", g.tol_hyperbolic, "band on |Re lambda| treated as zero")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--flat-tol", g.flat_tol, "values at or below this count as zero in the flatness probe")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--radius", g.radius, "disc radius (default 1)");
  app.add_option("--json-indent", g.json_indent, "JSON indent; negative for compact output");

  ProblemOptions analyze_p;
  auto* analyze = app.add_subcommand("analyze", "spectrum at the origin and <h(x),x> positivity");
  add_problem_options(analyze, analyze_p, false, false);

  ProblemOptions flow_p;
  FlowOptions flow_o;
  auto* flow = app.add_subcommand("flow", "integrate an orbit and write it as CSV");
  add_problem_options(flow, flow_p, false, false);
  flow->add_option("--x0", flow_o.x0, "initial point, comma separated")->required();
  flow->add_option("--t", flow_o.t, "integration horizon");
  flow->add_option("--direction", flow_o.direction, "forward or backward");
  flow->add_option("--out", flow_o.out, "orbit CSV path");
  flow->add_option("--method", flow_o.method, "rk4 or rk45");
  flow->add_option("--step", flow_o.step, "fixed step (rk4) or initial step (rk45)");
  flow->add_option("--escape-radius", flow_o.escape_radius, "stop when |x| reaches this (default 1000)");

  ProblemOptions certify_p;
  CertifyOptions certify_o;
  auto* certify = app.add_subcommand("certify", "check every hypothesis of the vanishing criterion");
  add_problem_options(certify, certify_p, true, true);
  certify->add_option("--catalog", certify_o.catalog, "use a built-in problem");
  certify->add_option("--rhs", certify_o.rhs, "right-hand side: f (default) or norm");
  certify->add_option("--emit-plot-data", certify_o.plot_dir, "directory for flatness/ratio_sup/witness CSV");
  certify->add_flag("--no-witness", certify_o.no_witness, "skip the lower-bound witness");

  FlatnessOptions flat_o;
  auto* flatness = app.add_subcommand("flatness", "ratios max|f|/r^k over shrinking radii");
  flatness->add_option("--f", flat_o.f, "scalar function");
  flatness->add_option("--dim", flat_o.dim, "dimension (inferred when omitted)")->check(CLI::PositiveNumber);
  flatness->add_option("--catalog-f", flat_o.catalog_f, "take f from a catalog entry");
  flatness->add_option("--radii", flat_o.radii, "comma-separated decreasing radii");
  flatness->add_option("--kmax", flat_o.k_max, "largest power k (default 8)")->check(CLI::NonNegativeNumber);
  flatness->add_option("--directions", flat_o.directions, "number of sampled directions (default 32 n)");
  flatness->add_option("--csv", flat_o.csv, "CSV path (radius,k,ratio)");

  ProblemOptions gron_p;
  GronwallOptions gron_o;
  auto* gronwall = app.add_subcommand("gronwall", "check |f(phi_t)| <= |f(phi_0)| e^{ct} along an orbit");
  add_problem_options(gronwall, gron_p, true, false);
  gronwall->add_option("--orbit", gron_o.orbit_path, "orbit CSV written by `flow --out`");
  gronwall->add_option("--x0", gron_o.x0, "integrate from this point instead");
  gronwall->add_option("--t", gron_o.t, "integration horizon");
  gronwall->add_option("--direction", gron_o.direction, "forward or backward");
  gronwall->add_option("--c", gron_o.c, "growth constant c")->required();
  gronwall->add_option("--slack", gron_o.slack, "allowed excess as a fraction of the bound (default 1e-6)");
  gronwall->add_option("--csv", gron_o.csv, "CSV path (t,observed,bound)");
  gronwall->add_option("--escape-radius", gron_o.escape_radius, "stop when |x| reaches this (default 1000)");

  auto* catalog = app.add_subcommand("catalog", "built-in problems");
  catalog->require_subcommand(1);
  auto* catalog_list = catalog->add_subcommand("list", "names and expected conclusions");
  std::string show_name;
  auto* catalog_show = catalog->add_subcommand("show", "print one entry as JSON");
  catalog_show->add_option("name", show_name)->required();

  for (auto* sub : {analyze, flow, certify, flatness, gronwall, catalog, catalog_list, catalog_show})
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*analyze) return cmd_analyze(g, analyze_p);
    if (*flow) return cmd_flow(g, flow_p, flow_o);
    if (*certify) return cmd_certify(g, certify_p, certify_o);
    if (*flatness) return cmd_flatness(g, flat_o);
    if (*gronwall) return cmd_gronwall(g, gron_p, gron_o);
    if (*catalog_list) return cmd_catalog_list();
    if (*catalog_show) return cmd_catalog_show(g, show_name);
  } catch (const fd::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const fd::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}
