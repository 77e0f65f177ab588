#include "flatdyn/certifier.hpp"

#include <cmath>
#include <limits>

#include "flatdyn/errors.hpp"

namespace flatdyn {

std::string to_string(FlatnessVerdict v) {
  switch (v) {
    case FlatnessVerdict::Flat: return "Flat";
    case FlatnessVerdict::NotFlat: return "NotFlat";
    case FlatnessVerdict::Inconclusive: return "Inconclusive";
  }
  return "unknown";
}

std::vector<double> default_flatness_radii(double radius) { return log_spaced(radius, radius * 1e-3, 12); }

namespace {

FlatnessVerdict classify_column(double a1, double a2, double a3, double r1, double r3, double flat_tol) {
  constexpr double rel = 1e-9;
  if (a1 <= flat_tol && a2 <= flat_tol && a3 <= flat_tol) return FlatnessVerdict::Flat;
  const bool dec12 = a2 < a1 * (1.0 - rel);
  const bool dec23 = a3 < a2 * (1.0 - rel);
  if (dec12 && dec23)
    return a3 <= a1 * std::sqrt(r3 / r1) ? FlatnessVerdict::Flat : FlatnessVerdict::NotFlat;
  if (!dec12 && !dec23) return FlatnessVerdict::NotFlat;
  return FlatnessVerdict::Inconclusive;
}

}  // namespace

FlatnessReport flatness_probe(const ParsedFunction& f, const std::vector<double>& radii, int k_max, int directions,
                              double flat_tol, std::uint64_t seed) {
  if (radii.size() < 3) throw InvalidArgument("flatness probe needs at least 3 radii");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0)) throw InvalidArgument("flatness radii must be positive");
    if (i > 0 && !(radii[i] < radii[i - 1])) throw InvalidArgument("flatness radii must be strictly decreasing");
  }
  if (k_max < 0) throw InvalidArgument("k_max must be non-negative");

  const int n = f.arity();
  if (directions <= 0) directions = 32 * n;
  const std::vector<Vector> dirs = sample_directions(n, directions, seed);

  FlatnessReport report;
  report.radii = radii;
  report.k_max = k_max;
  report.directions = static_cast<int>(dirs.size());
  report.flat_tol = flat_tol;
  report.ratio_table = Matrix::Zero(static_cast<Eigen::Index>(radii.size()), k_max + 1);

  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double r = radii[i];
    double worst = 0.0;
    for (const auto& d : dirs) worst = std::max(worst, std::abs(f(r * d)));
    for (int k = 0; k <= k_max; ++k) report.ratio_table(i, k) = worst / std::pow(r, k);
  }

  const auto last = static_cast<Eigen::Index>(radii.size()) - 1;
  bool all_flat = true;
  bool any_not_flat = false;
  for (int k = 0; k <= k_max; ++k) {
    const auto v = classify_column(report.ratio_table(last - 2, k), report.ratio_table(last - 1, k),
                                   report.ratio_table(last, k), radii[last - 2], radii[last], flat_tol);
    report.verdicts.push_back(v);
    all_flat = all_flat && v == FlatnessVerdict::Flat;
    any_not_flat = any_not_flat || v == FlatnessVerdict::NotFlat;
  }
  report.overall = all_flat ? FlatnessVerdict::Flat
                            : (any_not_flat ? FlatnessVerdict::NotFlat : FlatnessVerdict::Inconclusive);
  return report;
}

// ---------------------------------------------------------------------------

WitnessBound lower_bound_witness(const VectorField& h, const ParsedFunction& f, const Eigen::Ref<const Vector>& p,
                                 double c, const WitnessConfig& config) {
  const int n = h.dimension();
  if (f.arity() != n) throw ArityError("function arity does not match field dimension");
  const double fp = f(p);
  if (!(fp > 0.0)) throw PreconditionFailed("witness needs f(p) > 0");

  const Vector origin = Vector::Zero(n);
  const SpectrumReport spectrum = classify_singularity(h, origin, config.tol_hyperbolic);
  if (spectrum.classification != Classification::HyperbolicSource)
    throw WitnessUnavailable("origin is " + to_string(spectrum.classification) + ", not a hyperbolic source");

  if (p.norm() > config.radius * (1.0 + 1e-12)) throw PreconditionFailed("witness point p lies outside the disc");
  IntegratorConfig integrator = config.integrator;
  // p may sit on the boundary sphere; the backward orbit only moves inward.
  integrator.escape_radius = config.radius * 1.001;
  const Orbit orbit = integrate(h, p, integrator, Direction::Backward);
  if (orbit.termination != Termination::ConvergedToSingularity || !orbit.singular_point ||
      orbit.singular_point->norm() > integrator.convergence_radius)
    throw WitnessUnavailable("backward orbit from p did not converge to the origin (" +
                             to_string(orbit.termination) + ")");

  SinkFitOptions fit_options;
  fit_options.noise_floor = 10.0 * integrator.convergence_radius;
  const SinkRateFit fit = fit_sink_rate(orbit, origin, fit_options);

  const double neighborhood = config.radius * config.neighborhood_fraction;
  std::size_t anchor = orbit.size();
  for (std::size_t k = 0; k < orbit.size(); ++k) {
    if (orbit.states[k].norm() <= neighborhood) {
      anchor = k;
      break;
    }
  }
  if (anchor == orbit.size()) throw WitnessUnavailable("orbit never enters the anchor neighborhood");

  const DerivationalOperator d(h, f);
  WitnessBound w;
  w.p = p;
  w.q = orbit.states[anchor];
  w.c = c;
  w.lambda = fit.lambda;
  w.theta = fit.theta;
  for (const auto& s : orbit.states) {
    const double fs = std::abs(f(s));
    if (fs >= config.floor) w.orbit_ratio_sup = std::max(w.orbit_ratio_sup, std::abs(d(s)) / fs);
  }
  if (w.orbit_ratio_sup > c * (1.0 + 1e-9))
    throw PreconditionFailed("c = " + format_number(c) + " is below the ratio sup " +
                             format_number(w.orbit_ratio_sup) + " along the orbit");

  w.exponent = c / fit.lambda;
  const double fq = f(w.q);
  if (!(fq > 0.0)) throw WitnessUnavailable("f vanishes at the anchor point");
  w.k_const = fq / std::pow(w.q.norm(), w.exponent);

  w.min_margin = std::numeric_limits<double>::infinity();
  const double t_anchor = orbit.times[anchor];
  for (std::size_t k = anchor; k < orbit.size(); ++k) {
    const double lhs = w.k_const * std::pow(orbit.states[k].norm(), w.exponent);
    const double rhs = f(orbit.states[k]);
    w.times.push_back(orbit.times[k] - t_anchor);
    w.lhs.push_back(lhs);
    w.rhs.push_back(rhs);
    w.min_margin = std::min(w.min_margin, rhs - lhs);
  }
  w.checked_points = static_cast<int>(w.times.size());
  return w;
}

// ---------------------------------------------------------------------------

std::string Conclusion::label() const {
  switch (kind) {
    case Kind::MustVanish: return "MustVanish";
    case Kind::HypothesisFailed: return "HypothesisFailed(" + hypothesis + ")";
    case Kind::Inconclusive: return "Inconclusive";
  }
  return "unknown";
}

Conclusion Conclusion::from_label(const std::string& label) {
  if (label == "MustVanish") return {Kind::MustVanish, {}, {}};
  if (label == "Inconclusive") return {Kind::Inconclusive, {}, {}};
  const std::string prefix = "HypothesisFailed(";
  if (label.rfind(prefix, 0) == 0 && label.size() > prefix.size() + 1 && label.back() == ')') {
    const std::string name = label.substr(prefix.size(), label.size() - prefix.size() - 1);
    if (name == "spectrum" || name == "inner_product" || name == "constant" || name == "flatness")
      return {Kind::HypothesisFailed, name, {}};
  }
  throw InvalidArgument("unknown conclusion '" + label + "'");
}

GsCertificate certify_gs(const VectorField& h, const ParsedFunction& f, double radius, const CertifyConfig& config) {
  const int n = h.dimension();
  if (f.arity() != n) throw ArityError("function arity does not match field dimension");
  if (!(radius > 0.0)) throw InvalidArgument("radius must be positive");

  GsCertificate cert;
  cert.radius = radius;
  cert.rhs = config.rhs;
  cert.seed = config.sampler.seed;
  cert.flat_tol = config.flat_tol;

  const Vector origin = Vector::Zero(n);
  cert.hypothesis_spectrum = classify_singularity(h, origin, config.tol_hyperbolic);
  cert.spectrum_passed = cert.hypothesis_spectrum.classification == Classification::HyperbolicSource;

  cert.hypothesis_inner_product = inner_product_positivity(h, radius, config.sampler);

  ConstantHypothesis& constant = cert.hypothesis_constant;
  constant.estimate = collect_inequality_samples(h, f, radius, config.sampler, config.floor, config.rhs);
  if (config.c) {
    constant.c_used = *config.c;
    constant.c_from_user = true;
  } else if (constant.estimate.valid > 0) {
    // Largest band only: a sup over all radii would hide divergence as r -> 0.
    const auto& outer = constant.estimate.per_radius_sup.front();
    constant.c_used = outer.sup ? *outer.sup : constant.estimate.c_hat;
  }
  constant.passed = constant.estimate.flagged == 0 &&
                    (constant.estimate.valid == 0 ||
                     constant.estimate.c_hat <= constant.c_used * (1.0 + config.constant_rel_slack));

  const std::vector<double> radii =
      config.flatness_radii.empty() ? default_flatness_radii(radius) : config.flatness_radii;
  cert.hypothesis_flatness =
      flatness_probe(f, radii, config.k_max, config.flatness_directions_per_dim * n, config.flat_tol,
                     config.sampler.seed);

  Vector f_sup_point;
  cert.f_sup_on_domain = 0.0;
  for (const auto& band : sample_punctured_disc(n, radius, config.sampler)) {
    for (const auto& x : band.points) {
      const double v = std::abs(f(x));
      if (f_sup_point.size() == 0 || v > cert.f_sup_on_domain ||
          (v == cert.f_sup_on_domain && lexicographic_less(x, f_sup_point))) {
        cert.f_sup_on_domain = v;
        f_sup_point = x;
      }
    }
  }

  using Kind = Conclusion::Kind;
  if (!cert.spectrum_passed) {
    cert.conclusion = {Kind::HypothesisFailed, "spectrum",
                       "origin is " + to_string(cert.hypothesis_spectrum.classification)};
  } else if (!cert.hypothesis_inner_product.verdict) {
    cert.conclusion = {Kind::HypothesisFailed, "inner_product",
                       "min <h(x),x> = " + format_number(cert.hypothesis_inner_product.min_value)};
  } else if (!constant.passed) {
    cert.conclusion = {Kind::HypothesisFailed, "constant",
                       constant.estimate.flagged > 0
                           ? std::to_string(constant.estimate.flagged) + " samples with f = 0 but X.f != 0"
                           : "sampled ratio sup " + format_number(constant.estimate.c_hat) + " exceeds c = " +
                                 format_number(constant.c_used)};
  } else if (cert.hypothesis_flatness.overall == FlatnessVerdict::NotFlat) {
    cert.conclusion = {Kind::HypothesisFailed, "flatness", "f is not flat at the origin"};
  } else if (cert.hypothesis_flatness.overall == FlatnessVerdict::Inconclusive) {
    cert.conclusion = {Kind::Inconclusive, {}, "flatness ratios are not monotone at the sampled radii"};
  } else if (config.rhs == RhsMode::Norm) {
    cert.conclusion = {Kind::Inconclusive, {}, "the |x| right-hand side carries no vanishing claim"};
  } else if (cert.f_sup_on_domain > config.flat_tol) {
    cert.conclusion = {Kind::Inconclusive, {},
                       "all hypotheses pass but sup|f| = " + format_number(cert.f_sup_on_domain)};
  } else {
    cert.conclusion = {Kind::MustVanish, {}, "all hypotheses pass and f vanishes on the sampled disc"};
  }

  const bool witness_applies = config.compute_witness && config.rhs == RhsMode::FunctionValue &&
                               cert.spectrum_passed && cert.hypothesis_inner_product.verdict && constant.passed &&
                               cert.f_sup_on_domain >= config.floor;
  if (witness_applies) {
    const double sign = f(f_sup_point) > 0.0 ? 1.0 : -1.0;
    std::optional<double> negated_origin;
    if (f.origin_value()) negated_origin = -*f.origin_value();
    const ParsedFunction g = sign > 0.0 ? f : ParsedFunction(n, simplify(-f.body()), {}, negated_origin);
    WitnessConfig wc;
    wc.radius = radius;
    wc.integrator = config.integrator;
    wc.tol_hyperbolic = config.tol_hyperbolic;
    wc.floor = config.floor;
    try {
      cert.witness = lower_bound_witness(h, g, f_sup_point, constant.c_used, wc);
    } catch (const Error& e) {
      cert.witness_note = e.what();
    }
  }
  return cert;
}

// ---------------------------------------------------------------------------

std::vector<double> uniform_grid(double lo, double hi, int count) {
  if (count < 2 || !(hi > lo)) throw InvalidArgument("uniform grid needs count >= 2 and hi > lo");
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out[i] = lo + (hi - lo) * i / (count - 1);
  out.back() = hi;
  return out;
}

Theorem1Report theorem1_check(const ParsedFunction& f, double c, const std::vector<double>& grid, double floor) {
  if (f.arity() != 1) throw ArityError("theorem1_check needs a function of one variable");
  if (grid.size() < 2) throw InvalidArgument("grid needs at least 2 points");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 0.0 || grid[i] > 1.0) throw InvalidArgument("grid must lie in [0, 1]");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw InvalidArgument("grid must be strictly increasing");
  }

  const ParsedFunction fprime = differentiate(f, 1);
  Theorem1Report report;
  report.c = c;
  std::vector<double> values(grid.size());
  Vector x(1);
  double worst_excess = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    x(0) = grid[i];
    values[i] = f(x);
    // x f'(x) = 0 at x = 0 for any C^1 f, even if the symbolic f' is undefined there.
    const double lhs = grid[i] == 0.0 ? 0.0 : std::abs(grid[i] * fprime(x));
    const double rhs = c * std::abs(values[i]);
    bool violated;
    if (std::abs(values[i]) < floor) {
      violated = lhs >= floor;
    } else {
      report.max_ratio = std::max(report.max_ratio, lhs / std::abs(values[i]));
      violated = lhs > rhs * (1.0 + 1e-9);
    }
    if (violated) {
      report.inequality_holds = false;
      const double excess = std::abs(values[i]) < floor ? std::numeric_limits<double>::infinity() : lhs / rhs;
      if (!report.worst_x || excess > worst_excess) {
        worst_excess = excess;
        report.worst_x = grid[i];
      }
    }
  }

  const auto is_zero = [&](double v) { return std::abs(v) < floor; };
  std::size_t zero_index = grid.size();
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    if (is_zero(values[i]) && !is_zero(values[i + 1])) {
      zero_index = i;
      break;
    }
  }
  if (zero_index == grid.size()) return report;
  report.right_isolated_zero = grid[zero_index];
  if (grid[zero_index] != 0.0) return report;

  // f is nonzero on (0, delta]; Gronwall along x e^t gives f(x) >= f(delta) (x/delta)^C there.
  std::size_t end = zero_index + 1;
  while (end + 1 < grid.size() && !is_zero(values[end + 1])) ++end;
  const double delta = grid[end];
  report.delta = delta;
  const double f_delta = std::abs(values[end]);
  for (std::size_t i = zero_index + 1; i <= end; ++i) {
    const double bound = f_delta * std::pow(grid[i] / delta, c);
    if (std::abs(values[i]) < bound * (1.0 - 1e-9)) {
      report.lower_bound_holds = false;
      if (!report.lower_bound_violation) report.lower_bound_violation = std::make_pair(grid[i], bound);
    }
  }

  const FlatnessReport flat = flatness_probe(f, log_spaced(delta, delta * 1e-3, 12),
                                             static_cast<int>(std::ceil(c)) + 1, 2);
  report.flatness = flat.overall;
  report.contradiction = report.inequality_holds && report.lower_bound_holds && flat.overall_verdict();
  return report;
}

}  // namespace flatdyn
