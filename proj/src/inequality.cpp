#include "flatdyn/inequality.hpp"

#include <cmath>
#include <limits>

#include "flatdyn/errors.hpp"

namespace flatdyn {

DerivationalOperator::DerivationalOperator(VectorField field, ParsedFunction f)
    : field_(std::move(field)), f_(std::move(f)) {
  if (f_.arity() != field_.dimension())
    throw ArityError("function arity " + std::to_string(f_.arity()) + " does not match field dimension " +
                     std::to_string(field_.dimension()));
  for (int i = 1; i <= f_.arity(); ++i) gradient_.push_back(differentiate(f_, i));
}

double DerivationalOperator::operator()(const Eigen::Ref<const Vector>& point) const {
  const Vector x = field_(point);
  double sum = 0.0;
  for (int i = 0; i < field_.dimension(); ++i) {
    // A zero component contributes nothing even where the partial is undefined.
    if (x(i) == 0.0) continue;
    sum += x(i) * gradient_[i](point);
  }
  if (!std::isfinite(sum)) throw DomainError("X.f is not finite");
  return sum;
}

double derive_along(const VectorField& field, const ParsedFunction& f, const Eigen::Ref<const Vector>& point) {
  return DerivationalOperator(field, f)(point);
}

std::string to_string(RhsMode mode) { return mode == RhsMode::FunctionValue ? "f" : "norm"; }

RhsMode rhs_mode_from_string(const std::string& s) {
  if (s == "f") return RhsMode::FunctionValue;
  if (s == "norm") return RhsMode::Norm;
  throw InvalidArgument("unknown right-hand side '" + s + "' (expected f or norm)");
}

InequalityEstimate collect_inequality_samples(const VectorField& field, const ParsedFunction& f, double radius,
                                              const Sampler& sampler, double floor, RhsMode rhs) {
  const DerivationalOperator d(field, f);
  InequalityEstimate est;
  est.rhs = rhs;
  bool have_best = false;

  for (const auto& band : sample_punctured_disc(field.dimension(), radius, sampler)) {
    RadiusSup band_sup{band.radius, std::nullopt};
    for (const auto& x : band.points) {
      DerivativeSample s;
      s.point = x;
      s.f_value = f(x);
      s.xf_value = d(x);
      const double denom = rhs == RhsMode::FunctionValue ? std::abs(s.f_value) : x.norm();
      ++est.samples;
      if (denom < floor) {
        s.flagged = std::abs(s.xf_value) >= floor;
        if (s.flagged) ++est.flagged;
        continue;
      }
      s.ratio = std::abs(s.xf_value) / denom;
      ++est.valid;
      if (!band_sup.sup || *s.ratio > *band_sup.sup) band_sup.sup = s.ratio;
      if (!have_best || *s.ratio > est.c_hat ||
          (*s.ratio == est.c_hat && lexicographic_less(x, est.attaining.point))) {
        est.c_hat = *s.ratio;
        est.attaining = s;
        have_best = true;
      }
    }
    est.per_radius_sup.push_back(band_sup);
  }
  return est;
}

InequalityEstimate estimate_inequality_constant(const VectorField& field, const ParsedFunction& f, double radius,
                                                const Sampler& sampler, double floor, RhsMode rhs) {
  InequalityEstimate est = collect_inequality_samples(field, f, radius, sampler, floor, rhs);
  if (est.valid == 0)
    throw NoValidSamples("no sample admits a finite ratio |X.f|/rhs (" + std::to_string(est.flagged) +
                         " flagged of " + std::to_string(est.samples) + ")");
  return est;
}

namespace {

template <typename Beta>
std::vector<double> gronwall_bound_impl(double u0, Beta&& beta, const std::vector<double>& times) {
  if (times.empty()) return {};
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1])) throw InvalidArgument("Gronwall time grid must be strictly increasing");

  std::vector<double> out(times.size(), 0.0);
  if (u0 == 0.0) return out;
  double integral = 0.0;
  out[0] = u0;
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double a = times[k - 1];
    const double h = (times[k] - a) / 4.0;
    integral += h / 3.0 *
                (beta(a) + 4.0 * beta(a + h) + 2.0 * beta(a + 2.0 * h) + 4.0 * beta(a + 3.0 * h) + beta(times[k]));
    out[k] = u0 * std::exp(integral);
  }
  return out;
}

}  // namespace

std::vector<double> gronwall_bound(double u0, double beta, const std::vector<double>& times) {
  // Constant beta integrates exactly; skip Simpson so the bound is u0 e^{beta (t - a)} to rounding.
  if (times.empty()) return {};
  std::vector<double> out = gronwall_bound_impl(u0, [beta](double) { return beta; }, times);
  if (u0 != 0.0)
    for (std::size_t k = 1; k < times.size(); ++k) out[k] = u0 * std::exp(beta * (times[k] - times[0]));
  return out;
}

std::vector<double> gronwall_bound(double u0, const ParsedFunction& beta, const std::vector<double>& times) {
  if (beta.arity() != 1) throw ArityError("beta must be a function of one variable (t = x1)");
  Vector t(1);
  return gronwall_bound_impl(
      u0,
      [&](double s) {
        t(0) = s;
        return beta(t);
      },
      times);
}

GronwallReport verify_gronwall_along_orbit(const Orbit& orbit, const ParsedFunction& f, double c, double slack) {
  if (orbit.size() == 0) throw InvalidArgument("empty orbit");
  GronwallReport report;
  report.c = c;
  report.slack = slack;
  report.times = orbit.times;
  report.observed.reserve(orbit.size());
  for (const auto& s : orbit.states) report.observed.push_back(f(s));
  report.bound = gronwall_bound(std::abs(report.observed.front()), c, orbit.times);
  report.max_violation = -std::numeric_limits<double>::infinity();
  report.verdict = true;
  for (std::size_t k = 0; k < orbit.size(); ++k) {
    const double excess = std::abs(report.observed[k]) - report.bound[k];
    report.max_violation = std::max(report.max_violation, excess);
    // Relative to the bound, so a zero bound admits nothing but zero.
    if (excess > slack * report.bound[k]) report.verdict = false;
  }
  return report;
}

RadialSubstitution radial_substitution(const ParsedFunction& f, double x0, double delta, int grid_size) {
  if (f.arity() != 1) throw ArityError("radial substitution needs a function of one variable");
  if (!(x0 > 0.0) || !(delta > 0.0)) throw InvalidArgument("x0 and delta must be positive");
  if (grid_size < 2) throw InvalidArgument("grid_size must be at least 2");

  const ParsedFunction fprime = differentiate(f, 1);
  const double t_end = std::log((x0 + delta) / x0);
  const double fd_step = 1e-5;
  Vector x(1);
  const auto u_at = [&](double t) {
    x(0) = x0 * std::exp(t);
    return f(x);
  };

  RadialSubstitution out;
  for (int i = 0; i < grid_size; ++i) {
    const double t = t_end * i / (grid_size - 1);
    out.t.push_back(t);
    out.u.push_back(u_at(t));
    out.du_numeric.push_back((u_at(t + fd_step) - u_at(t - fd_step)) / (2.0 * fd_step));
    x(0) = x0 * std::exp(t);
    out.x_fprime.push_back(x(0) * fprime(x));
    out.max_discrepancy = std::max(out.max_discrepancy, std::abs(out.du_numeric.back() - out.x_fprime.back()));
  }
  return out;
}

double chain_rule_check(const VectorField& field, const ParsedFunction& f, const Orbit& orbit) {
  if (orbit.size() < 3) throw InsufficientSamples("chain-rule check needs at least 3 orbit samples");
  const DerivationalOperator d(field, f);
  const double sign = orbit.direction == Direction::Forward ? 1.0 : -1.0;

  std::vector<double> g;
  g.reserve(orbit.size());
  for (const auto& s : orbit.states) g.push_back(f(s));

  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < orbit.size(); ++k) {
    const double h1 = orbit.times[k] - orbit.times[k - 1];
    const double h2 = orbit.times[k + 1] - orbit.times[k];
    const double dg = -h2 / (h1 * (h1 + h2)) * g[k - 1] + (h2 - h1) / (h1 * h2) * g[k] +
                      h1 / (h2 * (h1 + h2)) * g[k + 1];
    worst = std::max(worst, std::abs(dg - sign * d(orbit.states[k])));
  }
  return worst;
}

}  // namespace flatdyn
