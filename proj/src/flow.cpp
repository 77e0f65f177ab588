#include "flatdyn/flow.hpp"

#include <cmath>
#include <limits>

#include "flatdyn/errors.hpp"
#include "flatdyn/inequality.hpp"

namespace flatdyn {

std::string to_string(Method m) { return m == Method::FixedRK4 ? "FixedRK4" : "AdaptiveRK45"; }
std::string to_string(Direction d) { return d == Direction::Forward ? "Forward" : "Backward"; }

std::string to_string(Termination t) {
  switch (t) {
    case Termination::ReachedTMax: return "ReachedTMax";
    case Termination::ConvergedToSingularity: return "ConvergedToSingularity";
    case Termination::LeftDomain: return "LeftDomain";
    case Termination::StepUnderflow: return "StepUnderflow";
  }
  return "unknown";
}

Method method_from_string(const std::string& s) {
  if (s == "FixedRK4" || s == "rk4") return Method::FixedRK4;
  if (s == "AdaptiveRK45" || s == "rk45") return Method::AdaptiveRK45;
  throw InvalidArgument("unknown integration method '" + s + "'");
}

Direction direction_from_string(const std::string& s) {
  if (s == "Forward" || s == "forward") return Direction::Forward;
  if (s == "Backward" || s == "backward") return Direction::Backward;
  throw InvalidArgument("unknown direction '" + s + "'");
}

Termination termination_from_string(const std::string& s) {
  for (auto t : {Termination::ReachedTMax, Termination::ConvergedToSingularity, Termination::LeftDomain,
                 Termination::StepUnderflow})
    if (to_string(t) == s) return t;
  throw InvalidArgument("unknown termination '" + s + "'");
}

std::string to_string(IntervalEnd::Kind k) {
  switch (k) {
    case IntervalEnd::Kind::Escaped: return "Escaped";
    case IntervalEnd::Kind::Unbounded: return "Unbounded";
    case IntervalEnd::Kind::Horizon: return "Horizon";
    case IntervalEnd::Kind::Underflow: return "Underflow";
  }
  return "unknown";
}

void IntegratorConfig::validate() const {
  const auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument(std::string(name) + " must be positive");
  };
  positive(step, "step");
  positive(t_max, "t_max");
  positive(escape_radius, "escape_radius");
  positive(convergence_radius, "convergence_radius");
  if (method == Method::AdaptiveRK45) {
    positive(rel_tol, "rel_tol");
    positive(abs_tol, "abs_tol");
    positive(min_step, "min_step");
    positive(max_step, "max_step");
    if (!(min_step < max_step)) throw InvalidArgument("min_step must be below max_step");
  }
  if (convergence_dwell < 1) throw InvalidArgument("convergence_dwell must be at least 1");
}

namespace {

class Rhs {
public:
  Rhs(const VectorField& field, Direction direction)
      : field_(field), sign_(direction == Direction::Forward ? 1.0 : -1.0) {}
  Vector operator()(const Vector& x) const { return sign_ * field_(x); }

private:
  const VectorField& field_;
  double sign_;
};

Vector rk4_step(const Rhs& f, const Vector& x, double h) {
  const Vector k1 = f(x);
  const Vector k2 = f(x + 0.5 * h * k1);
  const Vector k3 = f(x + 0.5 * h * k2);
  const Vector k4 = f(x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

struct EmbeddedStep {
  Vector next;  // fifth-order solution
  Vector error;
};

// Runge-Kutta-Fehlberg 4(5), advancing with the fifth-order weights.
EmbeddedStep rkf45_step(const Rhs& f, const Vector& x, double h) {
  const Vector k1 = f(x);
  const Vector k2 = f(x + h * (0.25 * k1));
  const Vector k3 = f(x + h * (3.0 / 32.0 * k1 + 9.0 / 32.0 * k2));
  const Vector k4 = f(x + h * (1932.0 / 2197.0 * k1 - 7200.0 / 2197.0 * k2 + 7296.0 / 2197.0 * k3));
  const Vector k5 = f(x + h * (439.0 / 216.0 * k1 - 8.0 * k2 + 3680.0 / 513.0 * k3 - 845.0 / 4104.0 * k4));
  const Vector k6 = f(x + h * (-8.0 / 27.0 * k1 + 2.0 * k2 - 3544.0 / 2565.0 * k3 + 1859.0 / 4104.0 * k4 -
                               11.0 / 40.0 * k5));
  EmbeddedStep out;
  out.next = x + h * (16.0 / 135.0 * k1 + 6656.0 / 12825.0 * k3 + 28561.0 / 56430.0 * k4 - 9.0 / 50.0 * k5 +
                      2.0 / 55.0 * k6);
  out.error = h * (1.0 / 360.0 * k1 - 128.0 / 4275.0 * k3 - 2197.0 / 75240.0 * k4 + 1.0 / 50.0 * k5 +
                   2.0 / 55.0 * k6);
  return out;
}

double error_norm(const Vector& err, const Vector& x, const Vector& y, double rel_tol, double abs_tol) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double scale = abs_tol + rel_tol * std::max(std::abs(x(i)), std::abs(y(i)));
    worst = std::max(worst, std::abs(err(i)) / scale);
  }
  return worst;
}

// Counts consecutive accepted states within `radius` of one Newton-located singular point.
class ConvergenceTracker {
public:
  ConvergenceTracker(const VectorField& field, double radius, int dwell)
      : field_(field), radius_(radius), dwell_(dwell) {}

  bool update(const Vector& state) {
    if (anchor_ && (state - *anchor_).norm() <= radius_) {
      ++count_;
    } else {
      anchor_ = locate(state);
      count_ = anchor_ ? 1 : 0;
    }
    return count_ >= dwell_;
  }

  const std::optional<Vector>& anchor() const { return anchor_; }

private:
  std::optional<Vector> locate(const Vector& state) const {
    try {
      const Vector value = field_(state);
      if (value.norm() == 0.0) return state;
      const Matrix j = jacobian_at(field_, state);
      const Eigen::PartialPivLU<Matrix> lu(j);
      const double scale = j.cwiseAbs().maxCoeff();
      if (!(scale > 0.0) || lu.matrixLU().diagonal().cwiseAbs().minCoeff() <= 1e-14 * scale) return std::nullopt;
      const Vector displacement = lu.solve(value);
      if (!(displacement.norm() <= radius_)) return std::nullopt;
      const double tol = 1e-15 + 1e-6 * radius_ * scale;
      Vector a = find_singularity(field_, state, 20, tol);
      if ((state - a).norm() <= radius_) return a;
    } catch (const NumericalError&) {
    }
    return std::nullopt;
  }

  const VectorField& field_;
  double radius_;
  int dwell_;
  std::optional<Vector> anchor_;
  int count_ = 0;
};

// Shrinks a step that crossed the escape sphere so it lands just outside it.
template <typename StepFn>
std::pair<double, Vector> locate_crossing(StepFn&& step, double h, const Vector& crossed, double radius,
                                          double t) {
  double lo = 0.0;
  double hi = h;
  Vector hi_state = crossed;
  const double tol = 1e-14 * (1.0 + t);
  for (int i = 0; i < 200 && hi - lo > tol; ++i) {
    const double mid = 0.5 * (lo + hi);
    Vector s;
    try {
      s = step(mid);
    } catch (const DomainError&) {
      hi = mid;
      continue;
    }
    if (s.norm() >= radius) {
      hi = mid;
      hi_state = std::move(s);
    } else {
      lo = mid;
    }
  }
  return {hi, hi_state};
}

}  // namespace

Orbit integrate(const VectorField& field, const Eigen::Ref<const Vector>& x0, const IntegratorConfig& config,
                Direction direction) {
  config.validate();
  if (x0.size() != field.dimension()) throw ArityError("x0 length does not match field dimension");
  if (!(x0.norm() < config.escape_radius))
    throw InvalidArgument("initial point lies outside the escape radius");

  const Rhs rhs(field, direction);
  Orbit orbit;
  orbit.direction = direction;
  orbit.times.push_back(0.0);
  orbit.states.emplace_back(x0);

  ConvergenceTracker tracker(field, config.convergence_radius, config.convergence_dwell);
  const auto finish_if_converged = [&]() {
    if (!tracker.update(orbit.states.back())) return false;
    orbit.termination = Termination::ConvergedToSingularity;
    orbit.singular_point = tracker.anchor();
    return true;
  };
  if (finish_if_converged()) return orbit;

  double t = 0.0;
  Vector x = x0;
  double h = config.method == Method::FixedRK4 ? config.step : std::min(config.step, config.max_step);
  std::size_t fixed_index = 0;

  while (t < config.t_max) {
    Vector next;
    double taken = 0.0;
    if (config.method == Method::FixedRK4) {
      ++fixed_index;
      const double t_next = std::min(config.t_max, static_cast<double>(fixed_index) * config.step);
      taken = t_next - t;
      next = rk4_step(rhs, x, taken);
    } else {
      const double trial = std::min(h, config.t_max - t);
      EmbeddedStep s;
      double err;
      try {
        s = rkf45_step(rhs, x, trial);
        err = error_norm(s.error, x, s.next, config.rel_tol, config.abs_tol);
      } catch (const DomainError&) {
        // A stage left the field's domain (e.g. overflow near a blow-up): reject and shrink.
        err = std::numeric_limits<double>::infinity();
      }
      const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      if (!(err <= 1.0) || !s.next.allFinite()) {
        h = trial * (std::isfinite(factor) ? factor : 0.2);
        if (h < config.min_step) {
          orbit.termination = Termination::StepUnderflow;
          return orbit;
        }
        continue;
      }
      taken = trial;
      next = s.next;
      // Keep the controller's step when the horizon clamp shortened this one.
      h = std::min(config.max_step, std::max(h, trial) * factor);
    }

    if (next.norm() >= config.escape_radius) {
      const auto step_fn = [&](double hh) -> Vector {
        return config.method == Method::FixedRK4 ? rk4_step(rhs, x, hh) : rkf45_step(rhs, x, hh).next;
      };
      auto [dt, state] = locate_crossing(step_fn, taken, next, config.escape_radius, t);
      orbit.times.push_back(t + dt);
      orbit.states.push_back(std::move(state));
      orbit.termination = Termination::LeftDomain;
      return orbit;
    }

    t = config.method == Method::FixedRK4 ? std::min(config.t_max, static_cast<double>(fixed_index) * config.step)
                                          : t + taken;
    x = std::move(next);
    orbit.times.push_back(t);
    orbit.states.push_back(x);
    if (finish_if_converged()) return orbit;
  }
  orbit.termination = Termination::ReachedTMax;
  return orbit;
}

MaximalInterval maximal_interval_estimate(const VectorField& field, const Eigen::Ref<const Vector>& x0,
                                          const IntegratorConfig& config) {
  const auto end_of = [&](Direction d) {
    const Orbit orbit = integrate(field, x0, config, d);
    const double sign = d == Direction::Forward ? 1.0 : -1.0;
    switch (orbit.termination) {
      case Termination::LeftDomain:
        return IntervalEnd{IntervalEnd::Kind::Escaped, sign * orbit.times.back()};
      case Termination::ConvergedToSingularity:
        return IntervalEnd{IntervalEnd::Kind::Unbounded, sign * std::numeric_limits<double>::infinity()};
      case Termination::ReachedTMax:
        return IntervalEnd{IntervalEnd::Kind::Horizon, sign * orbit.times.back()};
      case Termination::StepUnderflow:
        break;
    }
    return IntervalEnd{IntervalEnd::Kind::Underflow, sign * orbit.times.back()};
  };
  return {end_of(Direction::Backward), end_of(Direction::Forward)};
}

SinkRateFit fit_sink_rate(const Orbit& orbit, const Eigen::Ref<const Vector>& a, const SinkFitOptions& options) {
  if (orbit.termination != Termination::ConvergedToSingularity)
    throw PreconditionFailed("sink-rate fit needs an orbit that converged to a singularity, got " +
                             to_string(orbit.termination));
  const double d0 = (orbit.states.front() - a).norm();
  if (d0 == 0.0) throw DegenerateOrbit("orbit starts at the sink; no decay to fit");

  SinkRateFit fit;
  std::vector<double> ts, logs;
  const auto start = static_cast<std::size_t>(std::floor(options.transient_fraction * orbit.size()));
  for (std::size_t k = start; k < orbit.size(); ++k) {
    const double d = (orbit.states[k] - a).norm();
    if (d == 0.0) {
      ++fit.excluded_at_anchor;
      continue;
    }
    if (d <= options.noise_floor) continue;
    ts.push_back(orbit.times[k]);
    logs.push_back(std::log(d));
    fit.used_indices.push_back(k);
  }
  fit.samples_used = static_cast<int>(ts.size());
  if (fit.samples_used < options.min_samples)
    throw InsufficientSamples("sink-rate fit has " + std::to_string(fit.samples_used) + " usable samples (" +
                              std::to_string(fit.excluded_at_anchor) + " exactly at the sink), needs " +
                              std::to_string(options.min_samples));

  const double n = static_cast<double>(ts.size());
  double mt = 0.0, ml = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    mt += ts[i];
    ml += logs[i];
  }
  mt /= n;
  ml /= n;
  double stt = 0.0, stl = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    stt += (ts[i] - mt) * (ts[i] - mt);
    stl += (ts[i] - mt) * (logs[i] - ml);
  }
  if (!(stt > 0.0)) throw DegenerateOrbit("fit samples share one time value");
  const double slope = stl / stt;
  const double intercept = ml - slope * mt;
  fit.lambda = -slope;
  if (!(fit.lambda > 0.0)) throw DegenerateOrbit("distance to the sink does not decay exponentially");

  double worst = -std::numeric_limits<double>::infinity();
  double sq = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double residual = logs[i] - (intercept + slope * ts[i]);
    sq += residual * residual;
    worst = std::max(worst, logs[i] + fit.lambda * ts[i]);
  }
  fit.rms_log_residual = std::sqrt(sq / n);
  // Smallest theta for which the bound holds on every sample used.
  fit.theta = std::exp(worst) / d0;
  // exp/log round-trips can land one ulp low; nudge until every sample is covered.
  for (std::size_t i = 0; i < ts.size(); ++i)
    while ((orbit.states[fit.used_indices[i]] - a).norm() > fit.theta * std::exp(-fit.lambda * ts[i]) * d0)
      fit.theta = std::nextafter(fit.theta, std::numeric_limits<double>::infinity());
  return fit;
}

PositivityReport lyapunov_check(const VectorField& field, const ParsedFunction& v, double radius,
                                const Sampler& sampler) {
  if (v.arity() != field.dimension()) throw ArityError("Lyapunov candidate arity does not match field dimension");
  const DerivationalOperator derivative(field, v);
  const double v0 = v(Vector::Zero(field.dimension()));

  PositivityReport report;
  report.min_value = std::numeric_limits<double>::infinity();
  for (const auto& band : sample_punctured_disc(field.dimension(), radius, sampler)) {
    for (const auto& x : band.points) {
      if (v(x) < v0) throw PreconditionFailed("V(0) is not a minimum over the sampled disc");
      const double value = -derivative(x);
      ++report.samples_checked;
      if (value < report.min_value || (value == report.min_value && lexicographic_less(x, report.attaining_point))) {
        report.min_value = value;
        report.attaining_point = x;
      }
    }
  }
  report.verdict = report.min_value > 0.0;
  return report;
}

}  // namespace flatdyn
