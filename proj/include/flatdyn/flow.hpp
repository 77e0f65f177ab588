#pragma once

#include <optional>
#include <string>
#include <vector>

#include "flatdyn/expr.hpp"
#include "flatdyn/field.hpp"
#include "flatdyn/sampling.hpp"
#include "flatdyn/types.hpp"

namespace flatdyn {

enum class Method { FixedRK4, AdaptiveRK45 };
enum class Direction { Forward, Backward };
enum class Termination { ReachedTMax, ConvergedToSingularity, LeftDomain, StepUnderflow };

std::string to_string(Method m);
std::string to_string(Direction d);
std::string to_string(Termination t);
Method method_from_string(const std::string& s);
Direction direction_from_string(const std::string& s);
Termination termination_from_string(const std::string& s);

struct IntegratorConfig {
  Method method = Method::AdaptiveRK45;
  double step = 1e-3;  // FixedRK4 step, and the initial step for AdaptiveRK45
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double min_step = 1e-12;
  double max_step = 0.1;
  double t_max = 100.0;
  double escape_radius = 1.0;
  double convergence_radius = 1e-7;
  int convergence_dwell = 8;

  /// Throws InvalidArgument when a field is out of range.
  void validate() const;
};

/// Samples of a solution curve. `times` are elapsed times (always increasing
/// from 0); a Backward orbit follows x' = -X(x).
struct Orbit {
  std::vector<double> times;
  std::vector<Vector> states;
  Direction direction = Direction::Forward;
  Termination termination = Termination::ReachedTMax;
  /// Set when termination == ConvergedToSingularity.
  std::optional<Vector> singular_point;

  std::size_t size() const noexcept { return times.size(); }
  const Vector& final_state() const { return states.back(); }
};

Orbit integrate(const VectorField& field, const Eigen::Ref<const Vector>& x0, const IntegratorConfig& config,
                Direction direction = Direction::Forward);

/// One end of a maximal interval estimate.
struct IntervalEnd {
  enum class Kind {
    Escaped,    // orbit left the domain at `time`
    Unbounded,  // orbit converged to a singularity: the end is +-infinity
    Horizon,    // integration horizon reached; the end is beyond `time`
    Underflow,  // adaptive step underflow at `time`
  };
  Kind kind;
  double time;  // signed: negative for the backward end
};

std::string to_string(IntervalEnd::Kind k);

struct MaximalInterval {
  IntervalEnd t_minus;
  IntervalEnd t_plus;
};

MaximalInterval maximal_interval_estimate(const VectorField& field, const Eigen::Ref<const Vector>& x0,
                                          const IntegratorConfig& config);

/// Empirical constants of |phi_t(x0) - a| <= theta e^{-lambda t} |x0 - a|.
struct SinkRateFit {
  double theta = 0.0;
  double lambda = 0.0;
  double rms_log_residual = 0.0;
  int samples_used = 0;
  int excluded_at_anchor = 0;
  /// Indices into the orbit of the samples used for the fit.
  std::vector<std::size_t> used_indices;
};

struct SinkFitOptions {
  double transient_fraction = 0.2;
  /// Samples with |phi_t - a| at or below this are dropped (10 x convergence radius).
  double noise_floor = 1e-6;
  int min_samples = 10;
};

SinkRateFit fit_sink_rate(const Orbit& orbit, const Eigen::Ref<const Vector>& a, const SinkFitOptions& options = {});

/// Samples -X.V over the punctured disc; verdict true iff X.V < 0 everywhere.
/// Throws PreconditionFailed when V(0) exceeds V at some sample.
PositivityReport lyapunov_check(const VectorField& field, const ParsedFunction& v, double radius,
                                const Sampler& sampler = {});

}  // namespace flatdyn
