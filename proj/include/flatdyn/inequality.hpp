#pragma once

#include <optional>
#include <string>
#include <vector>

#include "flatdyn/expr.hpp"
#include "flatdyn/field.hpp"
#include "flatdyn/flow.hpp"
#include "flatdyn/sampling.hpp"

namespace flatdyn {

/// D(f) = X.f = sum_i P_i df/dx_i, with the gradient of f built symbolically once.
class DerivationalOperator {
public:
  DerivationalOperator(VectorField field, ParsedFunction f);

  double operator()(const Eigen::Ref<const Vector>& point) const;

  const VectorField& field() const noexcept { return field_; }
  const ParsedFunction& function() const noexcept { return f_; }

private:
  VectorField field_;
  ParsedFunction f_;
  std::vector<ParsedFunction> gradient_;
};

double derive_along(const VectorField& field, const ParsedFunction& f, const Eigen::Ref<const Vector>& point);

/// Right-hand side of the inequality |X.f| <= c * rhs.
/// FunctionValue is the form the vanishing theorems use; Norm (|x|) is exploratory only.
enum class RhsMode { FunctionValue, Norm };

std::string to_string(RhsMode mode);
RhsMode rhs_mode_from_string(const std::string& s);

inline constexpr double kDefaultRatioFloor = 1e-300;

struct DerivativeSample {
  Vector point;
  double f_value = 0.0;
  double xf_value = 0.0;
  /// |X.f| / rhs; empty when rhs < floor.
  std::optional<double> ratio;
  /// rhs < floor while |X.f| >= floor: the inequality cannot hold here.
  bool flagged = false;
};

struct RadiusSup {
  double radius;
  std::optional<double> sup;  // empty when the band has no finite ratio
};

struct InequalityEstimate {
  RhsMode rhs = RhsMode::FunctionValue;
  double c_hat = 0.0;
  DerivativeSample attaining;
  int flagged = 0;
  int valid = 0;
  int samples = 0;
  std::vector<RadiusSup> per_radius_sup;  // decreasing radius
};

/// Same sampling as `estimate_inequality_constant` but never throws NoValidSamples;
/// `valid == 0` signals that no finite ratio was formed.
InequalityEstimate collect_inequality_samples(const VectorField& field, const ParsedFunction& f, double radius,
                                              const Sampler& sampler = {}, double floor = kDefaultRatioFloor,
                                              RhsMode rhs = RhsMode::FunctionValue);

/// c_hat = sup of finite ratios; throws NoValidSamples when none exists.
InequalityEstimate estimate_inequality_constant(const VectorField& field, const ParsedFunction& f, double radius,
                                                const Sampler& sampler = {}, double floor = kDefaultRatioFloor,
                                                RhsMode rhs = RhsMode::FunctionValue);

/// u0 * exp(int_{times[0]}^{t} beta), integral by composite Simpson with each
/// grid interval split into 4.
std::vector<double> gronwall_bound(double u0, double beta, const std::vector<double>& times);
std::vector<double> gronwall_bound(double u0, const ParsedFunction& beta, const std::vector<double>& times);

struct GronwallReport {
  double c = 0.0;
  double slack = 0.0;  // relative to the bound
  std::vector<double> times;
  std::vector<double> observed;
  std::vector<double> bound;
  double max_violation = 0.0;
  bool verdict = false;
};

/// Two-sided check |f(phi_t)| <= (1 + slack) |f(phi_0)| e^{ct} along the orbit.
GronwallReport verify_gronwall_along_orbit(const Orbit& orbit, const ParsedFunction& f, double c,
                                           double slack = 1e-6);

struct RadialSubstitution {
  std::vector<double> t;
  std::vector<double> u;
  std::vector<double> du_numeric;  // central difference of u(t) = f(x0 e^t)
  std::vector<double> x_fprime;    // x0 e^t f'(x0 e^t)
  double max_discrepancy = 0.0;
};

/// Samples u(t) = f(x0 e^t) on [0, ln((x0 + delta)/x0)] and compares u' with x f'(x).
RadialSubstitution radial_substitution(const ParsedFunction& f, double x0, double delta, int grid_size = 101);

/// Max over interior samples of |d/dt f(phi_t) - X.f(phi_t)|, with the time
/// derivative from a three-point (non-uniform) centered difference.
double chain_rule_check(const VectorField& field, const ParsedFunction& f, const Orbit& orbit);

}  // namespace flatdyn
