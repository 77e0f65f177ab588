#pragma once

#include <optional>
#include <string>
#include <vector>

#include "flatdyn/expr.hpp"
#include "flatdyn/field.hpp"
#include "flatdyn/flow.hpp"
#include "flatdyn/inequality.hpp"
#include "flatdyn/sampling.hpp"

namespace flatdyn {

enum class FlatnessVerdict { Flat, NotFlat, Inconclusive };

std::string to_string(FlatnessVerdict v);

/// Ratios max_d |f(r d)| / r^k over a decreasing list of radii, k = 0..k_max.
///
/// Per-k protocol on the last three radii r1 > r2 > r3 with column entries a1, a2, a3:
///   Flat          all three <= flat_tol, or strictly decreasing with a3 <= a1 sqrt(r3/r1)
///   NotFlat       non-decreasing (within 1e-9 relative), or decreasing slower than sqrt(r)
///   Inconclusive  otherwise (the column is not monotone)
struct FlatnessReport {
  std::vector<double> radii;
  int k_max = 0;
  int directions = 0;
  double flat_tol = 0.0;
  Matrix ratio_table;  // rows: radii, cols: k = 0..k_max
  std::vector<FlatnessVerdict> verdicts;
  FlatnessVerdict overall = FlatnessVerdict::Inconclusive;

  bool verdict(int k) const { return verdicts.at(k) == FlatnessVerdict::Flat; }
  bool overall_verdict() const { return overall == FlatnessVerdict::Flat; }
};

inline constexpr double kDefaultFlatTolerance = 1e-12;

/// 12 log-spaced radii from `radius` down to radius * 1e-3.
std::vector<double> default_flatness_radii(double radius);

FlatnessReport flatness_probe(const ParsedFunction& f, const std::vector<double>& radii, int k_max = 8,
                              int directions = 0, double flat_tol = kDefaultFlatTolerance, std::uint64_t seed = 42);

/// Empirical form of the lower bound k |phi_t(q)|^{c/lambda} <= f(phi_t(q)).
struct WitnessBound {
  Vector p;
  Vector q;
  double c = 0.0;
  double lambda = 0.0;
  double theta = 0.0;
  double exponent = 0.0;  // c / lambda
  double k_const = 0.0;   // f(q) / |q|^{c/lambda}
  double orbit_ratio_sup = 0.0;
  int checked_points = 0;
  double min_margin = 0.0;
  // Series from q toward the sink: elapsed time since q, k|phi|^{c/lambda}, f(phi).
  std::vector<double> times;
  std::vector<double> lhs;
  std::vector<double> rhs;
};

struct WitnessConfig {
  double radius = 1.0;
  double neighborhood_fraction = 0.1;
  IntegratorConfig integrator;
  double tol_hyperbolic = kDefaultHyperbolicTolerance;
  double floor = kDefaultRatioFloor;
};

/// Follows the backward orbit of h from p (the forward orbit of Y = -h) into the
/// origin, fits lambda on it, anchors at the first state q with
/// |q| <= radius * neighborhood_fraction, and checks the bound on every state
/// from q onward.
WitnessBound lower_bound_witness(const VectorField& h, const ParsedFunction& f, const Eigen::Ref<const Vector>& p,
                                 double c, const WitnessConfig& config = {});

struct Conclusion {
  enum class Kind { MustVanish, HypothesisFailed, Inconclusive };
  Kind kind = Kind::Inconclusive;
  std::string hypothesis;  // for HypothesisFailed: spectrum | inner_product | constant | flatness
  std::string reason;

  /// "MustVanish", "HypothesisFailed(constant)", "Inconclusive".
  std::string label() const;
  static Conclusion from_label(const std::string& label);
  bool operator==(const Conclusion& o) const { return kind == o.kind && hypothesis == o.hypothesis; }
};

struct ConstantHypothesis {
  InequalityEstimate estimate;
  double c_used = 0.0;
  bool c_from_user = false;
  bool passed = false;
};

struct CertifyConfig {
  double tol_hyperbolic = kDefaultHyperbolicTolerance;
  double flat_tol = kDefaultFlatTolerance;
  Sampler sampler;
  std::optional<double> c;
  double floor = kDefaultRatioFloor;
  RhsMode rhs = RhsMode::FunctionValue;
  std::vector<double> flatness_radii;  // empty: default_flatness_radii(radius)
  int k_max = 8;
  int flatness_directions_per_dim = 32;
  /// Relative allowance when comparing sampled ratios against c.
  double constant_rel_slack = 1e-9;
  IntegratorConfig integrator;  // escape radius is replaced by 1.001 x the disc radius
  bool compute_witness = true;
};

struct GsCertificate {
  double radius = 0.0;
  RhsMode rhs = RhsMode::FunctionValue;
  std::uint64_t seed = 0;
  double flat_tol = 0.0;
  SpectrumReport hypothesis_spectrum;
  bool spectrum_passed = false;
  PositivityReport hypothesis_inner_product;
  ConstantHypothesis hypothesis_constant;
  FlatnessReport hypothesis_flatness;
  Conclusion conclusion;
  double f_sup_on_domain = 0.0;
  std::optional<WitnessBound> witness;
  std::string witness_note;
};

/// Checks, in order, spectrum (origin must be a hyperbolic source), <h(x),x> > 0,
/// |h.grad f| <= c|f|, and flatness of f at 0, then draws the conclusion.
/// MustVanish additionally requires the sampled sup of |f| to be <= flat_tol;
/// the Norm right-hand side never yields MustVanish.
GsCertificate certify_gs(const VectorField& h, const ParsedFunction& f, double radius, const CertifyConfig& config = {});

struct Theorem1Report {
  double c = 0.0;
  std::optional<double> right_isolated_zero;
  bool inequality_holds = true;
  double max_ratio = 0.0;  // max of |x f'(x)| / |f(x)| where |f| >= floor
  std::optional<double> worst_x;
  /// Set when the isolated zero is at 0: the right end of the nonzero run.
  std::optional<double> delta;
  bool lower_bound_holds = true;
  std::optional<std::pair<double, double>> lower_bound_violation;  // (x, f(delta)(x/delta)^C)
  std::optional<FlatnessVerdict> flatness;
  /// Inequality, lower bound and flatness all hold at once: impossible for a
  /// nonzero f, so this being true signals a numerical problem.
  bool contradiction = false;
};

/// `grid` must be increasing within [0, 1].
Theorem1Report theorem1_check(const ParsedFunction& f, double c, const std::vector<double>& grid,
                              double floor = kDefaultRatioFloor);

std::vector<double> uniform_grid(double lo, double hi, int count);

}  // namespace flatdyn
