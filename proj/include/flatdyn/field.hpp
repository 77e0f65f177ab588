#pragma once

#include <complex>
#include <string>
#include <vector>

#include "flatdyn/expr.hpp"
#include "flatdyn/sampling.hpp"
#include "flatdyn/types.hpp"

namespace flatdyn {

/// A vector field X = (P1, ..., Pn) on R^n. Symbolic partials of every
/// component are built once at construction.
class VectorField {
public:
  explicit VectorField(std::vector<ParsedFunction> components);

  /// Parses comma-free component strings at arity = components.size().
  static VectorField parse(const std::vector<std::string>& components);

  int dimension() const noexcept { return static_cast<int>(components_.size()); }
  const std::vector<ParsedFunction>& components() const noexcept { return components_; }
  /// d(component i)/d(x_{j+1}), both 0-based.
  const ParsedFunction& partial(int i, int j) const { return partials_.at(i).at(j); }

  Vector operator()(const Eigen::Ref<const Vector>& point) const;

  /// Multiplies every component by `factor` (used for Y = -h).
  VectorField scaled(double factor) const;

private:
  std::vector<ParsedFunction> components_;
  std::vector<std::vector<ParsedFunction>> partials_;
};

enum class Classification { HyperbolicSink, HyperbolicSource, HyperbolicSaddle, NonHyperbolic };

std::string to_string(Classification c);

struct SpectrumReport {
  std::vector<std::complex<double>> eigenvalues;
  double min_real_part = 0.0;
  double max_real_part = 0.0;
  Classification classification = Classification::NonHyperbolic;
  double tolerance_used = 0.0;
};

/// Minimum of a scalar probe over sample points; verdict = (min_value > 0).
/// For `inner_product_positivity` the probe is <h(x), x>; for `lyapunov_check`
/// it is -X.V.
struct PositivityReport {
  int samples_checked = 0;
  double min_value = 0.0;
  Vector attaining_point;
  bool verdict = false;
};

inline constexpr double kDefaultHyperbolicTolerance = 1e-9;

/// Row i is the gradient of component i, from the symbolic partials.
Matrix jacobian_at(const VectorField& field, const Eigen::Ref<const Vector>& point);

/// Eigenvalues sorted by descending real part (ties: descending imaginary part).
std::vector<std::complex<double>> eigenvalues(const Matrix& m);

/// Applies the hyperbolicity rule with band `tol` on |Re lambda|.
SpectrumReport spectrum_report(const std::vector<std::complex<double>>& eigenvalues, double tol);

/// Requires |field(point)| <= tol, else throws NotASingularity.
SpectrumReport classify_singularity(const VectorField& field, const Eigen::Ref<const Vector>& point,
                                    double tol = kDefaultHyperbolicTolerance);

/// Newton iteration p <- p - J^{-1} field(p) until |field(p)| <= tol.
Vector find_singularity(const VectorField& field, const Eigen::Ref<const Vector>& guess,
                        int max_iter = 50, double tol = 1e-12);

/// Samples <h(x), x> over the punctured disc of the given radius.
PositivityReport inner_product_positivity(const VectorField& field, double radius,
                                          const Sampler& sampler = {});

}  // namespace flatdyn
