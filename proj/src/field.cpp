#include "flatdyn/field.hpp"

#include <cmath>
#include <limits>

#include "flatdyn/eigen_qr.hpp"
#include "flatdyn/errors.hpp"

namespace flatdyn {

VectorField::VectorField(std::vector<ParsedFunction> components) : components_(std::move(components)) {
  const int n = dimension();
  if (n < 1) throw InvalidArgument("vector field needs at least one component");
  partials_.resize(n);
  for (int i = 0; i < n; ++i) {
    if (components_[i].arity() != n)
      throw ArityError("component " + std::to_string(i + 1) + " has arity " +
                       std::to_string(components_[i].arity()) + ", field dimension is " +
                       std::to_string(n));
    for (int j = 1; j <= n; ++j) partials_[i].push_back(differentiate(components_[i], j));
  }
}

VectorField VectorField::parse(const std::vector<std::string>& components) {
  std::vector<ParsedFunction> parsed;
  const int n = static_cast<int>(components.size());
  for (const auto& text : components) parsed.push_back(flatdyn::parse(text, n));
  return VectorField(std::move(parsed));
}

Vector VectorField::operator()(const Eigen::Ref<const Vector>& point) const {
  if (point.size() != dimension())
    throw ArityError("point has length " + std::to_string(point.size()) + ", field dimension is " +
                     std::to_string(dimension()));
  Vector out(dimension());
  for (int i = 0; i < dimension(); ++i) out(i) = components_[i](point);
  return out;
}

VectorField VectorField::scaled(double factor) const {
  std::vector<ParsedFunction> out;
  for (const auto& c : components_)
    out.emplace_back(c.arity(), simplify(Expr::constant(factor) * c.body()));
  return VectorField(std::move(out));
}

std::string to_string(Classification c) {
  switch (c) {
    case Classification::HyperbolicSink: return "HyperbolicSink";
    case Classification::HyperbolicSource: return "HyperbolicSource";
    case Classification::HyperbolicSaddle: return "HyperbolicSaddle";
    case Classification::NonHyperbolic: return "NonHyperbolic";
  }
  return "unknown";
}

Matrix jacobian_at(const VectorField& field, const Eigen::Ref<const Vector>& point) {
  const int n = field.dimension();
  if (point.size() != n) throw ArityError("point length does not match field dimension");
  Matrix j(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) j(r, c) = field.partial(r, c)(point);
  if (!j.allFinite()) throw DomainError("Jacobian has non-finite entries");
  return j;
}

std::vector<std::complex<double>> eigenvalues(const Matrix& m) { return flatdyn::eigenvalues<double>(m); }

SpectrumReport spectrum_report(const std::vector<std::complex<double>>& values, double tol) {
  SpectrumReport report;
  report.eigenvalues = values;
  report.tolerance_used = tol;
  report.min_real_part = std::numeric_limits<double>::infinity();
  report.max_real_part = -std::numeric_limits<double>::infinity();
  bool any_zero = false;
  for (const auto& v : values) {
    report.min_real_part = std::min(report.min_real_part, v.real());
    report.max_real_part = std::max(report.max_real_part, v.real());
    any_zero = any_zero || std::abs(v.real()) <= tol;
  }
  if (any_zero)
    report.classification = Classification::NonHyperbolic;
  else if (report.max_real_part < -tol)
    report.classification = Classification::HyperbolicSink;
  else if (report.min_real_part > tol)
    report.classification = Classification::HyperbolicSource;
  else
    report.classification = Classification::HyperbolicSaddle;
  return report;
}

SpectrumReport classify_singularity(const VectorField& field, const Eigen::Ref<const Vector>& point,
                                    double tol) {
  const double residual = field(point).norm();
  if (!(residual <= tol)) throw NotASingularity(residual);
  return spectrum_report(eigenvalues(jacobian_at(field, point)), tol);
}

Vector find_singularity(const VectorField& field, const Eigen::Ref<const Vector>& guess, int max_iter,
                        double tol) {
  Vector p = guess;
  for (int iter = 0;; ++iter) {
    const Vector value = field(p);
    if (value.norm() <= tol) return p;
    if (iter >= max_iter)
      throw ConvergenceError("Newton iteration did not reach |X(p)| <= tol in " +
                             std::to_string(max_iter) + " steps (|X(p)| = " +
                             std::to_string(value.norm()) + ")");
    const Matrix j = jacobian_at(field, p);
    const Eigen::PartialPivLU<Matrix> lu(j);
    const double scale = j.cwiseAbs().maxCoeff();
    const double pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (!(scale > 0.0) || pivot <= 1e-14 * scale) throw SingularJacobian("Jacobian is singular at Newton iterate");
    const Vector step = lu.solve(value);
    if (!step.allFinite()) throw SingularJacobian("Newton step is not finite");
    p -= step;
  }
}

PositivityReport inner_product_positivity(const VectorField& field, double radius, const Sampler& sampler) {
  PositivityReport report;
  report.min_value = std::numeric_limits<double>::infinity();
  for (const auto& band : sample_punctured_disc(field.dimension(), radius, sampler)) {
    for (const auto& x : band.points) {
      const double v = field(x).dot(x);
      ++report.samples_checked;
      if (v < report.min_value ||
          (v == report.min_value && lexicographic_less(x, report.attaining_point))) {
        report.min_value = v;
        report.attaining_point = x;
      }
    }
  }
  report.verdict = report.min_value > 0.0;
  return report;
}

}  // namespace flatdyn
