#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <complex>
#include <random>

#include "flatdyn/eigen_qr.hpp"
#include "flatdyn/errors.hpp"
#include "flatdyn/field.hpp"
#include "flatdyn/sampling.hpp"

using namespace flatdyn;
using cd = std::complex<double>;

namespace {

Vector pt(std::initializer_list<double> v) {
  Vector x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) x(i++) = d;
  return x;
}

/// Smallest singular value of (m - lambda I): an eigenvector residual with |v| = 1.
double eigen_residual(const Matrix& m, cd lambda) {
  const Eigen::MatrixXcd a = m.cast<cd>() - lambda * Eigen::MatrixXcd::Identity(m.rows(), m.cols());
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a);
  return svd.singularValues().minCoeff();
}

VectorField linear_field(const Matrix& a) {
  std::vector<std::string> comps;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    std::string s = "0";
    for (Eigen::Index j = 0; j < a.cols(); ++j) s += " + (" + format_number(a(i, j)) + ") * x" + std::to_string(j + 1);
    comps.push_back(s);
  }
  return VectorField::parse(comps);
}

}  // namespace

TEST_CASE("jacobian examples") {
  const auto id3 = VectorField::parse({"x1", "x2", "x3"});
  CHECK(jacobian_at(id3, pt({0.3, -1.0, 2.0})).isApprox(Matrix::Identity(3, 3)));

  const auto rot = VectorField::parse({"x2", "-x1"});
  Matrix expected(2, 2);
  expected << 0, 1, -1, 0;
  CHECK(jacobian_at(rot, pt({0.0, 0.0})) == expected);

  const auto cubic = VectorField::parse({"x1^3"});
  const double j = jacobian_at(cubic, pt({2.0}))(0, 0);
  const double fd = (std::pow(2.0 + 1e-5, 3) - std::pow(2.0 - 1e-5, 3)) / 2e-5;
  CHECK(j == doctest::Approx(12.0));
  CHECK(std::abs(j - fd) < 1e-6);

  CHECK_THROWS_AS(jacobian_at(VectorField::parse({"abs(x1)"}), pt({0.0})), DomainError);
  CHECK_THROWS_AS(VectorField::parse({"x1", "x3"}), ArityError);
}

TEST_CASE("eigenvalue examples") {
  auto ev = eigenvalues(Matrix::Identity(3, 3));
  REQUIRE(ev.size() == 3);
  for (auto z : ev) CHECK(std::abs(z - cd(1.0, 0.0)) < 1e-12);

  Matrix rot(2, 2);
  rot << 0, 1, -1, 0;
  ev = eigenvalues(rot);
  CHECK(std::abs(ev[0] - cd(0, 1)) < 1e-15);
  CHECK(std::abs(ev[1] - cd(0, -1)) < 1e-15);

  ev = eigenvalues(Matrix::Zero(2, 2));
  CHECK(ev[0] == cd(0, 0));
  CHECK(ev[1] == cd(0, 0));

  CHECK_THROWS_AS(eigenvalues(Matrix(0, 0)), InvalidArgument);
}

TEST_CASE("property: eigenvalues agree with an independent solver and satisfy residual, trace, det") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 400; ++trial) {
    const int n = 1 + trial % 6;
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = g(rng) * (trial % 3 == 0 ? 10.0 : 1.0);
    const auto ev = eigenvalues(m);
    REQUIRE(ev.size() == static_cast<std::size_t>(n));
    const double scale = 1.0 + m.norm();

    for (const auto& z : ev) CHECK(eigen_residual(m, z) <= 1e-8 * scale);

    cd sum = 0, prod = 1;
    for (const auto& z : ev) {
      sum += z;
      prod *= z;
    }
    CHECK(std::abs(sum - m.trace()) <= 1e-8 * (1.0 + std::abs(m.trace())));
    if (n <= 3) CHECK(std::abs(prod - m.determinant()) <= 1e-8 * (1.0 + std::abs(m.determinant())) * scale);

    // Ordering: descending real part, ties by descending imaginary part.
    for (std::size_t k = 1; k < ev.size(); ++k) {
      const bool ordered = ev[k - 1].real() > ev[k].real() ||
                           (ev[k - 1].real() == ev[k].real() && ev[k - 1].imag() >= ev[k].imag());
      CHECK(ordered);
    }

    // Independent oracle: each reference eigenvalue is matched by one of ours.
    Eigen::EigenSolver<Matrix> ref(m, false);
    std::vector<bool> used(ev.size(), false);
    for (Eigen::Index k = 0; k < n; ++k) {
      const cd r = ref.eigenvalues()(k);
      double best = 1e300;
      std::size_t best_i = 0;
      for (std::size_t i = 0; i < ev.size(); ++i)
        if (!used[i] && std::abs(ev[i] - r) < best) {
          best = std::abs(ev[i] - r);
          best_i = i;
        }
      used[best_i] = true;
      CHECK(best <= 1e-7 * scale);
    }
  }
}

TEST_CASE("eigenvalues templated on scalar") {
  Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic> m(3, 3);
  m << 2, 1, 0, 1, 3, 1, 0, 1, 4;
  const auto ev = flatdyn::eigenvalues<long double>(m);
  long double sum = 0;
  for (const auto& z : ev) sum += z.real();
  CHECK(static_cast<double>(sum) == doctest::Approx(9.0));
}

TEST_CASE("classification examples") {
  const Vector o2 = Vector::Zero(2);
  CHECK(classify_singularity(VectorField::parse({"x1", "x2"}), o2).classification == Classification::HyperbolicSource);
  CHECK(classify_singularity(VectorField::parse({"-x1", "-x2"}), o2).classification == Classification::HyperbolicSink);
  CHECK(classify_singularity(VectorField::parse({"x2", "-x1"}), o2).classification == Classification::NonHyperbolic);
  CHECK(classify_singularity(VectorField::parse({"x1", "-x2"}), o2).classification == Classification::HyperbolicSaddle);
  CHECK(classify_singularity(VectorField::parse({"x1^3"}), Vector::Zero(1)).classification ==
        Classification::NonHyperbolic);

  const auto rep = classify_singularity(VectorField::parse({"x1", "x2"}), o2, 1e-6);
  CHECK(rep.tolerance_used == 1e-6);
  CHECK(rep.min_real_part <= rep.max_real_part);

  try {
    classify_singularity(VectorField::parse({"x1 - 1"}), Vector::Zero(1));
    FAIL("expected NotASingularity");
  } catch (const NotASingularity& e) {
    CHECK(e.residual_norm() == doctest::Approx(1.0));
  }
}

TEST_CASE("property: classification is invariant under positive scaling") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> s(0.01, 100.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 4;
    Matrix a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = g(rng);
    const auto field = linear_field(a);
    const double factor = s(rng);
    const Vector o = Vector::Zero(n);
    CHECK(classify_singularity(field, o).classification ==
          classify_singularity(field.scaled(factor), o).classification);
    // Linear field: the Jacobian is the matrix itself.
    CHECK((jacobian_at(field, Vector::Ones(n)) - a).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("spectrum_report boundaries") {
  CHECK(spectrum_report({cd(1e-9, 0)}, 1e-9).classification == Classification::NonHyperbolic);
  CHECK(spectrum_report({cd(2e-9, 0)}, 1e-9).classification == Classification::HyperbolicSource);
  CHECK(spectrum_report({cd(-2e-9, 0), cd(-1, 0)}, 1e-9).classification == Classification::HyperbolicSink);
}

TEST_CASE("find_singularity") {
  CHECK(find_singularity(VectorField::parse({"x1"}), pt({0.7})).norm() <= 1e-10);
  CHECK(find_singularity(VectorField::parse({"x1 - 1"}), pt({3.0}))(0) == doctest::Approx(1.0).epsilon(1e-12));
  const auto cubic = VectorField::parse({"x1^3 - x1"});
  CHECK(std::abs(find_singularity(cubic, pt({0.4}))(0)) <= 1e-10);
  CHECK(find_singularity(cubic, pt({1.4}))(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(find_singularity(VectorField::parse({"x1^2 + 1"}), pt({0.0})), SingularJacobian);
  CHECK_THROWS_AS(find_singularity(VectorField::parse({"x1^2 + 1"}), pt({0.5}), 20), ConvergenceError);

  const auto two = VectorField::parse({"x1 + x2 - 3", "x1 - x2 - 1"});
  const Vector r = find_singularity(two, pt({0.0, 0.0}));
  CHECK(r(0) == doctest::Approx(2.0));
  CHECK(r(1) == doctest::Approx(1.0));
  CHECK(two(r).norm() <= 1e-12);
}

TEST_CASE("sampler layout") {
  const Sampler s;
  const auto bands = sample_punctured_disc(2, 2.0, s);
  REQUIRE(bands.size() == 16);
  CHECK(bands.front().radius == doctest::Approx(2.0));
  CHECK(bands.back().radius == doctest::Approx(2e-3));
  for (std::size_t b = 0; b < bands.size(); ++b) {
    CHECK(bands[b].points.size() == 128);
    if (b > 0) CHECK(bands[b].radius < bands[b - 1].radius);
    for (const auto& p : bands[b].points) CHECK(p.norm() == doctest::Approx(bands[b].radius).epsilon(1e-12));
  }
  const auto one = sample_directions(1, 64, 42);
  REQUIRE(one.size() == 2);
  CHECK(one[0](0) * one[1](0) == -1.0);
  // Axis directions are always present.
  const auto three = sample_directions(3, 192, 42);
  int axes = 0;
  for (const auto& d : three)
    if (d.cwiseAbs().maxCoeff() == 1.0) ++axes;
  CHECK(axes >= 6);
  CHECK(sample_directions(3, 30, 9) == sample_directions(3, 30, 9));
}

TEST_CASE("inner product positivity") {
  const auto id = VectorField::parse({"x1", "x2"});
  const auto rep = inner_product_positivity(id, 1.0);
  CHECK(rep.verdict);
  CHECK(rep.min_value == doctest::Approx(1e-6).epsilon(1e-9));
  CHECK(rep.samples_checked == 16 * 128);

  const auto rot = inner_product_positivity(VectorField::parse({"x2", "-x1"}), 1.0);
  CHECK_FALSE(rot.verdict);
  CHECK(std::abs(rot.min_value) <= 1e-15);

  const auto sink = inner_product_positivity(VectorField::parse({"-x1", "-x2"}), 1.0);
  CHECK_FALSE(sink.verdict);
  CHECK(sink.min_value == doctest::Approx(-1.0));

  CHECK_THROWS_AS(inner_product_positivity(id, 0.0), InvalidArgument);

  // Deterministic for a fixed seed.
  Sampler s;
  s.seed = 3;
  const auto a = inner_product_positivity(VectorField::parse({"x1 + 0.3*x2^2", "x2 - x1*x2"}), 0.8, s);
  const auto b = inner_product_positivity(VectorField::parse({"x1 + 0.3*x2^2", "x2 - x1*x2"}), 0.8, s);
  CHECK(a.min_value == b.min_value);
  CHECK(a.attaining_point == b.attaining_point);
}
