#include <doctest.h>

#include <cmath>
#include <random>

#include "flatdyn/certifier.hpp"
#include "flatdyn/errors.hpp"
#include "flatdyn/problem.hpp"

using namespace flatdyn;

namespace {

Vector pt(std::initializer_list<double> v) {
  Vector x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) x(i++) = d;
  return x;
}

std::string norm_power(int m) {
  switch (m) {
    case 1: return "sqrt(x1^2 + x2^2)";
    case 2: return "x1^2 + x2^2";
    case 3: return "(x1^2 + x2^2)^1.5";
    default: return "(x1^2 + x2^2)^2";
  }
}

}  // namespace

TEST_CASE("flatness probe examples") {
  const auto bump = parse("exp(-1/(x1^2))", 1).with_origin_value(0.0);
  const auto r = flatness_probe(bump, {0.5, 0.2, 0.1}, 8);
  CHECK(r.overall_verdict());
  CHECK(r.ratio_table(2, 8) == doctest::Approx(std::exp(-100.0) / 1e-8).epsilon(1e-12));
  CHECK(r.ratio_table(2, 8) == doctest::Approx(3.72e-36).epsilon(1e-3));
  CHECK(r.directions == 2);

  const auto lin = flatness_probe(parse("x1", 1), default_flatness_radii(1.0));
  CHECK(lin.verdict(0));
  CHECK_FALSE(lin.verdict(1));
  for (Eigen::Index i = 0; i < lin.ratio_table.rows(); ++i) CHECK(lin.ratio_table(i, 1) == doctest::Approx(1.0));
  CHECK_FALSE(lin.overall_verdict());

  const auto zero = flatness_probe(parse("0", 2), default_flatness_radii(1.0));
  CHECK(zero.overall_verdict());
  CHECK(zero.ratio_table.cwiseAbs().maxCoeff() == 0.0);
  CHECK(zero.directions == 64);

  const auto cube = flatness_probe(parse("x1^3", 1), default_flatness_radii(1.0), 5);
  for (int k = 0; k <= 5; ++k) CHECK(cube.verdict(k) == (k <= 2));

  CHECK_THROWS_AS(flatness_probe(bump, {0.5, 0.2}), InvalidArgument);
  CHECK_THROWS_AS(flatness_probe(bump, {0.1, 0.2, 0.3}), InvalidArgument);
}

TEST_CASE("flatness ladder for |x|^m") {
  for (int m = 1; m <= 4; ++m) {
    const auto r = flatness_probe(parse(norm_power(m), 2), default_flatness_radii(1.0));
    for (int k = 0; k <= r.k_max; ++k) CHECK_MESSAGE(r.verdict(k) == (k < m), "m=" << m << " k=" << k);
  }
}

TEST_CASE("flatness verdict is tri-state") {
  // max|f| at r = 0.1, 0.05, 0.02: 2.5e-3, 1e-6, 9.01e-4; every column dips then rises.
  const auto r = flatness_probe(parse("(abs(x1) - 0.05)^2 + 1e-6", 1), {0.2, 0.1, 0.05, 0.02}, 3);
  for (auto v : r.verdicts) CHECK(v == FlatnessVerdict::Inconclusive);
  CHECK(r.overall == FlatnessVerdict::Inconclusive);
  CHECK_FALSE(r.overall_verdict());

  // One NotFlat column outweighs the rest.
  const auto mixed = flatness_probe(parse("x1^2", 1), {0.2, 0.1, 0.05}, 3);
  CHECK(mixed.overall == FlatnessVerdict::NotFlat);
  CHECK(to_string(FlatnessVerdict::NotFlat) == "NotFlat");
}

TEST_CASE("lower-bound witness: equality cases") {
  const auto h = VectorField::parse({"x1"});
  {
    const auto w = lower_bound_witness(h, parse("x1^2", 1), pt({0.5}), 2.0);
    CHECK(w.lambda == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(w.exponent == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(w.k_const == doctest::Approx(1.0).epsilon(1e-2));
    CHECK(w.min_margin >= -1e-6);
    CHECK(w.q.norm() <= 0.1);
    CHECK(w.checked_points > 10);
  }
  {
    const auto w = lower_bound_witness(h, parse("x1^4", 1), pt({0.5}), 4.0);
    CHECK(w.exponent == doctest::Approx(4.0).epsilon(1e-3));
    CHECK(w.k_const == doctest::Approx(1.0).epsilon(1e-2));
    CHECK(w.min_margin >= -1e-6);
  }
  {
    // (2 + 4x^2)/(1 + x^2) increases in |x|, so its orbit sup is attained at p.
    const double c = (2.0 + 4.0 * 0.25) / (1.0 + 0.25);
    const auto w = lower_bound_witness(h, parse("x1^2 + x1^4", 1), pt({0.5}), c);
    CHECK(w.orbit_ratio_sup == doctest::Approx(c).epsilon(1e-12));
    CHECK(w.min_margin >= -1e-7);
    for (std::size_t k = 0; k < w.times.size(); ++k) CHECK(w.rhs[k] - w.lhs[k] >= -1e-7);
  }
  CHECK_THROWS_AS(lower_bound_witness(h, parse("x1^2", 1), pt({0.5}), 1.5), PreconditionFailed);
  CHECK_THROWS_AS(lower_bound_witness(h, parse("-x1^2", 1), pt({0.5}), 2.0), PreconditionFailed);
  CHECK_THROWS_AS(lower_bound_witness(VectorField::parse({"-x1"}), parse("x1^2", 1), pt({0.5}), 2.0),
                  WitnessUnavailable);
  CHECK_THROWS_AS(lower_bound_witness(h, parse("x1^2", 1), pt({2.0}), 2.0), PreconditionFailed);
}

TEST_CASE("conclusion labels round-trip") {
  for (const std::string label : {"MustVanish", "Inconclusive", "HypothesisFailed(spectrum)",
                                  "HypothesisFailed(inner_product)", "HypothesisFailed(constant)",
                                  "HypothesisFailed(flatness)"})
    CHECK(Conclusion::from_label(label).label() == label);
  CHECK_THROWS_AS(Conclusion::from_label("HypothesisFailed(other)"), InvalidArgument);
}

TEST_CASE("certify examples") {
  {
    const auto cert = certify_gs(VectorField::parse({"x1", "x2"}), parse("0", 2), 1.0);
    CHECK(cert.conclusion.label() == "MustVanish");
    CHECK(cert.f_sup_on_domain == 0.0);
    CHECK_FALSE(cert.witness);
  }
  {
    const auto cert = certify_gs(VectorField::parse({"x1"}), parse("exp(-1/(x1^2))", 1).with_origin_value(0.0), 1.0);
    CHECK(cert.conclusion.label() == "HypothesisFailed(constant)");
    CHECK(cert.spectrum_passed);
    CHECK(cert.hypothesis_inner_product.verdict);
    CHECK(cert.hypothesis_flatness.overall_verdict());
    // The sup of X.f/f grows as the bands shrink.
    const auto& sups = cert.hypothesis_constant.estimate.per_radius_sup;
    CHECK(*sups[3].sup > *sups[0].sup);
  }
  {
    const auto cert = certify_gs(VectorField::parse({"x2", "-x1"}), parse("x1^2 + x2^2", 2), 1.0);
    CHECK(cert.conclusion.label() == "HypothesisFailed(spectrum)");
    // All hypotheses are still evaluated.
    CHECK_FALSE(cert.hypothesis_inner_product.verdict);
  }
  {
    CertifyConfig cfg;
    cfg.c = 1.9;
    const auto cert = certify_gs(VectorField::parse({"x1"}), parse("x1^2", 1), 1.0, cfg);
    CHECK(cert.conclusion.label() == "HypothesisFailed(constant)");
    CHECK(cert.hypothesis_constant.c_from_user);
  }
  {
    const auto cert = certify_gs(VectorField::parse({"x1"}), parse("x1^2", 1), 1.0);
    CHECK(cert.conclusion.label() == "HypothesisFailed(flatness)");
    REQUIRE(cert.witness);
    CHECK(cert.witness->exponent == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(cert.witness->min_margin >= -1e-6);
  }
  {
    CertifyConfig cfg;
    cfg.rhs = RhsMode::Norm;
    const auto cert =
        certify_gs(VectorField::parse({"x1"}), parse("exp(-1/(x1^2))", 1).with_origin_value(0.0), 1.0, cfg);
    CHECK(cert.conclusion.kind == Conclusion::Kind::Inconclusive);
    CHECK(cert.hypothesis_constant.passed);
  }
  CHECK_THROWS_AS(certify_gs(VectorField::parse({"x1"}), parse("x1", 1), -1.0), InvalidArgument);
  CHECK_THROWS_AS(certify_gs(VectorField::parse({"x1"}), parse("x1 + x2", 2), 1.0), ArityError);
}

TEST_CASE("certify is deterministic for a seed") {
  CertifyConfig cfg;
  cfg.sampler.seed = 9;
  const auto h = VectorField::parse({"x1 + x2^2", "x2"});
  const auto f = parse("x1^2 + x2^2", 2);
  const auto a = certify_gs(h, f, 0.5, cfg);
  const auto b = certify_gs(h, f, 0.5, cfg);
  CHECK(a.hypothesis_constant.estimate.c_hat == b.hypothesis_constant.estimate.c_hat);
  CHECK(a.hypothesis_inner_product.min_value == b.hypothesis_inner_product.min_value);
  CHECK(a.conclusion == b.conclusion);
}

TEST_CASE("catalog: every entry reaches its expected conclusion") {
  for (const auto& e : catalog()) {
    CertifyConfig cfg;
    cfg.sampler.seed = e.spec.seed;
    const auto cert = certify_gs(e.spec.field(), e.spec.function(), e.spec.radius, cfg);
    CHECK_MESSAGE(cert.conclusion == e.expected, e.name << ": " << cert.conclusion.label());
    const bool all_pass = cert.spectrum_passed && cert.hypothesis_inner_product.verdict &&
                          cert.hypothesis_constant.passed && cert.hypothesis_flatness.overall_verdict();
    CHECK_FALSE((all_pass && cert.f_sup_on_domain > 1e-12));
  }
}

TEST_CASE("property: certify dichotomy on random source fields with non-flat f") {
  // f = polynomial with a nonzero low-order term is never flat; the certifier must
  // never say MustVanish for it.
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  for (int trial = 0; trial < 12; ++trial) {
    const std::string a = format_number(u(rng)), b = format_number(u(rng));
    const auto h = VectorField::parse({a + "*x1 + x2^2", b + "*x2"});
    const auto f = parse("x1^2 + " + format_number(u(rng)) + "*x2^2", 2);
    CertifyConfig cfg;
    cfg.compute_witness = false;
    const auto cert = certify_gs(h, f, 0.5, cfg);
    CHECK(cert.conclusion.kind != Conclusion::Kind::MustVanish);
  }
}

TEST_CASE("one-variable check") {
  const auto grid = uniform_grid(0.0, 1.0, 1001);
  CHECK(grid.front() == 0.0);
  CHECK(grid.back() == 1.0);
  {
    const auto r = theorem1_check(parse("x1^3", 1), 3.0, grid);
    CHECK(r.inequality_holds);
    CHECK(r.max_ratio == doctest::Approx(3.0));
    REQUIRE(r.right_isolated_zero);
    CHECK(*r.right_isolated_zero == 0.0);
    REQUIRE(r.delta);
    CHECK(*r.delta == 1.0);
    CHECK(r.lower_bound_holds);
    REQUIRE(r.flatness);
    CHECK(*r.flatness == FlatnessVerdict::NotFlat);
    CHECK_FALSE(r.contradiction);
  }
  {
    const auto r = theorem1_check(parse("0", 1), 1.0, grid);
    CHECK(r.inequality_holds);
    CHECK_FALSE(r.right_isolated_zero);
  }
  {
    const auto r = theorem1_check(parse("exp(-1/(x1^2))", 1).with_origin_value(0.0), 10.0, grid);
    CHECK_FALSE(r.inequality_holds);
    REQUIRE(r.worst_x);
    CHECK(*r.worst_x < std::sqrt(0.2) + 1e-3);
    CHECK_FALSE(r.contradiction);
  }
  {
    // Zero at x = 0.5 only from the right: f = (x - 0.5)^2 on [0.5, 1] has x f' / f = 2x/(x - 0.5).
    const auto r = theorem1_check(parse("(x1 - 0.5)^2", 1), 2.0, grid);
    REQUIRE(r.right_isolated_zero);
    CHECK(*r.right_isolated_zero == doctest::Approx(0.5));
    CHECK_FALSE(r.inequality_holds);
  }
  CHECK_THROWS_AS(theorem1_check(parse("x1", 1), 1.0, {0.0, 2.0}), InvalidArgument);
  CHECK_THROWS_AS(theorem1_check(parse("x1", 2), 1.0, grid), ArityError);
}
