#include "flatdyn/sampling.hpp"

#include <cmath>
#include <random>

#include "flatdyn/errors.hpp"

namespace flatdyn {

std::vector<double> log_spaced(double outer, double inner, int count) {
  if (!(outer > 0.0) || !(inner > 0.0) || count < 1)
    throw InvalidArgument("log_spaced needs positive bounds and count >= 1");
  if (count == 1) return {outer};
  std::vector<double> out(static_cast<std::size_t>(count));
  const double lo = std::log(outer);
  const double hi = std::log(inner);
  for (int i = 0; i < count; ++i) out[i] = std::exp(lo + (hi - lo) * i / (count - 1));
  out.front() = outer;
  out.back() = inner;
  return out;
}

std::vector<Vector> sample_directions(int dimension, int count, std::uint64_t seed) {
  if (dimension < 1) throw InvalidArgument("dimension must be positive");
  if (dimension == 1) return {Vector::Constant(1, 1.0), Vector::Constant(1, -1.0)};

  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 2 * dimension)));
  for (int i = 0; i < dimension; ++i) {
    out.push_back(Vector::Unit(dimension, i));
    out.push_back(-Vector::Unit(dimension, i));
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  while (static_cast<int>(out.size()) < count) {
    Vector d(dimension);
    for (int i = 0; i < dimension; ++i) d(i) = gauss(rng);
    const double norm = d.norm();
    if (norm > 1e-8) out.push_back(d / norm);
  }
  return out;
}

std::vector<RadialBand> sample_punctured_disc(int dimension, double radius, const Sampler& sampler) {
  if (!(radius > 0.0)) throw InvalidArgument("radius must be positive");
  const std::vector<double> radii =
      sampler.radii.empty()
          ? log_spaced(radius, radius * sampler.inner_fraction, sampler.radial_count)
          : sampler.radii;

  std::vector<RadialBand> bands;
  bands.reserve(radii.size());
  const int count = sampler.directions_per_dim * dimension;
  std::uint64_t band_seed = sampler.seed;
  for (double r : radii) {
    if (!(r > 0.0)) throw InvalidArgument("sample radii must be positive");
    RadialBand band{r, {}};
    for (const Vector& d : sample_directions(dimension, count, band_seed++)) band.points.push_back(r * d);
    bands.push_back(std::move(band));
  }
  return bands;
}

bool lexicographic_less(const Vector& a, const Vector& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

}  // namespace flatdyn
