#pragma once

#include <cstdint>
#include <vector>

#include "flatdyn/types.hpp"

namespace flatdyn {

/// Point-set protocol for probing a punctured disc around the origin.
///
/// Radii are `radial_count` log-spaced values in [radius * inner_fraction, radius]
/// (largest first) unless `radii` is given explicitly. At each radius,
/// `directions_per_dim * n` unit directions are used: the 2n coordinate
/// directions followed by normalized Gaussian draws from a fixed-seed generator.
/// In one dimension the directions are exactly {+1, -1}.
struct Sampler {
  int radial_count = 16;
  double inner_fraction = 1e-3;
  int directions_per_dim = 64;
  std::uint64_t seed = 42;
  std::vector<double> radii;
};

/// `count` log-spaced values from `outer` down to `inner` (inclusive, decreasing).
std::vector<double> log_spaced(double outer, double inner, int count);

/// Unit directions in R^n; deterministic for a fixed seed.
std::vector<Vector> sample_directions(int dimension, int count, std::uint64_t seed);

struct RadialBand {
  double radius;
  std::vector<Vector> points;
};

/// Bands of sample points, ordered by decreasing radius.
std::vector<RadialBand> sample_punctured_disc(int dimension, double radius, const Sampler& sampler);

/// Lexicographic order on vectors of equal length; used for deterministic tie-breaks.
bool lexicographic_less(const Vector& a, const Vector& b);

}  // namespace flatdyn
