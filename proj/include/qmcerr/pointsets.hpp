#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qmcerr/core_types.hpp"

namespace qmcerr {

/// Composite midpoint nodes {(2j-1)/(2n) : j = 1..n}, increasing.
PointSet midpoint_1d(int n);

/// 2D digitally shifted Hammersley set with 2^m points. The coordinates are
/// dyadic rationals with denominator 2^m, built in exact integer arithmetic.
/// sigma must hold exactly m bits; the all-zero shift gives the classical set.
PointSet hammersley_2d(int m, std::span<const int> sigma);

/// Deterministic shift with floor(m/2) zeros (zeros first, then ones).
std::vector<int> balanced_sigma(int m);

/// True iff both 1D projections of a 2D set equal {j/n : j = 0..n-1} as sets.
/// Exact comparison, tolerance zero.
bool is_projection_regular(const PointSet& ps);

/// Uniform pseudo-random points in [0,1)^d, reproducible per seed.
/// Generator: std::mt19937_64 seeded with `seed`; each coordinate is
/// (next() >> 11) * 2^-53, drawn point by point, axis by axis.
PointSet random_pointset(int d, int n, std::uint64_t seed);

}  // namespace qmcerr
