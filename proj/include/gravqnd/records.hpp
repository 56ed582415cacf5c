#pragma once

// Seeded smooth output records a(t): finite Fourier series with
// uniformly drawn coefficients, rescaled so max|a| equals the requested
// amplitude. Fully deterministic across platforms (raw mt19937_64 bits,
// no std distributions).

#include <cstdint>

#include "gravqnd/core.hpp"

namespace gravqnd {

SampledSeries make_fourier_record(const MeasurementWindow& window,
                                  std::uint64_t seed, int n_modes,
                                  double amplitude);

/// Seeded (t1, t2) pairs inside the clipped window, for commutator scans.
std::vector<std::pair<double, double>> make_time_pairs(
    const MeasurementWindow& window, std::uint64_t seed, int count);

} // namespace gravqnd
