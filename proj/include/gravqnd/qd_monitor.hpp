#pragma once

// Demolition-side comparison: continuous Gaussian monitoring of the
// position l(t) for the same near-surface Hamiltonian. The weight
// exp(-(1/(T delta_l_sq)) Int (l - l_record)^2 dt) is real, so its
// effect on the output probability never cancels -- the contrast with
// the family-variable monitoring, whose weight effects vanish at the
// balanced resolution T delta_a_sq = 2 m hbar.

#include "gravqnd/core.hpp"
#include "gravqnd/lattice.hpp"

namespace gravqnd {

struct PositionMonitorConfig {
    SampledSeries l_record;
    double delta_l_sq;
    MeasurementWindow window;
    PhysicalParams params;
};

/// 2 Re log U for position monitoring; reuses the lattice machinery with
/// the A-weight off and the real position weight on.
double qd_log_probability(const PositionMonitorConfig& cfg, int n_slices,
                          std::pair<double, double> boundary);

struct ContrastRow {
    double delta;       // resolution, used as delta_a_sq and delta_l_sq
    double qnd_spread;  // max - min of lattice log-probability over records
    double qd_spread;
};

struct ContrastReport {
    std::vector<ContrastRow> rows;
    double balanced_delta = 0.0; // 2 m hbar / T
};

/// Log-probability spreads over a fixed record family versus resolution,
/// for monitoring the family variable A versus monitoring position, both
/// at lattice level with shared boundary and slice count.
ContrastReport sql_contrast_report(const PhysicalParams& params,
                                   const MeasurementWindow& window,
                                   const std::vector<SampledSeries>& records,
                                   const std::vector<double>& delta_sequence,
                                   int n_slices,
                                   std::pair<double, double> boundary,
                                   SigmaChoice sigma = SigmaChoice::CoshDefault);

} // namespace gravqnd
