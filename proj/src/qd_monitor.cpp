#include "gravqnd/qd_monitor.hpp"

#include <limits>

namespace gravqnd {

double qd_log_probability(const PositionMonitorConfig& cfg, int n_slices,
                          std::pair<double, double> boundary) {
    if (!(cfg.delta_l_sq > 0.0)) throw DomainError("delta_l_sq must be positive");
    const double inf = std::numeric_limits<double>::infinity();
    MeasurementWindow w = cfg.window.with_delta(inf); // A-weight off
    const QndVariable qnd = build_qnd_variable(SigmaChoice::UnitConstant, w, cfg.params);
    const SampledSeries zero(w, std::vector<double>(w.n_grid, 0.0));
    PositionWeight pw{&cfg.l_record, cfg.delta_l_sq};
    const SlicedLattice lat =
        build_lattice(zero, qnd, cfg.params, w, n_slices, boundary, std::nullopt, pw);
    return 2.0 * gaussian_reduce(lat).total.real();
}

ContrastReport sql_contrast_report(const PhysicalParams& params,
                                   const MeasurementWindow& window,
                                   const std::vector<SampledSeries>& records,
                                   const std::vector<double>& delta_sequence,
                                   int n_slices, std::pair<double, double> boundary,
                                   SigmaChoice sigma) {
    if (records.size() < 2)
        throw DomainError("contrast report needs at least two records");
    ContrastReport rep;
    rep.balanced_delta = 2.0 * params.m * params.hbar / window.T;
    for (double d : delta_sequence) {
        const MeasurementWindow w = window.with_delta(d);
        const QndVariable qnd = build_qnd_variable(sigma, w, params);
        double qnd_lo = 0.0, qnd_hi = 0.0, qd_lo = 0.0, qd_hi = 0.0;
        bool first = true;
        for (const SampledSeries& rec : records) {
            const double lp_qnd =
                oracle_log_probability(rec, qnd, params, w, n_slices, boundary);
            PositionMonitorConfig cfg{rec, d, window, params};
            const double lp_qd = qd_log_probability(cfg, n_slices, boundary);
            if (first) {
                qnd_lo = qnd_hi = lp_qnd;
                qd_lo = qd_hi = lp_qd;
                first = false;
            } else {
                qnd_lo = std::min(qnd_lo, lp_qnd);
                qnd_hi = std::max(qnd_hi, lp_qnd);
                qd_lo = std::min(qd_lo, lp_qd);
                qd_hi = std::max(qd_hi, lp_qd);
            }
        }
        rep.rows.push_back({d, qnd_hi - qnd_lo, qd_hi - qd_lo});
    }
    return rep;
}

} // namespace gravqnd
