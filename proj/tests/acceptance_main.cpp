// Acceptance suite: one pass/fail line per criterion, nonzero exit on
// any failure. Natural units (m = hbar = Omega = 1) unless stated.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <vector>

#include "gravqnd/lattice.hpp"
#include "gravqnd/propagator.hpp"
#include "gravqnd/qd_monitor.hpp"
#include "gravqnd/qnd_family.hpp"
#include "gravqnd/records.hpp"
#include "gravqnd/scenario.hpp"

using namespace gravqnd;
using json = nlohmann::ordered_json;

namespace {

int failures = 0;

void report(int criterion, const char* what, bool pass, const std::string& metric) {
    std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", criterion,
                what, metric.c_str());
    if (!pass) ++failures;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

const PhysicalParams P = make_params(UnitMode::Natural);

// 1. RK4 integration of the ratio flow matches the tanh closed form.
void criterion_1() {
    const MeasurementWindow w(0.0, 3.0 / P.Omega, 1.0, 1001, 1e-3);
    const SampledSeries f = integrate_riccati_oracle(0.0, w, P, 10000);
    double max_abs = 0.0, sup = 0.0;
    for (int i = 0; i < w.n_grid; ++i) {
        max_abs = std::max(max_abs, std::abs(f[i] - analytic_f(w.node(i), 0.0, P)));
        sup = std::max(sup, std::abs(analytic_f(w.node(i), 0.0, P)));
    }
    const double rel = max_abs / sup;
    report(1, "Riccati closure: RK4 vs tanh closed form", rel <= 1e-8,
           "rel err " + fmt(rel) + " <= 1e-8");
}

// 2. Self-commutator bound for 100 seeded pairs and all sigma choices,
//    plus the pointwise vanishing of the l0 coefficient on a 1e3 grid.
void criterion_2() {
    const MeasurementWindow w(0.0, 3.0, 1.0, 1001, 1e-3);
    std::vector<QndVariable> family;
    family.push_back(build_qnd_variable(SigmaChoice::CoshDefault, w, P));
    family.push_back(build_qnd_variable(SigmaChoice::UnitConstant, w, P));
    family.push_back(build_qnd_variable(
        SigmaChoice::Tabulated, w, P,
        sample_series(w, [](double t) { return 1.0 + 0.5 * std::sin(t) * std::sin(t); })));
    const auto pairs = make_time_pairs(w, 271828, 100);
    double worst_pair = 0.0, worst_point = 0.0;
    for (const QndVariable& q : family) {
        for (const auto& [t1, t2] : pairs) {
            const Complex c = qnd_commutator(t1, t2, q, P);
            const HeisenbergAB a = qnd_heisenberg_ab(t1, q, P);
            const HeisenbergAB b = qnd_heisenberg_ab(t2, q, P);
            worst_pair = std::max(
                worst_pair, std::abs(c) / (1e-12 * P.hbar * std::abs(a.V * b.V)));
        }
        for (int i = 0; i < w.n_grid; ++i) {
            const HeisenbergAB ab = qnd_heisenberg_ab(w.node(i), q, P);
            worst_point = std::max(worst_point, std::abs(ab.U) / (1e-12 * std::abs(ab.V)));
        }
    }
    report(2, "QND property: commutator and pointwise bounds",
           worst_pair <= 1.0 && worst_point <= 1.0,
           "worst ratios " + fmt(worst_pair) + ", " + fmt(worst_point) + " <= 1");
}

// 3. Uniform probability at T delta^2 = 2 m hbar: closed forms vanish
//    below 1e-10, lattice record differences below 1e-6 at N = 4096.
void criterion_3() {
    const MeasurementWindow w(0.0, 1.0, 2.0, 1001, 1e-3);
    const UniformCheckReport rep = uniform_probability_check(P, w, 100, 31415);
    const bool closed_ok = rep.max_abs_log_p <= 1e-10 &&
                           rep.max_abs_per_term <= 1e-10 &&
                           rep.max_abs_two_re_13 <= 1e-10;
    const QndVariable q = build_qnd_variable(SigmaChoice::CoshDefault, w, P);
    double max_diff = 0.0;
    std::vector<double> lp;
    for (int k = 0; k < 5; ++k) {
        const SampledSeries a = make_fourier_record(w, 31415 + k, 4, 1.0);
        lp.push_back(oracle_log_probability(a, q, P, w, 4096, {0.0, 0.0}));
        if (k > 0) max_diff = std::max(max_diff, std::abs(lp[k] - lp[0]));
    }
    report(3, "uniform probability at T*da^2 = 2 m hbar",
           closed_ok && max_diff <= 1e-6,
           "closed-form max " + fmt(std::max({rep.max_abs_log_p, rep.max_abs_per_term,
                                              rep.max_abs_two_re_13})) +
               " <= 1e-10, lattice diff " + fmt(max_diff) + " <= 1e-6");
}

// 4. Detuning the balanced resolution by +-10% must break uniformity.
void criterion_4() {
    const MeasurementWindow w(0.0, 1.0, 2.0, 1001, 1e-3);
    const QndVariable q = build_qnd_variable(SigmaChoice::CoshDefault, w, P);
    double min_spread = std::numeric_limits<double>::infinity();
    for (double f : {0.9, 1.1}) {
        const MeasurementWindow wf = w.with_delta(2.0 * f);
        const AlphaBeta ab = make_alpha_beta(wf, q, P);
        const GammaCaps gc = make_gamma_caps(ab, wf, P);
        double lo = 0.0, hi = 0.0;
        for (int k = 0; k < 20; ++k) {
            const SampledSeries a = make_fourier_record(wf, 31415 + k, 4, 1.0);
            const double v = log_probability_14(a, ab, gc, P, wf).total.real();
            if (k == 0)
                lo = hi = v;
            else {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
        min_spread = std::min(min_spread, hi - lo);
    }
    report(4, "sharpness: +-10% detuning spreads the records", min_spread > 1e-3,
           "spread " + fmt(min_spread) + " > 1e-3");
}

// 5. Zero-resolution limit: fitted constant is record independent,
//    hbar-free, and scales with the squared mass.
void criterion_5() {
    const MeasurementWindow w(0.0, 0.002, 1.0, 1001, 1e-3);
    std::vector<SampledSeries> records;
    for (int k = 0; k < 5; ++k)
        records.push_back(make_fourier_record(w, 100 + k, 4, 1e-6));
    std::vector<double> deltas;
    for (int i = 0; i < 10; ++i)
        deltas.push_back(1000.0 * std::pow(1e-3, i / 9.0));
    const LimitReport rep = zero_resolution_limit(records, P, w, deltas);
    const double mass_defect = std::abs(rep.mass_ratio / 4.0 - 1.0);
    const bool ok = rep.c_spread_rel <= 0.01 && rep.hbar_change_rel < 1e-3 &&
                    mass_defect <= 0.05;
    report(5, "zero-resolution limit: C/da^2 with m^2, no hbar", ok,
           "record spread " + fmt(rep.c_spread_rel) + " <= 0.01, hbar shift " +
               fmt(rep.hbar_change_rel) + " < 1e-3, m^2 defect " +
               fmt(mass_defect) + " <= 0.05");
}

// 6. Lattice anchors: free particle and real-frequency oscillator.
void criterion_6() {
    const double inf = std::numeric_limits<double>::infinity();
    PhysicalParams pf = P;
    pf.g = 0.0;
    pf.Omega = 0.0;
    pf.omega_sq = 0.0;
    const MeasurementWindow w(0.0, 1.0, inf, 101, 1e-3);
    const QndVariable q = build_qnd_variable(SigmaChoice::UnitConstant, w, pf);
    const SampledSeries zero(w, std::vector<double>(w.n_grid, 0.0));
    auto mag = [&](int n, std::optional<double> om2) {
        return gaussian_reduce(build_lattice(zero, q, pf, w, n, {0.0, 0.0}, om2))
            .total.real();
    };
    const double free_rich = (4.0 * mag(8192, {}) - mag(4096, {})) / 3.0;
    const double free_exact =
        0.5 * std::log(P.m / (2.0 * std::numbers::pi * P.hbar * w.T));
    const double free_rel = std::abs(std::exp(free_rich) / std::exp(free_exact) - 1.0);
    const double osc_rich = (4.0 * mag(8192, 1.0) - mag(4096, 1.0)) / 3.0;
    const double osc_exact =
        0.5 * std::log(P.m * 1.0 / (2.0 * std::numbers::pi * P.hbar * std::sin(w.T)));
    const double osc_rel = std::abs(std::exp(osc_rich) / std::exp(osc_exact) - 1.0);
    report(6, "oracle anchors: free and oscillator magnitudes",
           free_rel <= 1e-6 && osc_rel <= 1e-6,
           "rel errs " + fmt(free_rel) + ", " + fmt(osc_rel) + " <= 1e-6");
}

// 7. Momentum-slice Gaussian: quadrature vs completed square.
void criterion_7() {
    const MeasurementWindow w(0.0, 1.0, 2.0, 101, 1e-3);
    const SliceCheckReport rep = momentum_slice_check(P, w, 0.5, 50, 2024);
    report(7, "momentum-slice quadrature vs closed form", rep.pass,
           "max rel err " + fmt(rep.max_rel_err) + " <= 1e-6");
}

// 8. Contrast: family-variable spread collapses at balance, position
//    spread does not; both vanish with the weight off.
void criterion_8() {
    const MeasurementWindow w(0.0, 1.0, 1.0, 501, 1e-3);
    std::vector<SampledSeries> recs;
    for (int k = 0; k < 5; ++k) recs.push_back(make_fourier_record(w, 60 + k, 4, 0.5));
    const double balanced = 2.0 * P.m * P.hbar / w.T;
    const std::vector<double> deltas{1e8 * balanced, balanced};
    const ContrastReport rep =
        sql_contrast_report(P, w, recs, deltas, 1024, {0.0, 0.0});
    const ContrastRow& off = rep.rows[0];
    const ContrastRow& bal = rep.rows[1];
    const bool ok = bal.qnd_spread <= 1e-6 && bal.qd_spread > 1e-3 &&
                    off.qnd_spread <= 1e-6 && off.qd_spread <= 1e-6;
    report(8, "QND/QD contrast across resolutions", ok,
           "balanced: " + fmt(bal.qnd_spread) + " <= 1e-6 vs " + fmt(bal.qd_spread) +
               " > 1e-3; weight off: " + fmt(off.qnd_spread) + ", " +
               fmt(off.qd_spread) + " <= 1e-6");
}

// 9. The residual between the printed probability form and |U|^2 is
//    computed and persisted for a grid of parameters.
void criterion_9() {
    json cfg;
    cfg["scenario"] = "probability";
    cfg["params"] = {{"mode", "natural"}};
    cfg["window"] = {{"tau_start", 0.0}, {"tau_end", 1.0}, {"delta_a_sq", 3.3},
                     {"n_grid", 801},    {"eps_offset", 1e-3}};
    cfg["record"] = {{"seed", 2718}, {"n_modes", 4}, {"amplitude", 1.0}};
    const auto out_dir =
        std::filesystem::temp_directory_path() / "gravqnd_acceptance_out";
    cfg["output"] = {{"dir", out_dir.string()}};
    const RunResult rr = run_config(cfg, true);
    bool ok = rr.status == 0;
    double max_res = 0.0;
    if (ok) {
        std::ifstream in(rr.summary_path);
        ok = in.good();
        if (ok) {
            const json persisted = json::parse(in);
            const auto& grid = persisted.at("results").at("residual_grid");
            ok = grid.is_array() && grid.size() >= 6;
            for (const auto& row : grid)
                max_res = std::max(max_res, row.at("residual").get<double>());
        }
    }
    report(9, "printed-form vs |U|^2 residual computed and persisted", ok,
           "grid of 6 resolutions, max residual " + fmt(max_res) + " (reported)");
}

// 10. Re-running a scenario reproduces the summary bit for bit.
void criterion_10() {
    json cfg;
    cfg["scenario"] = "uniform-check";
    cfg["params"] = {{"mode", "natural"}};
    cfg["window"] = {{"tau_start", 0.0}, {"tau_end", 1.0}, {"delta_a_sq", 2.0},
                     {"n_grid", 401},    {"eps_offset", 1e-3}};
    cfg["record"] = {{"seed", 99}, {"n_modes", 4}, {"amplitude", 1.0}};
    cfg["uniform"] = {{"trials", 20}};
    RunResult r1 = run_config(cfg, false);
    RunResult r2 = run_config(cfg, false);
    r1.summary.erase("timestamp");
    r2.summary.erase("timestamp");
    const bool ok = r1.status == 0 && r2.status == 0 &&
                    r1.summary.dump() == r2.summary.dump() &&
                    r1.series_csv == r2.series_csv;
    report(10, "bitwise reproducibility of summaries", ok,
           ok ? "identical" : "mismatch");
}

} // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    const auto t1 = std::chrono::steady_clock::now();
    const double secs = std::chrono::duration<double>(t1 - t0).count();
    std::printf("%d/10 criteria passed in %.1f s\n", 10 - failures, secs);
    return failures == 0 ? 0 : 1;
}
