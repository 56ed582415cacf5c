#include "gravqnd/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>

#include "gravqnd/lattice.hpp"
#include "gravqnd/propagator.hpp"
#include "gravqnd/qd_monitor.hpp"
#include "gravqnd/qnd_family.hpp"
#include "gravqnd/records.hpp"

namespace gravqnd {

namespace {

using json = nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";

std::string fmt_double(double v) {
    char buf[40];
    auto r = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, r.ptr);
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        out += c;
    }
    out += "\"";
    return out;
}

class CsvWriter {
  public:
    explicit CsvWriter(std::vector<std::string> header) {
        append_row_strings(std::move(header));
    }
    void append_row_strings(std::vector<std::string> cells) {
        for (size_t i = 0; i < cells.size(); ++i) {
            if (i) body_ += ',';
            body_ += csv_field(cells[i]);
        }
        body_ += '\n';
    }
    void append_row(const std::vector<double>& cells,
                    const std::vector<std::string>& prefix = {}) {
        std::vector<std::string> s(prefix);
        for (double v : cells) s.push_back(fmt_double(v));
        append_row_strings(std::move(s));
    }
    std::string str() const { return body_; }

  private:
    std::string body_;
};

struct Assertions {
    json entries = json::object();
    bool all_pass = true;
    void add(const std::string& name, double value, double threshold, bool pass) {
        entries[name] = {{"value", value}, {"threshold", threshold}, {"pass", pass}};
        all_pass = all_pass && pass;
    }
    void add_flag(const std::string& name, bool pass) {
        entries[name] = {{"pass", pass}};
        all_pass = all_pass && pass;
    }
};

// ---- config parsing --------------------------------------------------

PhysicalParams parse_params(const json& cfg) {
    UnitMode mode = UnitMode::Natural;
    ParamOverrides o;
    if (cfg.contains("params")) {
        const json& p = cfg.at("params");
        if (p.contains("mode")) {
            const std::string m = p.at("mode").get<std::string>();
            if (m == "natural")
                mode = UnitMode::Natural;
            else if (m == "si-earth")
                mode = UnitMode::SiEarth;
            else
                throw DomainError("unknown unit mode: " + m);
        }
        if (p.contains("overrides")) {
            const json& ov = p.at("overrides");
            if (ov.contains("m")) o.m = ov.at("m").get<double>();
            if (ov.contains("G")) o.G = ov.at("G").get<double>();
            if (ov.contains("M")) o.M = ov.at("M").get<double>();
            if (ov.contains("R")) o.R = ov.at("R").get<double>();
            if (ov.contains("hbar")) o.hbar = ov.at("hbar").get<double>();
        }
    }
    return make_params(mode, o);
}

MeasurementWindow parse_window(const json& cfg) {
    if (!cfg.contains("window")) throw DomainError("config needs a window block");
    const json& w = cfg.at("window");
    double delta = 1.0;
    if (w.contains("delta_a_sq")) {
        if (w.at("delta_a_sq").is_string()) {
            const std::string s = w.at("delta_a_sq").get<std::string>();
            if (s == "inf" || s == "infinity")
                delta = std::numeric_limits<double>::infinity();
            else
                throw DomainError("delta_a_sq string must be \"inf\"");
        } else {
            delta = w.at("delta_a_sq").get<double>();
        }
    }
    return MeasurementWindow(w.at("tau_start").get<double>(),
                             w.at("tau_end").get<double>(), delta,
                             w.value("n_grid", 1001), w.value("eps_offset", 1e-3));
}

SigmaChoice parse_sigma_choice(const json& cfg) {
    const std::string c =
        cfg.contains("sigma") ? cfg.at("sigma").value("choice", "cosh") : "cosh";
    if (c == "cosh") return SigmaChoice::CoshDefault;
    if (c == "unit") return SigmaChoice::UnitConstant;
    if (c == "tabulated") return SigmaChoice::Tabulated;
    throw DomainError("unknown sigma choice: " + c);
}

QndVariable parse_qnd(const json& cfg, const MeasurementWindow& w,
                      const PhysicalParams& p) {
    const SigmaChoice choice = parse_sigma_choice(cfg);
    if (choice != SigmaChoice::Tabulated) return build_qnd_variable(choice, w, p);
    if (cfg.contains("sigma") && cfg.at("sigma").contains("values")) {
        std::vector<double> vals =
            cfg.at("sigma").at("values").get<std::vector<double>>();
        return build_qnd_variable(choice, w, p, SampledSeries(w, std::move(vals)));
    }
    // default table: a smooth positive profile distinct from the other choices
    SampledSeries tab = sample_series(w, [&](double t) {
        const double u = (t - w.tau_start) / w.T;
        const double s = std::sin(std::numbers::pi * u);
        return 1.0 + 0.5 * s * s;
    });
    return build_qnd_variable(choice, w, p, std::move(tab));
}

struct RecordSpec {
    bool explicit_samples = false;
    std::vector<double> samples;
    std::uint64_t seed = 0;
    int n_modes = 4;
    double amplitude = 1.0;
    int count = 1;
};

RecordSpec parse_record(const json& cfg, double default_amplitude = 1.0) {
    RecordSpec r;
    r.amplitude = default_amplitude;
    if (!cfg.contains("record")) throw DomainError("config needs a record block");
    const json& rec = cfg.at("record");
    if (rec.contains("samples")) {
        r.explicit_samples = true;
        r.samples = rec.at("samples").get<std::vector<double>>();
        return r;
    }
    if (!rec.contains("seed"))
        throw DomainError("record block needs a seed (reproducibility) or samples");
    r.seed = rec.at("seed").get<std::uint64_t>();
    r.n_modes = rec.value("n_modes", 4);
    r.amplitude = rec.value("amplitude", default_amplitude);
    r.count = rec.value("count", 1);
    if (r.count < 1) throw DomainError("record count must be >= 1");
    return r;
}

std::vector<SampledSeries> make_records(const RecordSpec& spec,
                                        const MeasurementWindow& w, int count) {
    std::vector<SampledSeries> out;
    if (spec.explicit_samples) {
        out.emplace_back(w, spec.samples);
        return out;
    }
    for (int i = 0; i < count; ++i)
        out.push_back(make_fourier_record(w, spec.seed + i, spec.n_modes,
                                          spec.amplitude));
    return out;
}

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
    return buf;
}

// ---- scenarios --------------------------------------------------------

struct ScenarioOutput {
    json results = json::object();
    Assertions asserts;
    std::string csv;
};

ScenarioOutput scenario_riccati(const json& cfg, const PhysicalParams& p,
                                const MeasurementWindow& w) {
    ScenarioOutput out;
    const json rc = cfg.value("riccati", json::object());
    const double f0 = rc.value("f0", 0.0);
    const int steps = rc.value("steps", 10000);
    const double tol = rc.value("tolerance", 1e-8);
    if (f0 != 0.0)
        throw DomainError("riccati-check compares against the tanh solution, "
                          "which starts at f0 = 0");

    const SampledSeries num = integrate_riccati_oracle(f0, w, p, steps);
    double max_abs = 0.0, sup_f = 0.0;
    CsvWriter csv({"t", "f_rk4", "f_exact", "abs_err"});
    for (int i = 0; i < w.n_grid; ++i) {
        const double t = w.node(i);
        const double fe = analytic_f(t, w.tau_start, p);
        const double err = std::abs(num[i] - fe);
        max_abs = std::max(max_abs, err);
        sup_f = std::max(sup_f, std::abs(fe));
        csv.append_row({t, num[i], fe, err});
    }
    const double rel = max_abs / std::max(sup_f, 1e-300);
    out.results["steps"] = steps;
    out.results["f0"] = f0;
    out.results["max_abs_err"] = max_abs;
    out.results["sup_f"] = sup_f;
    out.results["max_rel_err"] = rel;
    out.asserts.add("riccati_rel_err", rel, tol, rel <= tol);
    out.csv = csv.str();
    return out;
}

ScenarioOutput scenario_commutator(const json& cfg, const PhysicalParams& p,
                                   const MeasurementWindow& w) {
    ScenarioOutput out;
    const json cc = cfg.value("commutator", json::object());
    const int n_pairs = cc.value("pairs", 100);
    if (!cc.contains("seed")) throw DomainError("commutator block needs a seed");
    const std::uint64_t seed = cc.at("seed").get<std::uint64_t>();

    const auto pairs = make_time_pairs(w, seed, n_pairs);
    CsvWriter csv({"sigma", "t1", "t2", "abs_commutator", "bound"});

    const std::vector<std::pair<std::string, SigmaChoice>> choices = {
        {"cosh", SigmaChoice::CoshDefault},
        {"unit", SigmaChoice::UnitConstant},
        {"tabulated", SigmaChoice::Tabulated}};

    double worst_pair_ratio = 0.0, worst_pointwise_ratio = 0.0;
    double worst_symplectic = 0.0, worst_cosh_v = 0.0;
    for (const auto& [name, choice] : choices) {
        json cfg2 = cfg;
        cfg2["sigma"] = {{"choice", name}};
        const QndVariable qnd = parse_qnd(cfg2, w, p);
        for (const auto& [t1, t2] : pairs) {
            const Complex comm = qnd_commutator(t1, t2, qnd, p);
            const HeisenbergAB a = qnd_heisenberg_ab(t1, qnd, p);
            const HeisenbergAB b = qnd_heisenberg_ab(t2, qnd, p);
            const double bound = 1e-12 * p.hbar * std::abs(a.V * b.V);
            csv.append_row({t1, t2, std::abs(comm), bound}, {name});
            worst_pair_ratio =
                std::max(worst_pair_ratio, std::abs(comm) / std::max(bound, 1e-300));
        }
        for (int i = 0; i < w.n_grid; ++i) {
            const double t = w.node(i);
            const HeisenbergAB ab = qnd_heisenberg_ab(t, qnd, p);
            worst_pointwise_ratio = std::max(
                worst_pointwise_ratio, std::abs(ab.U) / (1e-12 * std::abs(ab.V)));
            const HeisenbergCoeffs hc = heisenberg_coeffs(t - w.tau_start, p);
            worst_symplectic = std::max(
                worst_symplectic, std::abs(hc.u_l * hc.v_p - hc.u_p * hc.v_l - 1.0));
            if (choice == SigmaChoice::CoshDefault)
                worst_cosh_v = std::max(worst_cosh_v, std::abs(ab.V - 1.0));
        }
    }
    // regression that the check has power: a detuned ratio must not commute
    double perturbed_comm = 0.0;
    {
        const QndVariable qnd = build_qnd_variable(SigmaChoice::CoshDefault, w, p);
        const double t1 = w.node(w.n_grid / 3), t2 = w.node(2 * w.n_grid / 3);
        auto UV = [&](double t) {
            const HeisenbergCoeffs c = heisenberg_coeffs(t - w.tau_start, p);
            const double fv = 1.001 * qnd.f(t);
            const double s = qnd.sigma(t);
            return std::pair(s * (c.v_l + fv * c.u_l), s * (c.v_p + fv * c.u_p));
        };
        const auto [u1, v1] = UV(t1);
        const auto [u2, v2] = UV(t2);
        perturbed_comm = std::abs(p.hbar * (u1 * v2 - u2 * v1));
    }

    out.results["pairs"] = n_pairs;
    out.results["seed"] = seed;
    out.results["max_pair_ratio"] = worst_pair_ratio;
    out.results["max_pointwise_ratio"] = worst_pointwise_ratio;
    out.results["max_symplectic_defect"] = worst_symplectic;
    out.results["max_cosh_v_defect"] = worst_cosh_v;
    out.results["perturbed_ratio_commutator"] = perturbed_comm;
    out.asserts.add("commutator_pairs", worst_pair_ratio, 1.0, worst_pair_ratio <= 1.0);
    out.asserts.add("commutator_pointwise", worst_pointwise_ratio, 1.0,
                    worst_pointwise_ratio <= 1.0);
    out.asserts.add("symplectic", worst_symplectic, 1e-12, worst_symplectic <= 1e-12);
    out.asserts.add("cosh_v_is_one", worst_cosh_v, 1e-12, worst_cosh_v <= 1e-12);
    out.asserts.add("perturbed_not_qnd", perturbed_comm, 1e-6,
                    perturbed_comm > 1e-6);
    out.csv = csv.str();
    return out;
}

json exponent_json(const ComplexExponent& e) {
    json terms = json::object();
    for (const auto& [name, v] : e.terms)
        terms[name] = {{"re", v.real()}, {"im", v.imag()}};
    return {{"total_re", e.total.real()},
            {"total_im", e.total.imag()},
            {"terms", terms},
            {"max_integrand_abs", e.max_integrand_abs},
            {"max_node", e.max_node}};
}

ScenarioOutput scenario_probability(const json& cfg, const PhysicalParams& p,
                                    const MeasurementWindow& w) {
    ScenarioOutput out;
    const RecordSpec spec = parse_record(cfg);
    const SampledSeries a = make_records(spec, w, 1).front();
    const QndVariable qnd = parse_qnd(cfg, w, p);
    const AlphaBeta ab = make_alpha_beta(w, qnd, p);
    const GammaCaps gc = make_gamma_caps(ab, w, p);

    const ComplexExponent lp14 = log_probability_14(a, ab, gc, p, w);
    const ComplexExponent lu13 = log_propagator(a, qnd, p, w);
    const double residual = std::abs(lp14.total.real() - 2.0 * lu13.total.real());

    const double x = w.resolution_time_product();
    CsvWriter csv({"t", "a", "beta", "gamma", "Gamma", "term1", "term2", "term3",
                   "term4", "integrand13_re", "integrand13_im"});
    for (int i = 0; i < w.n_grid; ++i) {
        const ProbabilityTerms tt =
            probability_density_14(a[i], ab.beta[i], gc.gamma[i], gc.Gamma[i], x, p);
        const Complex i13 = exponent_integrand_13(w.node(i), a[i], ab, p, w);
        csv.append_row({w.node(i), a[i], ab.beta[i], gc.gamma[i], gc.Gamma[i],
                        tt.term1, tt.term2, tt.term3, tt.term4, i13.real(),
                        i13.imag()});
    }

    // residual between the printed probability form and |U|^2 over a
    // grid of resolutions around the balanced point (a reported finding,
    // not an assertion)
    json grid = json::array();
    const double balanced = 2.0 * p.m * p.hbar / w.T;
    std::vector<double> factors =
        cfg.value("probability", json::object())
            .value("residual_grid_factors",
                   std::vector<double>{0.5, 0.9, 1.0, 1.1, 2.0, 5.0});
    for (double f : factors) {
        const MeasurementWindow wf = w.with_delta(balanced * f);
        const AlphaBeta abf = make_alpha_beta(wf, qnd, p);
        const GammaCaps gcf = make_gamma_caps(abf, wf, p);
        const double l14 = log_probability_14(a, abf, gcf, p, wf).total.real();
        const double l13 = 2.0 * log_propagator(a, qnd, p, wf).total.real();
        grid.push_back({{"delta_a_sq", balanced * f},
                        {"log_p_14", l14},
                        {"two_re_13", l13},
                        {"residual", std::abs(l14 - l13)}});
    }

    out.results["alpha_re"] = ab.alpha.real();
    out.results["alpha_im"] = ab.alpha.imag();
    out.results["log_probability_14"] = exponent_json(lp14);
    out.results["log_propagator_13"] = exponent_json(lu13);
    out.results["consistency_residual"] = residual;
    out.results["residual_grid"] = grid;

    // internal consistency: totals equal the sum of their terms
    auto term_sum_defect = [](const ComplexExponent& e) {
        Complex s{};
        for (const auto& [n, v] : e.terms) s += v;
        return std::abs(s - e.total) / std::max(1.0, std::abs(e.total));
    };
    const double d14 = term_sum_defect(lp14), d13 = term_sum_defect(lu13);
    out.asserts.add("terms_sum_14", d14, 1e-12, d14 <= 1e-12);
    out.asserts.add("terms_sum_13", d13, 1e-12, d13 <= 1e-12);
    out.asserts.add_flag("residual_reported", true);
    out.csv = csv.str();
    return out;
}

ScenarioOutput scenario_uniform(const json& cfg, const PhysicalParams& p,
                                const MeasurementWindow& w) {
    ScenarioOutput out;
    const json uc = cfg.value("uniform", json::object());
    const RecordSpec spec = parse_record(cfg);
    if (spec.explicit_samples)
        throw DomainError("uniform-check draws seeded record families; "
                          "explicit samples are not supported");
    const int trials = uc.value("trials", spec.count > 1 ? spec.count : 100);
    const SigmaChoice sigma = parse_sigma_choice(cfg);

    const UniformCheckReport rep = uniform_probability_check(
        p, w, trials, spec.seed, sigma, spec.n_modes, spec.amplitude);

    out.results["delta_at_condition"] = rep.delta_at_condition;
    out.results["trials"] = rep.trials;
    out.results["seed"] = rep.seed;
    out.results["max_abs_log_p"] = rep.max_abs_log_p;
    out.results["max_abs_per_term"] = rep.max_abs_per_term;
    out.results["max_abs_two_re_13"] = rep.max_abs_two_re_13;
    out.results["threshold"] = rep.threshold;
    out.results["off_condition_log_p"] = rep.off_condition_log_p;
    out.results["fourth_term_zero_record"] = rep.fourth_term_zero_record;
    out.asserts.add("uniform_log_p", rep.max_abs_log_p, rep.threshold,
                    rep.max_abs_log_p <= rep.threshold);
    out.asserts.add("uniform_per_term", rep.max_abs_per_term, rep.threshold,
                    rep.max_abs_per_term <= rep.threshold);
    out.asserts.add("uniform_two_re_13", rep.max_abs_two_re_13, rep.threshold,
                    rep.max_abs_two_re_13 <= rep.threshold);
    out.asserts.add("fourth_term_nonzero", std::abs(rep.fourth_term_zero_record),
                    0.0, std::abs(rep.fourth_term_zero_record) > 0.0);

    // sharpness: detuning the balanced resolution must spread the records
    CsvWriter csv({"record_index", "delta_factor", "log_p"});
    const MeasurementWindow wb = w.with_delta(rep.delta_at_condition);
    const QndVariable qnd = build_qnd_variable(sigma, wb, p);
    const std::vector<double> factors =
        uc.value("sharpness_factors", std::vector<double>{0.9, 1.1});
    const int sharp_records = std::min(trials, 20);
    double min_sharp_spread = std::numeric_limits<double>::infinity();
    for (double f : factors) {
        const MeasurementWindow wf = w.with_delta(rep.delta_at_condition * f);
        const AlphaBeta abf = make_alpha_beta(wf, qnd, p);
        const GammaCaps gcf = make_gamma_caps(abf, wf, p);
        double lo = 0.0, hi = 0.0;
        for (int k = 0; k < sharp_records; ++k) {
            const SampledSeries a =
                make_fourier_record(wf, spec.seed + k, spec.n_modes, spec.amplitude);
            const double lp = log_probability_14(a, abf, gcf, p, wf).total.real();
            csv.append_row({double(k), f, lp});
            if (k == 0)
                lo = hi = lp;
            else {
                lo = std::min(lo, lp);
                hi = std::max(hi, lp);
            }
        }
        min_sharp_spread = std::min(min_sharp_spread, hi - lo);
    }
    out.results["sharpness_min_spread"] = min_sharp_spread;
    out.asserts.add("sharpness_spread", min_sharp_spread, 1e-3,
                    min_sharp_spread > 1e-3);

    // lattice-level record differences at the balanced resolution
    if (cfg.contains("oracle")) {
        const json& oc = cfg.at("oracle");
        const int n_slices = oc.value("n_slices", 4096);
        const std::pair<double, double> bnd(oc.value("z_start", 0.0),
                                            oc.value("z_end", 0.0));
        const int n_rec = std::min(trials, 5);
        std::vector<double> lp;
        for (int k = 0; k < n_rec; ++k) {
            const SampledSeries a =
                make_fourier_record(wb, spec.seed + k, spec.n_modes, spec.amplitude);
            lp.push_back(oracle_log_probability(a, qnd, p, wb, n_slices, bnd));
        }
        double max_diff = 0.0;
        for (size_t i = 1; i < lp.size(); ++i)
            max_diff = std::max(max_diff, std::abs(lp[i] - lp[0]));
        out.results["lattice_n_slices"] = n_slices;
        out.results["lattice_max_record_diff"] = max_diff;
        out.asserts.add("lattice_record_diff", max_diff, 1e-6, max_diff <= 1e-6);
    }
    out.csv = csv.str();
    return out;
}

ScenarioOutput scenario_limit(const json& cfg, const PhysicalParams& p,
                              const MeasurementWindow& w) {
    ScenarioOutput out;
    const RecordSpec spec = parse_record(cfg, /*default_amplitude=*/1e-6);
    if (spec.explicit_samples)
        throw DomainError("limit-sweep compares several seeded records; "
                          "explicit samples are not supported");
    const json lc = cfg.value("limit", json::object());
    std::vector<double> deltas;
    if (lc.contains("deltas")) {
        deltas = lc.at("deltas").get<std::vector<double>>();
    } else {
        const double d0 = lc.value("delta_start", 1000.0);
        const double d1 = lc.value("delta_stop", 1.0);
        const int n = lc.value("n_points", 10);
        for (int i = 0; i < n; ++i)
            deltas.push_back(d0 * std::pow(d1 / d0, double(i) / (n - 1)));
    }
    const int count = spec.count >= 2 ? spec.count : 5;
    const std::vector<SampledSeries> records = make_records(spec, w, count);
    const LimitReport rep =
        zero_resolution_limit(records, p, w, deltas, parse_sigma_choice(cfg));

    CsvWriter csv({"delta_a_sq", "record_index", "log_p", "log_p_times_delta"});
    for (size_t r = 0; r < rep.log_p.size(); ++r)
        for (size_t i = 0; i < deltas.size(); ++i)
            csv.append_row({deltas[i], double(r), rep.log_p[r][i],
                            rep.log_p[r][i] * deltas[i]});

    out.results["deltas"] = rep.deltas;
    out.results["fitted_c"] = rep.fitted_c;
    out.results["c_mean"] = rep.c_mean;
    out.results["c_spread_rel"] = rep.c_spread_rel;
    out.results["c_beta2_integral"] = rep.c_beta2_integral;
    out.results["c_beta4_integral"] = rep.c_beta4_integral;
    out.results["c_hbar_doubled"] = rep.c_hbar_doubled;
    out.results["c_mass_doubled"] = rep.c_mass_doubled;
    out.results["hbar_change_rel"] = rep.hbar_change_rel;
    out.results["mass_ratio"] = rep.mass_ratio;
    out.results["c_fit_over_beta2_integral"] = rep.c_mean / rep.c_beta2_integral;
    out.results["c_fit_over_beta4_integral"] = rep.c_mean / rep.c_beta4_integral;

    out.asserts.add("c_record_spread", rep.c_spread_rel, 0.01,
                    rep.c_spread_rel <= 0.01);
    out.asserts.add("c_hbar_free", rep.hbar_change_rel, 1e-3,
                    rep.hbar_change_rel < 1e-3);
    const double mass_defect = std::abs(rep.mass_ratio / 4.0 - 1.0);
    out.asserts.add("c_mass_square", mass_defect, 0.05, mass_defect <= 0.05);
    out.csv = csv.str();
    return out;
}

ScenarioOutput scenario_oracle(const json& cfg, const PhysicalParams& p,
                               const MeasurementWindow& w) {
    ScenarioOutput out;
    const json oc = cfg.value("oracle", json::object());
    const int n_slices = oc.value("n_slices", 4096);
    const std::pair<double, double> bnd(oc.value("z_start", 0.0),
                                        oc.value("z_end", 0.0));
    const double inf = std::numeric_limits<double>::infinity();
    CsvWriter csv({"check", "n_slices", "value", "reference", "rel_err"});

    // Richardson on log|U| assuming the measured O(1/N^2) convergence
    auto rich = [](double fN, double f2N) { return (4.0 * f2N - fN) / 3.0; };

    // free particle: gravity off, weight off; exact at any N
    {
        PhysicalParams pf = p;
        pf.g = 0.0;
        pf.Omega = 0.0;
        pf.omega_sq = 0.0;
        const MeasurementWindow wf = w.with_delta(inf);
        const QndVariable qnd = build_qnd_variable(SigmaChoice::UnitConstant, wf, pf);
        const SampledSeries zero(wf, std::vector<double>(wf.n_grid, 0.0));
        auto mag = [&](int n) {
            return gaussian_reduce(build_lattice(zero, qnd, pf, wf, n, bnd))
                .total.real();
        };
        const double lr = rich(mag(n_slices), mag(2 * n_slices));
        const double exact =
            0.5 * std::log(p.m / (2.0 * std::numbers::pi * p.hbar * w.T));
        const double rel = std::abs(std::exp(lr) / std::exp(exact) - 1.0);
        csv.append_row({double(n_slices), std::exp(lr), std::exp(exact), rel},
                       {"free_anchor"});
        out.results["free_anchor_rel_err"] = rel;
        out.asserts.add("free_anchor", rel, 1e-6, rel <= 1e-6);
    }
    // real-frequency oscillator: gravity off, omega_sq overridden positive
    {
        PhysicalParams pf = p;
        pf.g = 0.0;
        pf.Omega = 0.0;
        pf.omega_sq = 0.0;
        const double om_test = oc.value("test_omega", 1.0);
        if (!(om_test * w.T < std::numbers::pi))
            throw DomainError("oscillator anchor needs omega*T < pi");
        const MeasurementWindow wf = w.with_delta(inf);
        const QndVariable qnd = build_qnd_variable(SigmaChoice::UnitConstant, wf, pf);
        const SampledSeries zero(wf, std::vector<double>(wf.n_grid, 0.0));
        auto mag = [&](int n) {
            return gaussian_reduce(
                       build_lattice(zero, qnd, pf, wf, n, bnd, om_test * om_test))
                .total.real();
        };
        const double lr = rich(mag(n_slices), mag(2 * n_slices));
        const double exact = 0.5 * std::log(p.m * om_test /
                                            (2.0 * std::numbers::pi * p.hbar *
                                             std::sin(om_test * w.T)));
        const double rel = std::abs(std::exp(lr) / std::exp(exact) - 1.0);
        csv.append_row({double(n_slices), std::exp(lr), std::exp(exact), rel},
                       {"oscillator_anchor"});
        out.results["oscillator_anchor_rel_err"] = rel;
        out.asserts.add("oscillator_anchor", rel, 1e-6, rel <= 1e-6);
    }
    // weight-off limit with gravity on: inverted-frequency closed form
    {
        const MeasurementWindow wf = w.with_delta(inf);
        const QndVariable qnd = build_qnd_variable(SigmaChoice::CoshDefault, wf, p);
        const SampledSeries zero(wf, std::vector<double>(wf.n_grid, 0.0));
        auto mag = [&](int n) {
            return gaussian_reduce(build_lattice(zero, qnd, p, wf, n, bnd))
                .total.real();
        };
        const double lr = rich(mag(n_slices), mag(2 * n_slices));
        const double exact =
            0.5 * std::log(p.m * p.Omega /
                           (2.0 * std::numbers::pi * p.hbar *
                            std::sinh(p.Omega * w.T)));
        const double rel = std::abs(std::exp(lr) / std::exp(exact) - 1.0);
        csv.append_row({double(n_slices), std::exp(lr), std::exp(exact), rel},
                       {"weight_off_anchor"});
        out.results["weight_off_anchor_rel_err"] = rel;
        out.asserts.add("weight_off_anchor", rel, 1e-6, rel <= 1e-6);
    }
    // momentum-slice Gaussian quadrature
    {
        const json sc = cfg.value("slice_check", json::object());
        const int trials = sc.value("trials", 50);
        const std::uint64_t seed = sc.value("seed", 2024);
        const double t_mid = 0.5 * (w.clip_start() + w.tau_end);
        const SliceCheckReport rep = momentum_slice_check(p, w, t_mid, trials, seed);
        csv.append_row({double(trials), rep.max_rel_err, 0.0, rep.max_rel_err},
                       {"momentum_slice"});
        out.results["momentum_slice_max_rel_err"] = rep.max_rel_err;
        out.asserts.add("momentum_slice", rep.max_rel_err, rep.tolerance,
                        rep.pass);
    }
    // refinement and comparison against the closed forms at generic X
    {
        const RecordSpec spec = parse_record(cfg);
        const QndVariable qnd = parse_qnd(cfg, w, p);
        const std::vector<SampledSeries> recs = make_records(spec, w, 2);
        const SampledSeries& a1 = recs[0];
        const SampledSeries& a2 = recs.size() > 1 ? recs[1] : recs[0];

        // second-order refinement needs a smooth record; sampled records
        // carry interpolation kinks that never align with the slices
        // (the grid starts at the clipped endpoint), so use a constant
        // readout here
        const SampledSeries a_const(
            w, std::vector<double>(w.n_grid, spec.amplitude));
        double prev = 0.0, d_half = 0.0, d_full = 0.0;
        for (int mult : {1, 2, 4}) {
            const int n = mult * std::max(64, n_slices / 4);
            const SlicedLattice lat = build_lattice(a_const, qnd, p, w, n, bnd);
            const double v = gaussian_reduce(lat).total.real();
            if (mult == 2) d_half = std::abs(v - prev);
            if (mult == 4) d_full = std::abs(v - prev);
            csv.append_row({double(n), v, 0.0, 0.0}, {"refinement"});
            prev = v;
        }
        const double order_ratio = d_half / std::max(d_full, 1e-300);
        out.results["refinement_ratio"] = order_ratio;
        out.asserts.add("refinement_second_order", order_ratio, 3.0,
                        order_ratio >= 3.0);

        // record-difference boundary independence: exact at the balanced
        // resolution; away from it the stationary term couples record and
        // boundary sources, so the generic sensitivity is reported only
        const std::pair<double, double> bnd2(bnd.first + 0.8, bnd.second - 0.5);
        const MeasurementWindow wb = w.with_delta(2.0 * p.m * p.hbar / w.T);
        const QndVariable qnd_b = build_qnd_variable(parse_sigma_choice(cfg), wb, p);
        const double bal0 =
            oracle_log_probability(a1, qnd_b, p, wb, n_slices, bnd) -
            oracle_log_probability(a2, qnd_b, p, wb, n_slices, bnd);
        const double bal1 =
            oracle_log_probability(a1, qnd_b, p, wb, n_slices, bnd2) -
            oracle_log_probability(a2, qnd_b, p, wb, n_slices, bnd2);
        out.results["balanced_diff_boundary_shift"] = std::abs(bal1 - bal0);
        out.asserts.add("boundary_independent_diff_at_balance",
                        std::abs(bal1 - bal0), 1e-8, std::abs(bal1 - bal0) <= 1e-8);

        const double diff0 =
            oracle_log_probability(a1, qnd, p, w, n_slices, bnd) -
            oracle_log_probability(a2, qnd, p, w, n_slices, bnd);
        const double diff1 =
            oracle_log_probability(a1, qnd, p, w, n_slices, bnd2) -
            oracle_log_probability(a2, qnd, p, w, n_slices, bnd2);
        out.results["record_diff"] = diff0;
        out.results["record_diff_boundary_shift"] = std::abs(diff1 - diff0);

        // closed-form comparison on the same difference: reported only
        const AlphaBeta ab = make_alpha_beta(w, qnd, p);
        const GammaCaps gc = make_gamma_caps(ab, w, p);
        const double closed_diff =
            log_probability_14(a1, ab, gc, p, w).total.real() -
            log_probability_14(a2, ab, gc, p, w).total.real();
        out.results["closed_form_diff"] = closed_diff;
        out.results["oracle_vs_closed_residual"] = std::abs(diff0 - closed_diff);
        out.asserts.add_flag("oracle_vs_closed_reported", true);
    }
    out.csv = csv.str();
    return out;
}

ScenarioOutput scenario_qd_contrast(const json& cfg, const PhysicalParams& p,
                                    const MeasurementWindow& w) {
    ScenarioOutput out;
    const json qc = cfg.value("qd", json::object());
    const json oc = cfg.value("oracle", json::object());
    const int n_slices = oc.value("n_slices", 1024);
    const std::pair<double, double> bnd(oc.value("z_start", 0.0),
                                        oc.value("z_end", 0.0));
    const RecordSpec spec = parse_record(cfg, /*default_amplitude=*/0.5);
    if (spec.explicit_samples)
        throw DomainError("qd-contrast compares a seeded record family; "
                          "explicit samples are not supported");
    const int count = std::max(spec.count, 5);
    const std::vector<SampledSeries> records = make_records(spec, w, count);

    const double balanced = 2.0 * p.m * p.hbar / w.T;
    std::vector<double> deltas = qc.value(
        "delta_sequence",
        std::vector<double>{1e8 * balanced, 4.0 * balanced, 2.0 * balanced,
                            balanced, 0.5 * balanced, 0.25 * balanced});
    const ContrastReport rep = sql_contrast_report(p, w, records, deltas, n_slices,
                                                   bnd, parse_sigma_choice(cfg));

    CsvWriter csv({"delta", "qnd_spread", "qd_spread"});
    double qnd_at_balanced = -1.0, qd_at_balanced = -1.0;
    double qnd_at_largest = -1.0, qd_at_largest = -1.0;
    double largest = 0.0;
    for (const ContrastRow& r : rep.rows) {
        csv.append_row({r.delta, r.qnd_spread, r.qd_spread});
        if (std::abs(r.delta - balanced) <= 1e-9 * balanced) {
            qnd_at_balanced = r.qnd_spread;
            qd_at_balanced = r.qd_spread;
        }
        if (r.delta > largest) {
            largest = r.delta;
            qnd_at_largest = r.qnd_spread;
            qd_at_largest = r.qd_spread;
        }
    }
    if (qnd_at_balanced < 0.0)
        throw DomainError("qd contrast delta_sequence must include 2 m hbar / T");

    // demolition spreads grow monotonically as the resolution shrinks
    bool monotone = true;
    std::vector<std::pair<double, double>> finite_rows;
    for (const ContrastRow& r : rep.rows)
        if (r.delta < 0.5 * largest) finite_rows.push_back({r.delta, r.qd_spread});
    std::sort(finite_rows.begin(), finite_rows.end(),
              [](auto& a, auto& b) { return a.first > b.first; });
    for (size_t i = 1; i < finite_rows.size(); ++i)
        monotone = monotone &&
                   finite_rows[i].second >= finite_rows[i - 1].second - 1e-12;

    out.results["balanced_delta"] = balanced;
    out.results["qnd_spread_at_balanced"] = qnd_at_balanced;
    out.results["qd_spread_at_balanced"] = qd_at_balanced;
    out.results["qnd_spread_at_largest"] = qnd_at_largest;
    out.results["qd_spread_at_largest"] = qd_at_largest;
    out.asserts.add("qnd_collapse", qnd_at_balanced, 1e-6, qnd_at_balanced <= 1e-6);
    out.asserts.add("qd_no_collapse", qd_at_balanced, 1e-3, qd_at_balanced > 1e-3);
    out.asserts.add("qnd_weight_off", qnd_at_largest, 1e-6, qnd_at_largest <= 1e-6);
    out.asserts.add("qd_weight_off", qd_at_largest, 1e-6, qd_at_largest <= 1e-6);
    out.asserts.add_flag("qd_spread_monotone", monotone);

    if (qc.value("classical_check", true)) {
        // the dynamically preferred record: solution of l'' = Omega^2 l - g
        // through the lattice boundary values
        const double s0 = p.g / (p.Omega * p.Omega);
        const double A = bnd.first - s0;
        const double B = (bnd.second - s0 - A * std::cosh(p.Omega * w.T)) /
                         std::sinh(p.Omega * w.T);
        SampledSeries lcl = sample_series(w, [&](double t) {
            const double s = p.Omega * (t - w.tau_start);
            return s0 + A * std::cosh(s) + B * std::sinh(s);
        });
        const SampledSeries pert =
            make_fourier_record(w, spec.seed + 1000, spec.n_modes, 1.0);
        const double dl = qc.value("classical_delta_l_sq", 8.0 * balanced);
        double best = -std::numeric_limits<double>::infinity();
        double best_eps = -1.0;
        json scan = json::array();
        for (double eps : {-0.2, -0.1, 0.0, 0.1, 0.2}) {
            std::vector<double> v(w.n_grid);
            for (int i = 0; i < w.n_grid; ++i) v[i] = lcl[i] + eps * pert[i];
            PositionMonitorConfig pc{SampledSeries(w, std::move(v)), dl, w, p};
            const double lp = qd_log_probability(pc, n_slices, bnd);
            scan.push_back({{"eps", eps}, {"log_p", lp}});
            if (lp > best) {
                best = lp;
                best_eps = eps;
            }
        }
        out.results["classical_scan"] = scan;
        out.asserts.add_flag("classical_trajectory_maximizes", best_eps == 0.0);
    }
    out.csv = csv.str();
    return out;
}

// ---- driver -----------------------------------------------------------

std::string output_dir(const json& cfg) {
    if (cfg.contains("output") && cfg.at("output").contains("dir"))
        return cfg.at("output").at("dir").get<std::string>();
    if (const char* env = std::getenv("GRAVQND_OUTPUT_DIR")) return env;
    return ".";
}

RunResult finalize(const json& cfg, const std::string& scenario,
                   ScenarioOutput&& so, bool write_files) {
    RunResult rr;
    rr.status = so.asserts.all_pass ? 0 : 1;
    json summary;
    summary["scenario"] = scenario;
    summary["version"] = kVersion;
    summary["config"] = cfg;
    summary["results"] = so.results;
    summary["assertions"] = so.asserts.entries;
    summary["pass"] = so.asserts.all_pass;
    summary["timestamp"] = iso_timestamp();
    rr.summary = std::move(summary);
    rr.series_csv = std::move(so.csv);

    if (write_files) {
        namespace fs = std::filesystem;
        const fs::path dir = output_dir(cfg);
        fs::create_directories(dir);
        const json out = cfg.value("output", json::object());
        const fs::path sp = dir / out.value("summary", "summary.json");
        const fs::path cp = dir / out.value("series", "series.csv");
        std::ofstream(sp) << rr.summary.dump(2) << "\n";
        std::ofstream(cp) << rr.series_csv;
        rr.summary_path = sp.string();
        rr.series_path = cp.string();
    }
    return rr;
}

ScenarioOutput dispatch(const std::string& scenario, const json& cfg) {
    const PhysicalParams p = parse_params(cfg);
    const MeasurementWindow w = parse_window(cfg);
    if (scenario == "riccati-check") return scenario_riccati(cfg, p, w);
    if (scenario == "commutator") return scenario_commutator(cfg, p, w);
    if (scenario == "probability") return scenario_probability(cfg, p, w);
    if (scenario == "uniform-check") return scenario_uniform(cfg, p, w);
    if (scenario == "limit-sweep") return scenario_limit(cfg, p, w);
    if (scenario == "oracle-compare") return scenario_oracle(cfg, p, w);
    if (scenario == "qd-contrast") return scenario_qd_contrast(cfg, p, w);
    throw DomainError("unknown scenario: " + scenario);
}

} // namespace

RunResult run_config(const json& cfg, bool write_files) {
    RunResult rr;
    try {
        if (!cfg.contains("scenario"))
            throw DomainError("config needs a scenario field");
        const std::string scenario = cfg.at("scenario").get<std::string>();
        ScenarioOutput so = dispatch(scenario, cfg);
        return finalize(cfg, scenario, std::move(so), write_files);
    } catch (const nlohmann::json::exception& e) {
        rr.status = 2;
        rr.summary = {{"error", e.what()}, {"status", 2}};
    } catch (const DomainError& e) {
        rr.status = 3;
        rr.summary = {{"error", e.what()}, {"status", 3}};
    } catch (const UsageError& e) {
        rr.status = 3;
        rr.summary = {{"error", e.what()}, {"status", 3}};
    } catch (const DivergenceError& e) {
        rr.status = 3;
        rr.summary = {{"error", e.what()}, {"status", 3}};
    } catch (const SingularError& e) {
        rr.status = 3;
        rr.summary = {{"error", e.what()}, {"status", 3}};
    }
    return rr;
}

RunResult run_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        RunResult rr;
        rr.status = 2;
        rr.summary = {{"error", "cannot open config: " + path}, {"status", 2}};
        return rr;
    }
    json cfg;
    try {
        cfg = json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        RunResult rr;
        rr.status = 2;
        rr.summary = {{"error", e.what()}, {"status", 2}};
        return rr;
    }
    return run_config(cfg);
}

RunResult sweep_config(const json& cfg, const std::string& axis,
                       const std::vector<double>& values, bool write_files) {
    RunResult rr;
    try {
        if (values.size() < 2)
            throw DomainError("sweep needs at least two axis values");
        for (double v : values)
            if (!(v > 0.0) || !std::isfinite(v))
                throw DomainError("sweep axis values must be positive and finite");
        if (axis != "delta_a_sq" && axis != "n_slices" && axis != "mass")
            throw DomainError("unknown sweep axis: " + axis);

        struct SweepRun {
            double value;
            int status;
            std::vector<std::pair<std::string, double>> scalars;
        };
        std::vector<SweepRun> done;
        json runs = json::array();
        for (double v : values) {
            json c2 = cfg;
            if (axis == "delta_a_sq")
                c2["window"]["delta_a_sq"] = v;
            else if (axis == "n_slices")
                c2["oracle"]["n_slices"] = static_cast<int>(v);
            else {
                if (!c2.contains("params")) c2["params"] = json::object();
                if (!c2["params"].contains("overrides"))
                    c2["params"]["overrides"] = json::object();
                c2["params"]["overrides"]["m"] = v;
            }
            const RunResult one = run_config(c2, /*write_files=*/false);
            SweepRun sr{v, one.status, {}};
            if (one.status <= 1 && one.summary.contains("results"))
                for (const auto& [k, val] : one.summary.at("results").items())
                    if (val.is_number())
                        sr.scalars.emplace_back(k, val.get<double>());
            done.push_back(std::move(sr));
            runs.push_back({{"value", v}, {"status", one.status}});
        }
        // columns: fixed prefix + numeric summary keys of the first
        // successful run, in its own order
        std::vector<std::string> header{"axis", "value", "status", "pass"};
        for (const SweepRun& sr : done)
            if (sr.status <= 1) {
                for (const auto& [k, val] : sr.scalars) header.push_back(k);
                break;
            }
        CsvWriter wcsv(header);
        for (const SweepRun& sr : done) {
            std::vector<std::string> row{axis, fmt_double(sr.value),
                                         std::to_string(sr.status),
                                         sr.status == 0 ? "1" : "0"};
            for (size_t i = 4; i < header.size(); ++i) {
                std::string cell;
                for (const auto& [k, val] : sr.scalars)
                    if (k == header[i]) {
                        cell = fmt_double(val);
                        break;
                    }
                row.push_back(cell);
            }
            wcsv.append_row_strings(std::move(row));
        }
        rr.series_csv = wcsv.str();
        rr.summary = {{"sweep_axis", axis},
                      {"values", values},
                      {"version", kVersion},
                      {"runs", runs},
                      {"timestamp", iso_timestamp()}};
        rr.status = 0;
        if (write_files) {
            namespace fs = std::filesystem;
            const fs::path dir = output_dir(cfg);
            fs::create_directories(dir);
            const fs::path sp = dir / "sweep_summary.json";
            const fs::path cp = dir / "sweep.csv";
            std::ofstream(sp) << rr.summary.dump(2) << "\n";
            std::ofstream(cp) << rr.series_csv;
            rr.summary_path = sp.string();
            rr.series_path = cp.string();
        }
    } catch (const nlohmann::json::exception& e) {
        rr.status = 2;
        rr.summary = {{"error", e.what()}, {"status", 2}};
    } catch (const DomainError& e) {
        rr.status = 3;
        rr.summary = {{"error", e.what()}, {"status", 3}};
    }
    return rr;
}

RunResult sweep_file(const std::string& path, const std::string& axis,
                     const std::vector<double>& values) {
    std::ifstream in(path);
    if (!in) {
        RunResult rr;
        rr.status = 2;
        rr.summary = {{"error", "cannot open config: " + path}, {"status", 2}};
        return rr;
    }
    json cfg;
    try {
        cfg = json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        RunResult rr;
        rr.status = 2;
        rr.summary = {{"error", e.what()}, {"status", 2}};
        return rr;
    }
    return sweep_config(cfg, axis, values);
}

} // namespace gravqnd
