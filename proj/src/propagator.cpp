#include "gravqnd/propagator.hpp"

#include <cmath>

#include "gravqnd/records.hpp"

namespace gravqnd {

Complex alpha_coefficient(double x, const PhysicalParams& p) {
    if (weight_off(x)) return {0.0, 0.0};
    const double mh = p.m * p.hbar;
    const double s = x * x;
    const double b = 4.0 * mh * mh;
    return Complex(s - b, -4.0 * mh * x) / (x * (s + b));
}

AlphaBeta make_alpha_beta(const MeasurementWindow& w, const QndVariable& qnd,
                          const PhysicalParams& p) {
    SampledSeries beta = sample_series(w, [&](double t) {
        const double th = std::tanh(p.Omega * (t - qnd.tau_ref()));
        return 1.0 / (th * qnd.sigma(t));
    });
    return {alpha_coefficient(w.resolution_time_product(), p), std::move(beta)};
}

GammaCaps make_gamma_caps(const AlphaBeta& ab, const MeasurementWindow& w,
                          const PhysicalParams& p) {
    const double x = w.resolution_time_product();
    const int n = w.n_grid;
    std::vector<double> gam(n), Gam(n);
    const double mh = p.m * p.hbar;
    for (int i = 0; i < n; ++i) {
        const double b2 = ab.beta[i] * ab.beta[i];
        if (weight_off(x)) {
            gam[i] = 4.0 * p.m * p.m * p.g / p.R - 4.0 * p.m * p.m * p.omega_sq * b2;
            Gam[i] = 0.0; // formally divergent; the weight-off density is zero anyway
            continue;
        }
        const double s = x * x;
        const double b = 4.0 * mh * mh;
        gam[i] = 4.0 * p.m * p.m * p.g / p.R -
                 4.0 * p.m * p.m * p.omega_sq * b2 * s / (s + b);
        Gam[i] = (p.m * p.omega_sq * b2 * x / p.hbar) * (s - b) / (s + b);
    }
    return {SampledSeries(w, std::move(gam)), SampledSeries(w, std::move(Gam))};
}

namespace {

struct Density13 {
    Complex a2_direct;      // -alpha a^2
    Complex a2_fraction;    // N1 / D
    Complex beta2_fraction; // N2 / D
    Complex cross_fraction; // N3 / D
    Complex sum() const {
        return a2_direct + a2_fraction + beta2_fraction + cross_fraction;
    }
};

Density13 density_13(double a_val, double beta_val, Complex alpha,
                     const PhysicalParams& p, double x) {
    if (weight_off(x)) return {};
    const double m2 = p.m * p.m;
    const Complex n1 = 4.0 * a_val * a_val * p.g * m2 * alpha * alpha / p.R;
    const Complex n2 =
        Complex(-m2 * p.g * p.g * beta_val * beta_val / (2.0 * p.hbar * p.hbar), 0.0);
    const Complex n3 = Complex(0.0, 2.0 * a_val * m2 * beta_val * p.g * p.Omega / p.hbar) * alpha;
    const Complex den = 4.0 * m2 * p.g * alpha / p.R +
                        Complex(0.0, p.m * p.omega_sq * beta_val * beta_val / p.hbar);
    if (std::abs(den) < 1e-300)
        throw SingularError("propagator denominator underflow");
    return {-alpha * a_val * a_val, n1 / den, n2 / den, n3 / den};
}

} // namespace

Complex exponent_integrand_13(double t, double a_val, const AlphaBeta& ab,
                              const PhysicalParams& p, const MeasurementWindow& w) {
    return density_13(a_val, ab.beta.value_at(t), ab.alpha, p,
                      w.resolution_time_product())
        .sum();
}

ComplexExponent log_propagator(const SampledSeries& a, const QndVariable& qnd,
                               const PhysicalParams& p, const MeasurementWindow& w) {
    const AlphaBeta ab = make_alpha_beta(w, qnd, p);
    const double x = w.resolution_time_product();
    const int n = w.n_grid;
    std::vector<Complex> t1(n), t2(n), t3(n), t4(n);
    ComplexExponent out;
    for (int i = 0; i < n; ++i) {
        const Density13 d = density_13(a[i], ab.beta[i], ab.alpha, p, x);
        t1[i] = d.a2_direct;
        t2[i] = d.a2_fraction;
        t3[i] = d.beta2_fraction;
        t4[i] = d.cross_fraction;
        const double mag = std::abs(d.sum());
        if (mag > out.max_integrand_abs) {
            out.max_integrand_abs = mag;
            out.max_node = i;
        }
    }
    const double h = w.grid_step();
    out.terms = {{"a2_direct", simpson(std::span<const Complex>(t1), h)},
                 {"a2_fraction", simpson(std::span<const Complex>(t2), h)},
                 {"beta2_fraction", simpson(std::span<const Complex>(t3), h)},
                 {"cross_fraction", simpson(std::span<const Complex>(t4), h)}};
    for (const auto& [name, v] : out.terms) out.total += v;
    return out;
}

ProbabilityTerms probability_density_14(double a_val, double beta_val,
                                        double gamma_val, double Gamma_val,
                                        double x, const PhysicalParams& p) {
    if (weight_off(x)) return {0.0, 0.0, 0.0, 0.0};
    const double m2 = p.m * p.m;
    const double mh = p.m * p.hbar;
    const double s = x * x;
    const double b = 4.0 * mh * mh;
    const double gg = gamma_val * gamma_val + Gamma_val * Gamma_val;
    if (gg < 1e-300) throw SingularError("gamma^2 + Gamma^2 underflow");

    ProbabilityTerms t{};
    t.term1 = -2.0 * (s - b) / (x * (s + b)) * a_val * a_val;
    t.term2 = (8.0 * a_val * a_val * m2 * p.g / (p.R * gg)) *
              (gamma_val * (s - b) - 4.0 * Gamma_val * mh * x) / (x * (s + b));
    t.term3 = 4.0 * a_val * m2 * beta_val * p.g * p.Omega * Gamma_val / (p.hbar * gg);
    // term4 with numerator and denominator divided by beta^4: finite as
    // beta -> inf, identical otherwise.
    const double inv_b2 = 1.0 / (beta_val * beta_val);
    const double d4 = (4.0 * m2 * p.g / (x * p.R)) * (s - b) / (s + b);
    const double e4 = p.m * p.omega_sq / p.hbar -
                      16.0 * m2 * p.m * p.g * p.hbar * inv_b2 / (p.R * (s + b));
    const double den4 = d4 * inv_b2 * d4 * inv_b2 + e4 * e4;
    if (den4 < 1e-300) throw SingularError("probability denominator underflow");
    t.term4 = -(m2 * p.g * p.g / (p.hbar * p.hbar)) * d4 * inv_b2 / den4;
    return t;
}

ComplexExponent log_probability_14(const SampledSeries& a, const AlphaBeta& ab,
                                   const GammaCaps& gc, const PhysicalParams& p,
                                   const MeasurementWindow& w) {
    const double x = w.resolution_time_product();
    const int n = w.n_grid;
    std::vector<double> t1(n), t2(n), t3(n), t4(n);
    ComplexExponent out;
    for (int i = 0; i < n; ++i) {
        const ProbabilityTerms d =
            probability_density_14(a[i], ab.beta[i], gc.gamma[i], gc.Gamma[i], x, p);
        t1[i] = d.term1;
        t2[i] = d.term2;
        t3[i] = d.term3;
        t4[i] = d.term4;
        const double mag = std::abs(d.sum());
        if (mag > out.max_integrand_abs) {
            out.max_integrand_abs = mag;
            out.max_node = i;
        }
    }
    const double h = w.grid_step();
    out.terms = {{"term1", Complex(simpson(std::span<const double>(t1), h), 0.0)},
                 {"term2", Complex(simpson(std::span<const double>(t2), h), 0.0)},
                 {"term3", Complex(simpson(std::span<const double>(t3), h), 0.0)},
                 {"term4", Complex(simpson(std::span<const double>(t4), h), 0.0)}};
    for (const auto& [name, v] : out.terms) out.total += v;
    return out;
}

UniformCheckReport uniform_probability_check(const PhysicalParams& p,
                                             const MeasurementWindow& window,
                                             int trials, std::uint64_t seed,
                                             SigmaChoice sigma, int n_modes,
                                             double amplitude) {
    UniformCheckReport rep;
    rep.seed = seed;
    rep.trials = trials;
    rep.delta_at_condition = 2.0 * p.m * p.hbar / window.T;
    const MeasurementWindow w = window.with_delta(rep.delta_at_condition);
    const MeasurementWindow w_off = window.with_delta(rep.delta_at_condition * (1.0 + 1e-3));

    const QndVariable qnd = build_qnd_variable(sigma, w, p);
    const AlphaBeta ab = make_alpha_beta(w, qnd, p);
    const GammaCaps gc = make_gamma_caps(ab, w, p);
    const AlphaBeta ab_off = make_alpha_beta(w_off, qnd, p);
    const GammaCaps gc_off = make_gamma_caps(ab_off, w_off, p);

    for (int k = 0; k < trials; ++k) {
        const SampledSeries a = make_fourier_record(w, seed + k, n_modes, amplitude);
        const ComplexExponent lp = log_probability_14(a, ab, gc, p, w);
        rep.max_abs_log_p = std::max(rep.max_abs_log_p, std::abs(lp.total.real()));
        for (const auto& [name, v] : lp.terms)
            rep.max_abs_per_term = std::max(rep.max_abs_per_term, std::abs(v.real()));
        const ComplexExponent lu = log_propagator(a, qnd, p, w);
        rep.max_abs_two_re_13 =
            std::max(rep.max_abs_two_re_13, std::abs(2.0 * lu.total.real()));
        if (k == 0) {
            const ComplexExponent off = log_probability_14(a, ab_off, gc_off, p, w_off);
            rep.off_condition_log_p = off.total.real();
        }
    }
    // a == 0 off-condition: only the readout-free fourth term survives.
    {
        const SampledSeries zero(w_off, std::vector<double>(w_off.n_grid, 0.0));
        const ComplexExponent off = log_probability_14(zero, ab_off, gc_off, p, w_off);
        rep.fourth_term_zero_record = off.terms[3].second.real();
    }
    // Unit-robust scale: what the detuned weight assigns to record 0.
    const double scale = std::max(1.0, std::abs(rep.off_condition_log_p));
    rep.threshold = 1e-10 * scale;
    rep.pass = rep.max_abs_log_p <= rep.threshold &&
               rep.max_abs_per_term <= rep.threshold &&
               rep.max_abs_two_re_13 <= rep.threshold;
    return rep;
}

namespace {

double fit_inverse_delta(const std::vector<double>& log_p,
                         const std::vector<double>& deltas) {
    // least squares of log P against 1/delta through the origin
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < deltas.size(); ++i) {
        const double w = 1.0 / deltas[i];
        num += log_p[i] * w;
        den += w * w;
    }
    return num / den;
}

} // namespace

LimitReport zero_resolution_limit(const std::vector<SampledSeries>& records,
                                  const PhysicalParams& p,
                                  const MeasurementWindow& window,
                                  const std::vector<double>& delta_sequence,
                                  SigmaChoice sigma) {
    if (delta_sequence.size() < 2)
        throw DomainError("delta sequence needs at least two entries");
    for (size_t i = 0; i < delta_sequence.size(); ++i) {
        if (!(delta_sequence[i] > 0.0))
            throw DomainError("delta sequence must be positive");
        if (i > 0 && !(delta_sequence[i] < delta_sequence[i - 1]))
            throw DomainError("delta sequence must be strictly decreasing");
    }
    if (records.empty()) throw DomainError("limit study needs at least one record");

    LimitReport rep;
    rep.deltas = delta_sequence;

    auto sweep = [&](const PhysicalParams& pp) {
        const QndVariable qnd = build_qnd_variable(sigma, window, pp);
        std::vector<double> cs;
        std::vector<std::vector<double>> table;
        for (const SampledSeries& a : records) {
            std::vector<double> lp;
            for (double d : delta_sequence) {
                const MeasurementWindow w = window.with_delta(d);
                const AlphaBeta ab = make_alpha_beta(w, qnd, pp);
                const GammaCaps gc = make_gamma_caps(ab, w, pp);
                lp.push_back(log_probability_14(a, ab, gc, pp, w).total.real());
            }
            cs.push_back(fit_inverse_delta(lp, delta_sequence));
            table.push_back(std::move(lp));
        }
        return std::pair(cs, table);
    };

    auto [cs, table] = sweep(p);
    rep.log_p = std::move(table);
    rep.fitted_c = cs;
    double cmin = cs[0], cmax = cs[0], csum = 0.0;
    for (double c : cs) {
        cmin = std::min(cmin, c);
        cmax = std::max(cmax, c);
        csum += c;
    }
    rep.c_mean = csum / cs.size();
    rep.c_spread_rel = (cmax - cmin) / std::abs(rep.c_mean);

    // Window-integral comparisons (the readout-free part of the density).
    const QndVariable qnd = build_qnd_variable(sigma, window, p);
    const AlphaBeta ab = make_alpha_beta(window, qnd, p);
    const double GM = p.G * p.M;
    std::vector<double> b2(window.n_grid), b4(window.n_grid);
    for (int i = 0; i < window.n_grid; ++i) {
        const double bb = ab.beta[i] * ab.beta[i];
        b2[i] = p.m * p.m * GM / (p.R * bb);
        b4[i] = 4.0 * p.m * p.m * GM / (p.R * bb * bb);
    }
    const double h = window.grid_step();
    rep.c_beta2_integral = simpson(std::span<const double>(b2), h) / window.T;
    rep.c_beta4_integral = simpson(std::span<const double>(b4), h) / window.T;

    {
        PhysicalParams p2 = p;
        p2.hbar = 2.0 * p.hbar;
        auto [cs2, t2] = sweep(p2);
        double sum = 0.0;
        for (double c : cs2) sum += c;
        rep.c_hbar_doubled = sum / cs2.size();
        rep.hbar_change_rel = std::abs(rep.c_hbar_doubled / rep.c_mean - 1.0);
    }
    {
        PhysicalParams p2 = p;
        p2.m = 2.0 * p.m;
        auto [cs2, t2] = sweep(p2);
        double sum = 0.0;
        for (double c : cs2) sum += c;
        rep.c_mass_doubled = sum / cs2.size();
        rep.mass_ratio = rep.c_mass_doubled / rep.c_mean;
    }
    return rep;
}

} // namespace gravqnd
