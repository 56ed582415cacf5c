#include "gravqnd/lattice.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace gravqnd {

namespace {

struct SliceDensities {
    Complex q2;
    Complex q1;
    Complex c0;
};

SliceDensities slice_densities(double t, double a_val, const QndVariable& qnd,
                               const PhysicalParams& p, double x, double omega_sq,
                               Complex alpha) {
    const double m = p.m, h = p.hbar, g = p.g, R = p.R;
    SliceDensities d;
    d.q2 = Complex(0.0, -m * omega_sq / (2.0 * h));
    d.q1 = Complex(0.0, -m * g / h);
    d.c0 = {};
    if (!weight_off(x)) {
        const double th = std::tanh(p.Omega * (t - qnd.tau_ref()));
        const double s = qnd.sigma(t);
        const Complex xc(x, 2.0 * m * h); // X + 2 i m hbar
        d.q2 += -2.0 * m * m * g * s * s * th * th / (R * x) +
                Complex(0.0, 8.0 * h * m * m * m * g * s * s * th * th / (R * x)) / xc;
        d.q1 += -2.0 * a_val * m * s * p.Omega * th / x +
                Complex(0.0, 8.0 * h * m * m * a_val * s * p.Omega * th / x) / xc;
        d.c0 = -alpha * a_val * a_val;
    }
    return d;
}

} // namespace

SlicedLattice build_lattice(const SampledSeries& a, const QndVariable& qnd,
                            const PhysicalParams& p, const MeasurementWindow& w,
                            int n_slices, std::pair<double, double> boundary,
                            std::optional<double> omega_sq_override,
                            std::optional<PositionWeight> position_weight) {
    if (n_slices < 16) throw DomainError("lattice needs n_slices >= 16");
    if (!std::isfinite(boundary.first) || !std::isfinite(boundary.second))
        throw DomainError("lattice boundary must be finite");

    const int N = n_slices;
    const double dt = w.T / N;
    const double x = w.resolution_time_product();
    const double om2 = omega_sq_override.value_or(p.omega_sq);
    const Complex alpha = alpha_coefficient(x, p);
    const Complex kin(0.0, p.m / (2.0 * p.hbar * dt));

    // node-indexed accumulation, then fold l_0 = z', l_N = z''
    std::vector<Complex> diag(N + 1), off(N), src(N + 1);
    Complex c0{};
    for (int k = 0; k < N; ++k) {
        const double tm = w.tau_start + (k + 0.5) * dt;
        const double am = a.value_at(tm);
        const SliceDensities d = slice_densities(tm, am, qnd, p, x, om2, alpha);
        diag[k] += kin + d.q2 * (dt / 2.0);
        diag[k + 1] += kin + d.q2 * (dt / 2.0);
        off[k] += -2.0 * kin;
        src[k] += d.q1 * (dt / 2.0);
        src[k + 1] += d.q1 * (dt / 2.0);
        c0 += d.c0 * dt;
        if (position_weight) {
            const double xl = w.T * position_weight->delta_l_sq;
            if (!(xl > 0.0)) throw DomainError("delta_l_sq must be positive");
            if (!weight_off(xl)) {
                const double lt = position_weight->l_record->value_at(tm);
                diag[k] += -dt / (2.0 * xl);
                diag[k + 1] += -dt / (2.0 * xl);
                src[k] += dt * lt / xl;
                src[k + 1] += dt * lt / xl;
                c0 += -dt * lt * lt / xl;
            }
        }
    }
    const double z0 = boundary.first, z1 = boundary.second;
    c0 += diag[0] * z0 * z0 + src[0] * z0 + diag[N] * z1 * z1 + src[N] * z1;
    src[1] += off[0] * z0;
    src[N - 1] += off[N - 1] * z1;

    SlicedLattice lat;
    lat.n_slices = N;
    lat.dt = dt;
    lat.z_start = z0;
    lat.z_end = z1;
    lat.mass = p.m;
    lat.hbar = p.hbar;
    lat.quad_diag.assign(diag.begin() + 1, diag.begin() + N);
    lat.quad_offdiag.assign(off.begin() + 1, off.begin() + (N - 1));
    lat.source.assign(src.begin() + 1, src.begin() + N);
    lat.const_term = c0;
    return lat;
}

ComplexExponent gaussian_reduce(const SlicedLattice& lat) {
    const int n = static_cast<int>(lat.quad_diag.size());
    if (n < 1) throw DomainError("lattice has no interior nodes");

    // exponent l^T Q l + b^T l + c with Q_ii = quad_diag, Q_{i,i+1} =
    // quad_offdiag/2; integral = pi^{n/2} det(-Q)^{-1/2}
    // exp(c - b^T Q^{-1} b / 4). Pivots of the elimination give logdet
    // incrementally; the same sweep solves Q x = b.
    std::vector<Complex> piv(n), rhs(lat.source);
    Complex logdet{};
    piv[0] = lat.quad_diag[0];
    for (int i = 1; i < n; ++i) {
        const Complex e = lat.quad_offdiag[i - 1] * 0.5;
        if (std::abs(piv[i - 1]) < 1e-300)
            throw SingularError("singular lattice pivot");
        const Complex wfac = e / piv[i - 1];
        piv[i] = lat.quad_diag[i] - wfac * e;
        rhs[i] -= wfac * rhs[i - 1];
    }
    if (std::abs(piv[n - 1]) < 1e-300) throw SingularError("singular lattice pivot");
    for (int i = 0; i < n; ++i) logdet += std::log(-piv[i]);

    std::vector<Complex> sol(n);
    sol[n - 1] = rhs[n - 1] / piv[n - 1];
    for (int i = n - 2; i >= 0; --i)
        sol[i] = (rhs[i] - lat.quad_offdiag[i] * 0.5 * sol[i + 1]) / piv[i];
    Complex bqb{};
    for (int i = 0; i < n; ++i) bqb += lat.source[i] * sol[i];

    const double pi = std::numbers::pi;
    const Complex measure_unit =
        std::log(Complex(0.0, -lat.mass / (2.0 * pi * lat.hbar * lat.dt)));
    ComplexExponent out;
    out.terms = {
        {"measure", double(lat.n_slices) / 2.0 * measure_unit + double(n) / 2.0 * std::log(pi)},
        {"logdet", -0.5 * logdet},
        {"stationary", -0.25 * bqb},
        {"const", lat.const_term}};
    for (const auto& [name, v] : out.terms) out.total += v;
    return out;
}

double oracle_log_probability(const SampledSeries& a, const QndVariable& qnd,
                              const PhysicalParams& p, const MeasurementWindow& w,
                              int n_slices, std::pair<double, double> boundary) {
    const SlicedLattice lat = build_lattice(a, qnd, p, w, n_slices, boundary);
    return 2.0 * gaussian_reduce(lat).total.real();
}

SliceCheckReport momentum_slice_check(const PhysicalParams& p,
                                      const MeasurementWindow& w, double t,
                                      int trials, std::uint64_t seed) {
    SliceCheckReport rep;
    rep.trials = trials;
    rep.seed = seed;
    std::mt19937_64 gen(seed);
    auto uni = [&](double lo, double hi) {
        return lo + (hi - lo) * (static_cast<double>(gen() >> 11) * 0x1.0p-53);
    };
    const double x = w.resolution_time_product();
    if (weight_off(x))
        throw DomainError("slice check needs a finite delta_a_sq");
    const double th = std::tanh(p.Omega * (t - w.tau_start));
    for (int k = 0; k < trials; ++k) {
        const double sig = uni(0.5, 2.0);
        const double l_val = uni(-2.0, 2.0);
        const double a_val = uni(-2.0, 2.0);
        const double dt = uni(1e-3, 1e-2) * w.T;
        const double wv = a_val + p.m * sig * p.Omega * th * l_val;
        // exponent densities: c2 p^2 + c1 p
        const Complex c2 =
            Complex(0.0, 1.0 / p.hbar) * (1.0 / (2.0 * p.m) + Complex(0.0, p.hbar * sig * sig / x));
        const Complex c1(2.0 * sig * wv / x, 0.0);
        const Complex q2 = c2 * dt, q1 = c1 * dt;
        // closed form: sqrt(pi / -q2) exp(-q1^2/(4 q2))
        const Complex closed =
            std::sqrt(std::numbers::pi / -q2) * std::exp(-q1 * q1 / (4.0 * q2));
        // quadrature over +-12 Gaussian widths; Re(q2) = -sigma^2 dt / x < 0
        const double width = 1.0 / std::sqrt(-q2.real());
        const double pmax = 12.0 * width;
        const int nq = 100001;
        const double hq = 2.0 * pmax / (nq - 1);
        std::vector<Complex> vals(nq);
        for (int i = 0; i < nq; ++i) {
            const double pv = -pmax + i * hq;
            vals[i] = std::exp(q2 * pv * pv + q1 * pv);
        }
        const Complex numeric = simpson(std::span<const Complex>(vals), hq);
        const double rel = std::abs(numeric - closed) / std::abs(closed);
        rep.max_rel_err = std::max(rep.max_rel_err, rel);
    }
    rep.pass = rep.max_rel_err <= rep.tolerance;
    return rep;
}

} // namespace gravqnd
