#include "gravqnd/qnd_family.hpp"

#include <cmath>

namespace gravqnd {

QndVariable::QndVariable(SigmaChoice choice, double tau_ref,
                         const PhysicalParams& params,
                         std::optional<SampledSeries> table)
    : choice_(choice),
      tau_ref_(tau_ref),
      m_(params.m),
      omega_(params.Omega),
      table_(std::move(table)) {
    if (choice_ == SigmaChoice::Tabulated) {
        if (!table_)
            throw DomainError("tabulated sigma requires a sample table");
        for (double v : table_->values)
            if (v == 0.0)
                throw DomainError("tabulated sigma must not vanish on the grid");
    }
}

double QndVariable::sigma(double t) const {
    switch (choice_) {
        case SigmaChoice::CoshDefault:
            return std::cosh(omega_ * (t - tau_ref_));
        case SigmaChoice::UnitConstant:
            return 1.0;
        case SigmaChoice::Tabulated:
            return table_->value_at(t);
    }
    return 1.0;
}

double QndVariable::f(double t) const {
    return -m_ * omega_ * std::tanh(omega_ * (t - tau_ref_));
}

double riccati_rhs(double f_val, const PhysicalParams& p) {
    return f_val * f_val / p.m - 2.0 * p.m * p.g / p.R;
}

double analytic_f(double t, double tau_ref, const PhysicalParams& p) {
    return -p.m * p.Omega * std::tanh(p.Omega * (t - tau_ref));
}

SampledSeries integrate_riccati_oracle(double f0, const MeasurementWindow& w,
                                       const PhysicalParams& p, int steps) {
    if (steps < 1) throw DomainError("riccati oracle needs steps >= 1");
    const double bound = 10.0 * p.m * p.Omega;
    auto rhs = [&](double f) { return riccati_rhs(f, p); };
    auto rk4_segment = [&](double& f, double t0, double t1, int n) {
        const double h = (t1 - t0) / n;
        for (int i = 0; i < n; ++i) {
            const double k1 = rhs(f);
            const double k2 = rhs(f + 0.5 * h * k1);
            const double k3 = rhs(f + 0.5 * h * k2);
            const double k4 = rhs(f + h * k3);
            f += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (!std::isfinite(f) || std::abs(f) > bound)
                throw DivergenceError("riccati trajectory blew up (initial value "
                                      "outside the attracting basin)");
        }
    };

    // Distribute the requested step count over [tau_start, tau_end],
    // landing exactly on grid nodes.
    std::vector<double> out(w.n_grid);
    double f = f0;
    const double lead = w.clip_start() - w.tau_start;
    const int n_lead = std::max(1, static_cast<int>(std::ceil(steps * lead / w.T)));
    rk4_segment(f, w.tau_start, w.clip_start(), n_lead);
    out[0] = f;
    const int per_cell =
        std::max(1, static_cast<int>(std::ceil(double(steps) / (w.n_grid - 1))));
    for (int i = 1; i < w.n_grid; ++i) {
        rk4_segment(f, w.node(i - 1), w.node(i), per_cell);
        out[i] = f;
    }
    return SampledSeries(w, std::move(out));
}

QndVariable build_qnd_variable(SigmaChoice sigma_choice,
                               const MeasurementWindow& window,
                               const PhysicalParams& params,
                               std::optional<SampledSeries> table) {
    return QndVariable(sigma_choice, window.tau_start, params, std::move(table));
}

HeisenbergCoeffs heisenberg_coeffs(double t, const PhysicalParams& p) {
    const double ch = std::cosh(p.Omega * t);
    const double sh = std::sinh(p.Omega * t);
    HeisenbergCoeffs c;
    c.u_l = ch;
    c.u_p = sh / (p.m * p.Omega);
    c.v_l = p.m * p.Omega * sh;
    c.v_p = ch;
    c.d_l = (p.g / (p.Omega * p.Omega)) * (1.0 - ch);
    c.d_p = -(p.m * p.g / p.Omega) * sh;
    return c;
}

HeisenbergAB qnd_heisenberg_ab(double t, const QndVariable& qnd,
                               const PhysicalParams& p) {
    const HeisenbergCoeffs c = heisenberg_coeffs(t - qnd.tau_ref(), p);
    const double s = qnd.sigma(t);
    const double fv = qnd.f(t);
    return {s * (c.v_l + fv * c.u_l), s * (c.v_p + fv * c.u_p)};
}

Complex qnd_commutator(double t1, double t2, const QndVariable& qnd,
                       const PhysicalParams& p) {
    const HeisenbergAB a = qnd_heisenberg_ab(t1, qnd, p);
    const HeisenbergAB b = qnd_heisenberg_ab(t2, qnd, p);
    return Complex(0.0, p.hbar * (a.U * b.V - b.U * a.V));
}

std::pair<double, double> conjugate_q(double t, double tau_ref,
                                      const PhysicalParams& p) {
    const double s = p.Omega * (t - tau_ref);
    return {std::sinh(s) / (p.m * p.Omega), std::cosh(s)};
}

} // namespace gravqnd
