#pragma once

// The family of back-action-evading variables A(t) = rho(t) l + sigma(t) p.
//
// The ratio f = rho/sigma obeys the Riccati equation
//     df/dt = f^2/m - 2 m g / R,
// whose bounded solution through f(tau_ref) = 0 is
//     f(t) = -m Omega tanh(Omega (t - tau_ref)).
// Any choice of sigma(t) then yields a variable that commutes with itself
// at unequal times; sigma is a free function of the family.

#include <cstdint>
#include <optional>

#include "gravqnd/core.hpp"

namespace gravqnd {

enum class SigmaChoice { CoshDefault, UnitConstant, Tabulated };

/// One member of the family: sigma choice + the tanh ratio anchored at
/// tau_ref. rho(t) = sigma(t) * f(t) always.
class QndVariable {
  public:
    QndVariable(SigmaChoice choice, double tau_ref, const PhysicalParams& params,
                std::optional<SampledSeries> table = std::nullopt);

    double sigma(double t) const;
    double f(double t) const;
    double rho(double t) const { return sigma(t) * f(t); }

    SigmaChoice choice() const { return choice_; }
    double tau_ref() const { return tau_ref_; }

  private:
    SigmaChoice choice_;
    double tau_ref_;
    double m_;
    double omega_;
    std::optional<SampledSeries> table_;
};

/// Right-hand side of the Riccati equation for f = rho/sigma.
double riccati_rhs(double f_val, const PhysicalParams& params);

/// Closed form f(t) = -m Omega tanh(Omega (t - tau_ref)); bounded in
/// (-m Omega, m Omega).
double analytic_f(double t, double tau_ref, const PhysicalParams& params);

/// Fixed-step RK4 integration of the Riccati equation from
/// f(tau_start) = f0, sampled on the window grid. Independent oracle for
/// analytic_f. Throws DivergenceError if |f| exceeds 10 m Omega (initial
/// values outside |f0| < m Omega blow up in finite time).
SampledSeries integrate_riccati_oracle(double f0, const MeasurementWindow& window,
                                       const PhysicalParams& params, int steps);

/// sigma_choice -> family member anchored at the window start. A
/// tabulated sigma must not vanish anywhere on the grid.
QndVariable build_qnd_variable(SigmaChoice sigma_choice,
                               const MeasurementWindow& window,
                               const PhysicalParams& params,
                               std::optional<SampledSeries> table = std::nullopt);

/// Linearized Heisenberg flow over elapsed time t (relative to the
/// anchor): l(t) = u_l l0 + u_p p0 + d_l, p(t) = v_l l0 + v_p p0 + d_p.
/// The potential m g l - (m Omega^2/2) l^2 gives hyperbolic coefficients
/// and c-number drifts solving l'' = Omega^2 l - g with zero initial data.
struct HeisenbergCoeffs {
    double u_l, u_p;
    double v_l, v_p;
    double d_l, d_p;
};

HeisenbergCoeffs heisenberg_coeffs(double t, const PhysicalParams& params);

/// Heisenberg-picture coefficients of A(t) on (l0, p0):
/// A(t) = U(t) l0 + V(t) p0 + drift. U vanishes identically for the
/// family ratio f; that is the evasion property in pointwise form.
struct HeisenbergAB {
    double U, V;
};

HeisenbergAB qnd_heisenberg_ab(double t, const QndVariable& qnd,
                               const PhysicalParams& params);

/// [A(t1), A(t2)] = i hbar (U1 V2 - U2 V1); identically zero for family
/// members. Drifts are c-numbers and drop out.
Complex qnd_commutator(double t1, double t2, const QndVariable& qnd,
                       const PhysicalParams& params);

/// Coefficients (on p, on l) of the conjugate partner
/// Q(t) = p sinh(Omega s)/(m Omega) + l cosh(Omega s), s = t - tau_ref.
std::pair<double, double> conjugate_q(double t, double tau_ref,
                                      const PhysicalParams& params);

} // namespace gravqnd
