#include "gravqnd/core.hpp"

#include <cmath>

namespace gravqnd {

void derive_rates(PhysicalParams& p) {
    p.g = p.G * p.M / (p.R * p.R);
    p.Omega = std::sqrt(2.0 * p.g / p.R);
    p.omega_sq = -(p.Omega * p.Omega);
}

PhysicalParams make_params(UnitMode mode, const ParamOverrides& o) {
    PhysicalParams p;
    if (mode == UnitMode::Natural) {
        // m = hbar = Omega = 1: R = 2 and G*M = 4 give g = 1, 2g/R = 1.
        p.m = 1.0;
        p.hbar = 1.0;
        p.G = 1.0;
        p.M = 4.0;
        p.R = 2.0;
    } else {
        p.m = 1.0;
        p.hbar = 1.054571817e-34;
        p.G = 6.674e-11;
        p.M = 5.972e24;
        p.R = 6.371e6;
    }
    auto apply = [](double& field, double v, const char* name) {
        if (v == 0.0) return;
        if (!(v > 0.0) || !std::isfinite(v))
            throw DomainError(std::string("override for ") + name +
                              " must be positive and finite");
        field = v;
    };
    apply(p.m, o.m, "m");
    apply(p.G, o.G, "G");
    apply(p.M, o.M, "M");
    apply(p.R, o.R, "R");
    apply(p.hbar, o.hbar, "hbar");
    derive_rates(p);
    return p;
}

MeasurementWindow::MeasurementWindow(double tau_start_, double tau_end_,
                                     double delta_a_sq_, int n_grid_,
                                     double eps_offset_)
    : tau_start(tau_start_),
      tau_end(tau_end_),
      T(tau_end_ - tau_start_),
      delta_a_sq(delta_a_sq_),
      n_grid(n_grid_),
      eps_offset(eps_offset_) {
    if (!(tau_end > tau_start))
        throw DomainError("tau_end must exceed tau_start");
    if (!(delta_a_sq > 0.0))
        throw DomainError("delta_a_sq must be positive");
    if (n_grid < 3 || n_grid % 2 == 0)
        throw DomainError("n_grid must be odd and >= 3");
    if (!(eps_offset > 0.0 && eps_offset < 0.1))
        throw DomainError("eps_offset must lie in (0, 0.1)");
}

SampledSeries::SampledSeries(const MeasurementWindow& w, std::vector<double> v)
    : window(w), values(std::move(v)) {
    if (static_cast<int>(values.size()) != window.n_grid)
        throw UsageError("series length must equal the window grid size");
}

double SampledSeries::value_at(double t) const {
    const double a = window.clip_start();
    const double h = window.grid_step();
    double x = (t - a) / h;
    if (x <= 0.0) return values.front();
    if (x >= window.n_grid - 1) return values.back();
    const int i = static_cast<int>(x);
    const double w = x - i;
    return values[i] * (1.0 - w) + values[i + 1] * w;
}

namespace {

template <class T>
T simpson_impl(std::span<const T> y, double h) {
    const int n = static_cast<int>(y.size());
    if (n < 3 || n % 2 == 0)
        throw UsageError("Simpson quadrature needs an odd sample count >= 3");
    T s4{}, s2{};
    for (int i = 1; i < n - 1; i += 2) s4 += y[i];
    for (int i = 2; i < n - 1; i += 2) s2 += y[i];
    return (h / 3.0) * (y[0] + y[n - 1] + 4.0 * s4 + 2.0 * s2);
}

} // namespace

double simpson(std::span<const double> values, double h) {
    return simpson_impl(values, h);
}

Complex simpson(std::span<const Complex> values, double h) {
    return simpson_impl(values, h);
}

double integrate(const SampledSeries& series) {
    return simpson(std::span<const double>(series.values), series.window.grid_step());
}

} // namespace gravqnd
