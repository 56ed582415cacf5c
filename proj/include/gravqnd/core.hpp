#pragma once

// Shared foundation: physical parameters, measurement windows, sampled
// series on a uniform grid, and composite-Simpson quadrature.

#include <complex>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gravqnd {

using Complex = std::complex<double>;

// Error taxonomy. Domain/usage errors map to CLI exit status 3,
// evaluation failures (divergence, singular pivots) also map to 3,
// failed scenario assertions map to 1, config parse errors to 2.
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SingularError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class UnitMode { Natural, SiEarth };

struct ParamOverrides {
    double m = 0.0;      // 0 means "use mode default"
    double G = 0.0;
    double M = 0.0;
    double R = 0.0;
    double hbar = 0.0;
};

/// Particle mass, gravity source and the derived near-surface rates.
///
/// The oscillator frequency of the problem is imaginary, omega = i*Omega
/// with Omega = sqrt(2 g / R). It is never materialized as a complex
/// number: everything downstream uses the real pair (Omega, omega_sq)
/// with omega_sq = -Omega^2 < 0.
struct PhysicalParams {
    double m = 1.0;
    double G = 1.0;
    double M = 4.0;
    double R = 2.0;
    double hbar = 1.0;
    // derived
    double g = 1.0;         // G*M/R^2
    double Omega = 1.0;     // sqrt(2 g / R)
    double omega_sq = -1.0; // -Omega^2
};

/// Build params for a unit regime. Natural mode defaults to
/// m = hbar = Omega = 1 (realized as G=1, M=4, R=2 so that g = 1 and
/// 2g/R = 1); SI-Earth uses CODATA-ish Earth values. Overrides replace
/// individual inputs before derivation; non-positive overrides are
/// rejected.
PhysicalParams make_params(UnitMode mode, const ParamOverrides& overrides = {});

/// Re-derive (g, Omega, omega_sq) from stored (G, M, R). Uses the same
/// expressions as make_params so round-trips are bit-for-bit.
void derive_rates(PhysicalParams& p);

/// Measurement window [tau_start, tau_end] with resolution delta_a_sq
/// and a uniform integration grid of n_grid nodes (odd, Simpson).
///
/// The grid covers the clipped domain [tau_start + eps_offset*T, tau_end]:
/// beta(t) = coth(Omega (t - tau_start))/sigma(t) diverges at the lower
/// endpoint and the clipping keeps every node finite.
/// delta_a_sq = +inf is accepted and means "no measurement".
struct MeasurementWindow {
    MeasurementWindow(double tau_start, double tau_end, double delta_a_sq,
                      int n_grid, double eps_offset = 1e-3);

    double tau_start;
    double tau_end;
    double T;           // tau_end - tau_start
    double delta_a_sq;
    int n_grid;
    double eps_offset;

    double clip_start() const { return tau_start + eps_offset * T; }
    double grid_step() const { return (tau_end - clip_start()) / (n_grid - 1); }
    double node(int i) const { return clip_start() + i * grid_step(); }
    /// T * delta_a_sq, the combination every closed form depends on.
    double resolution_time_product() const { return T * delta_a_sq; }

    MeasurementWindow with_delta(double new_delta_a_sq) const {
        MeasurementWindow w = *this;
        if (!(new_delta_a_sq > 0.0))
            throw DomainError("delta_a_sq must be positive");
        w.delta_a_sq = new_delta_a_sq;
        return w;
    }
};

/// Real samples on the window grid; linear interpolation off-node,
/// clamped to the end samples outside the grid (needed by the lattice,
/// whose slices start at tau_start, below the clipped grid).
struct SampledSeries {
    SampledSeries(const MeasurementWindow& window, std::vector<double> values);

    MeasurementWindow window;
    std::vector<double> values;

    int size() const { return static_cast<int>(values.size()); }
    double operator[](int i) const { return values[i]; }
    double value_at(double t) const;
};

/// Sample a callable on the window grid.
template <class F>
SampledSeries sample_series(const MeasurementWindow& window, F&& f) {
    std::vector<double> v(window.n_grid);
    for (int i = 0; i < window.n_grid; ++i) v[i] = f(window.node(i));
    return SampledSeries(window, std::move(v));
}

/// Composite Simpson on a uniform grid with step h. Requires an odd
/// number of points >= 3; exact for cubics.
double simpson(std::span<const double> values, double h);
Complex simpson(std::span<const Complex> values, double h);

/// Simpson over a series' own grid.
double integrate(const SampledSeries& series);

inline bool weight_off(double x) { return !std::isfinite(x); }

} // namespace gravqnd
