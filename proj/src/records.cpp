#include "gravqnd/records.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace gravqnd {

namespace {

double next_uniform(std::mt19937_64& gen) {
    // uniform in [-1, 1); top 53 bits, locale- and libc-independent
    return 2.0 * (static_cast<double>(gen() >> 11) * 0x1.0p-53) - 1.0;
}

} // namespace

SampledSeries make_fourier_record(const MeasurementWindow& window,
                                  std::uint64_t seed, int n_modes,
                                  double amplitude) {
    if (n_modes < 1) throw DomainError("record needs at least one mode");
    if (!(amplitude >= 0.0)) throw DomainError("record amplitude must be >= 0");
    std::mt19937_64 gen(seed);
    std::vector<double> c(n_modes), s(n_modes);
    for (int k = 0; k < n_modes; ++k) {
        c[k] = next_uniform(gen);
        s[k] = next_uniform(gen);
    }
    const double two_pi = 2.0 * std::numbers::pi;
    std::vector<double> v(window.n_grid, 0.0);
    double vmax = 0.0;
    for (int i = 0; i < window.n_grid; ++i) {
        const double u = (window.node(i) - window.tau_start) / window.T;
        double acc = 0.0;
        for (int k = 0; k < n_modes; ++k)
            acc += c[k] * std::cos(two_pi * (k + 1) * u) +
                   s[k] * std::sin(two_pi * (k + 1) * u);
        v[i] = acc;
        vmax = std::max(vmax, std::abs(acc));
    }
    if (vmax > 0.0 && amplitude > 0.0) {
        const double scale = amplitude / vmax;
        for (double& x : v) x *= scale;
    } else if (amplitude == 0.0) {
        for (double& x : v) x = 0.0;
    }
    return SampledSeries(window, std::move(v));
}

std::vector<std::pair<double, double>> make_time_pairs(
    const MeasurementWindow& window, std::uint64_t seed, int count) {
    std::mt19937_64 gen(seed);
    const double a = window.clip_start();
    const double len = window.tau_end - a;
    std::vector<std::pair<double, double>> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        const double t1 = a + 0.5 * (next_uniform(gen) + 1.0) * len;
        const double t2 = a + 0.5 * (next_uniform(gen) + 1.0) * len;
        out.emplace_back(t1, t2);
    }
    return out;
}

} // namespace gravqnd
