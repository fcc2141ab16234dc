// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include "lctune/antenna.hpp"
#include "lctune/berreman.hpp"
#include "lctune/cell.hpp"
#include "lctune/material.hpp"
#include "lctune/profile.hpp"
#include "lctune/relax.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <random>
#include <string>
#include <vector>

using namespace lctune;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
    if (!ok) ++failures;
    fmt::print("criterion {:>2}: {}  {}\n", id, ok ? "PASS" : "FAIL", detail);
    std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Largest energy increase between accepted steps, relative to |E|.
double worst_energy_rise(const std::vector<double>& history) {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < history.size(); ++k)
        worst = std::max(worst, (history[k] - history[k - 1]) / std::abs(history[k - 1]));
    return worst;
}

// Airy summation for a single isotropic slab, polarisation 'p' or 's'.
struct AiryResult {
    double t;
    double r;
};
AiryResult airy_slab(double n1, double n2, double n3, double d, double lambda, double eta, char pol) {
    using C = std::complex<double>;
    auto cosine = [&](double n) { return std::sqrt(C(1.0 - eta * eta / (n * n))); };
    const C c1 = cosine(n1), c2 = cosine(n2), c3 = cosine(n3);
    auto fresnel_r = [&](double na, C ca, double nb, C cb) {
        return pol == 's' ? (na * ca - nb * cb) / (na * ca + nb * cb)
                          : (nb * ca - na * cb) / (nb * ca + na * cb);
    };
    auto fresnel_t = [&](double na, C ca, double nb, C cb) {
        return pol == 's' ? 2.0 * na * ca / (na * ca + nb * cb) : 2.0 * na * ca / (nb * ca + na * cb);
    };
    const C r12 = fresnel_r(n1, c1, n2, c2), r23 = fresnel_r(n2, c2, n3, c3);
    const C t12 = fresnel_t(n1, c1, n2, c2), t23 = fresnel_t(n2, c2, n3, c3);
    const C beta = 2.0 * M_PI / lambda * n2 * c2 * d;
    const C ph = std::exp(C(0, 1) * beta);
    const C t = t12 * t23 * ph / (1.0 + r12 * r23 * ph * ph);
    const C r = (r12 + r23 * ph * ph) / (1.0 + r12 * r23 * ph * ph);
    const double factor = (n3 * c3).real() / (n1 * c1).real();
    return {factor * std::norm(t), std::norm(r)};
}

}  // namespace

int main() {
    const MaterialTable table = MaterialTable::builtin();
    const LCMaterial mat = table.get("RDP-84909");
    const LdgModel model(mat);
    const CellStack stack;  // 80 um LC, 50 um PI covers, 1/49 um fingers, 129 x 128 grid

    // 1
    {
        const double vc = freedericksz_threshold(mat);
        report(1, std::abs(vc - 0.362) <= 0.001,
               fmt::format("V_c = {:.5f} V (target 0.362 +/- 0.001)", vc));
    }

    // 2, 4, 10 share the sweep
    std::vector<double> voltages;
    for (int k = 0; k <= 30; ++k) voltages.push_back(0.05 * k);
    double worst_rise = -std::numeric_limits<double>::infinity();
    std::size_t accepted = 0;
    const auto t_sweep = std::chrono::steady_clock::now();
    const auto rows = freedericksz_curve(stack, model, voltages, {}, {},
                                         [&](const CurveRow&, const CellState& s) {
                                             worst_rise = std::max(worst_rise, worst_energy_rise(s.energy_history));
                                             accepted += s.energy_history.size() - 1;
                                         });
    const double sweep_time = seconds_since(t_sweep);
    {
        const double vth = estimate_threshold(rows);
        const double err = std::abs(vth - 0.362) / 0.362;
        report(2, err <= 0.05 && sweep_time < 60.0,
               fmt::format("simulated threshold {:.4f} V ({:.2f}% from 0.362, limit 5%), 31-point sweep {:.2f} s (limit 60 s)",
                           vth, 100.0 * err, sweep_time));
    }

    // 3
    {
        const CellState zero = relax(stack, model, 0.0);
        const double e0 = effective_permittivity(zero, stack, model);
        const double eh = effective_permittivity(homeotropic_state(stack, model, 0.0, Dimensionality::one_d), stack, model);
        report(3, std::abs(e0 - 8.00) <= 0.01 && std::abs(eh - 47.1) <= 0.01,
               fmt::format("eps_eff(0 V) = {:.4f} (8.00 +/- 0.01), homeotropic = {:.4f} (47.1 +/- 0.01)", e0, eh));
    }

    // 4
    const CellState one_volt = relax(stack, model, 1.0);
    {
        const double e1 = effective_permittivity(one_volt, stack, model);
        report(4, std::abs(e1 - 38.4) <= 0.15 * 38.4,
               fmt::format("eps_eff(1 V) = {:.3f} (38.4 +/- 15%)", e1));
        worst_rise = std::max(worst_rise, worst_energy_rise(one_volt.energy_history));
        accepted += one_volt.energy_history.size() - 1;
    }

    // 5
    const TuningModel ant = calibrate(8.0, 4.15e9, 47.1, 3.09e9);
    {
        const double f8 = frequency_from_eps(ant, 8.0);
        const double f47 = frequency_from_eps(ant, 47.1);
        const double e8 = std::abs(f8 - 4.15e9) / 4.15e9;
        const double e47 = std::abs(f47 - 3.09e9) / 3.09e9;
        const double tun = f8 - f47;
        report(5, e8 <= 4e-16 * 4 && e47 <= 4e-16 * 4 && std::abs(tun - 1.06e9) <= 1e6,
               fmt::format("f(8) rel err {:.1e}, f(47.1) rel err {:.1e} (limit 1.6e-15), tunability {:.6f} GHz (1.06 +/- 0.001)",
                           e8, e47, tun * 1e-9));
    }

    // 6
    {
        const double f14 = frequency_from_eps(ant, 14.0);
        const double f32 = frequency_from_eps(ant, 32.0);
        const double e14 = std::abs(f14 - 3.8e9) / 3.8e9;
        const double e32 = std::abs(f32 - 3.3e9) / 3.3e9;
        report(6, e14 <= 0.05 && e32 <= 0.05,
               fmt::format("f(14) = {:.4f} GHz ({:.2f}%), f(32) = {:.4f} GHz ({:.2f}%), limit 5%",
                           f14 * 1e-9, 100 * e14, f32 * 1e-9, 100 * e32));
    }

    // 7
    {
        const BandCoverage band = band_coverage(tuning_curve(rows, ant), 3.3e9, 3.8e9);
        const bool inside = band.covered && band.v_low >= 0.35 && band.v_high <= 1.0;
        const bool overlap = band.covered && band.v_low < 0.6 && band.v_high > 0.4;
        report(7, inside && overlap,
               band.covered ? fmt::format("3.8 -> 3.3 GHz over [{:.4f}, {:.4f}] V (inside [0.35, 1.0], overlapping [0.4, 0.6])",
                                          band.v_low, band.v_high)
                            : std::string("band not covered by the 0-1.5 V sweep"));
    }

    // 8
    {
        std::mt19937_64 rng(20260418);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        double worst_airy = 0.0;
        int cases = 0;
        for (int k = 0; k < 64; ++k) {
            const double n1 = 1.0 + 1.0 * u(rng), n2 = 1.2 + 1.3 * u(rng), n3 = 1.0 + 1.0 * u(rng);
            const double d = 50e-9 + 5e-6 * u(rng);
            const double lambda = 400e-9 + 300e-9 * u(rng);
            const double eta = 0.95 * std::min({n1, n2, n3}) * u(rng);
            PlaneWaveSpec w{lambda, eta, n1, n3};
            const std::vector<OpticalLayer> slab{isotropic_layer(d, n2)};
            for (const char pol : {'p', 's'}) {
                const Eigen::Vector2cd jin = pol == 'p' ? Eigen::Vector2cd(1, 0) : Eigen::Vector2cd(0, 1);
                const OpticalResult b = transmittance(slab, w, jin);
                const AiryResult a = airy_slab(n1, n2, n3, d, lambda, eta, pol);
                worst_airy = std::max({worst_airy, std::abs(b.t - a.t), std::abs(b.r - a.r)});
                ++cases;
            }
        }
        double worst_sum = 0.0;
        int stacks = 0;
        for (int k = 0; k < 50; ++k) {
            std::vector<OpticalLayer> layers;
            for (int l = 0; l < 12; ++l) {
                const double th = M_PI * u(rng), ph = 2 * M_PI * u(rng);
                const Eigen::Vector3d n(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
                const double no = 1.48, ne = 1.48 + 0.2 * u(rng);
                Eigen::Matrix3d eps = no * no * Eigen::Matrix3d::Identity() + (ne * ne - no * no) * n * n.transpose();
                layers.push_back({1e-6 * u(rng), eps.cast<cdouble>()});
            }
            PlaneWaveSpec w{532e-9, 0.6 * u(rng), 1.5, 1.5};
            const Eigen::Vector2cd jin(std::complex<double>(u(rng), u(rng)), std::complex<double>(u(rng), u(rng)));
            const OpticalResult res = transmittance(layers, w, jin);
            worst_sum = std::max(worst_sum, std::abs(res.t + res.r - 1.0));
            ++stacks;
        }
        report(8, cases >= 50 && worst_airy <= 1e-8 && worst_sum <= 1e-10,
               fmt::format("isotropic slab vs Airy: {} cases, max |dT|,|dR| = {:.2e} (limit 1e-8); "
                           "lossless anisotropic stacks: {} cases, max |T+R-1| = {:.2e} (limit 1e-10)",
                           cases, worst_airy, stacks, worst_sum));
    }

    // 9
    try {
        CellStack small = stack;
        small.grid_nz = 33;
        const double h = small.lc_spacing();
        std::mt19937_64 rng(7);
        std::normal_distribution<double> nd(0.0, 1.0);
        double worst = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            CellState s = initial_state(small, model, 0.4 + 0.05 * trial, Dimensionality::one_d, 0.3);
            for (int j = 1; j < s.nz - 1; ++j)
                for (int c = 0; c < 5; ++c) s.q[static_cast<std::size_t>(j)][c] += 0.02 * nd(rng);
            const auto field = discrete_molecular_field(s, small, model);
            const int j = 1 + trial % (s.nz - 2);
            const Eigen::Matrix<double, 5, 1> g = energy_gradient_from_field(field[static_cast<std::size_t>(j)], h);
            for (int c = 0; c < 5; ++c) {
                const double step = 1e-5;
                CellState a = s, b = s;
                a.q[static_cast<std::size_t>(j)][c] += step;
                b.q[static_cast<std::size_t>(j)][c] -= step;
                const double fd = (total_energy(a, small, model) - total_energy(b, small, model)) / (2 * step);
                worst = std::max(worst, std::abs(g[c] - fd) / std::max(g.norm(), 1e-300));
            }
        }
        report(9, worst < 1e-5,
               fmt::format("molecular field vs central differences at 20 random states: max relative error {:.2e} (limit 1e-5)", worst));
    } catch (const std::exception& e) {
        report(9, false, fmt::format("exception: {}", e.what()));
    }

    // 10
    {
        const double limit = 1e-12;
        report(10, worst_rise <= limit,
               fmt::format("{} accepted steps in the sweep and the 1 V run, largest relative energy rise {:.2e} (limit {:.0e})",
                           accepted, worst_rise, limit));
    }

    // 11
    try {
        const auto t0 = std::chrono::steady_clock::now();
        const CellState grid = relax(stack, model, 1.0, {}, Dimensionality::two_d);
        const auto profile = transmittance_profile_2d(grid, stack, model);
        const double runtime = seconds_since(t0);
        const double t_plate = transmittance_profile_2d(one_volt, stack, model).front().t;
        const double mean = mean_transmittance(profile);
        CellState probe = grid;
        const ElectrodeRows er = electrode_rows(probe, stack);
        const auto lo = std::min_element(profile.begin(), profile.end(),
                                         [](const ProfileRow& a, const ProfileRow& b) { return a.t < b.t; });
        const auto hi = std::max_element(profile.begin(), profile.end(),
                                         [](const ProfileRow& a, const ProfileRow& b) { return a.t < b.t; });
        const auto at_min = static_cast<std::size_t>(lo - profile.begin());
        const bool range = lo->t >= 0.70 && hi->t <= 0.95;
        const bool over_fingers = er.bottom[at_min] || er.top[at_min];
        report(11, range && over_fingers && mean > t_plate && runtime < 600.0,
               fmt::format("{}x{} grid at 1 V: T in [{:.4f}, {:.4f}] (limit [0.70, 0.95]), minimum at x = {:.2f} um {} finger, "
                           "mean T {:.4f} vs plate {:.4f}, runtime {:.1f} s (limit 600 s)",
                           stack.grid_nx, stack.grid_nz, lo->t, hi->t, lo->x * 1e6, over_fingers ? "on a" : "off the",
                           mean, t_plate, runtime));
    } catch (const std::exception& e) {
        report(11, false, fmt::format("exception: {}", e.what()));
    }

    // 12
    {
        double bw_min = 1e300, bw_max = 0.0;
        for (int k = 0; k <= 18; ++k) {
            const double eps = 14.0 + k;
            const double f0 = frequency_from_eps(ant, eps);
            std::vector<double> freqs;
            for (int i = 0; i <= 4000; ++i) freqs.push_back(f0 * (0.97 + 0.06 * i / 4000.0));
            const double bw = bandwidth_minus10db(s11_curve(ant, eps, freqs));
            bw_min = std::min(bw_min, bw);
            bw_max = std::max(bw_max, bw);
        }
        report(12, bw_min >= 10e6 && bw_max <= 25e6,
               fmt::format("-10 dB bandwidth over eps 14..32: [{:.2f}, {:.2f}] MHz (limit [10, 25])", bw_min * 1e-6, bw_max * 1e-6));
    }

    fmt::print("{} of 12 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
