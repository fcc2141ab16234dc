#include "lctune/antenna.hpp"

#include "lctune/error.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace lctune {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kMu0 = 1.25663706212e-6;

double x_of(double f) { return 1.0 / ((2.0 * kPi * f) * (2.0 * kPi * f)); }

double growth(const SpiralParams& p) {
    if (p.alpha) return *p.alpha;
    if (p.phi_max == 0.0) return 0.0;
    return p.form == SpiralForm::archimedean ? (p.r1 - p.r0) / p.phi_max
                                             : std::log(p.r1 / p.r0) / p.phi_max;
}

double radius_at(const SpiralParams& p, double phi) {
    const double a = growth(p);
    return p.form == SpiralForm::archimedean ? p.r0 + a * phi : p.r0 * std::exp(a * phi);
}
}  // namespace

double resonant_frequency(double inductance, double capacitance) {
    if (!(inductance > 0.0) || !(capacitance > 0.0))
        throw DomainError("resonant_frequency: inductance and capacitance must be positive");
    return 1.0 / (2.0 * kPi * std::sqrt(inductance * capacitance));
}

TuningModel calibrate(double eps_low, double f_low, double eps_high, double f_high) {
    if (!(eps_low < eps_high)) throw CalibrationError("calibrate: need eps_low < eps_high");
    if (!(f_low > f_high) || !(f_high > 0.0))
        throw CalibrationError("calibrate: need f_low > f_high > 0");
    TuningModel m;
    m.x_b = (x_of(f_high) - x_of(f_low)) / (eps_high - eps_low);
    m.x_a = x_of(f_low) - m.x_b * eps_low;
    if (!(m.x_a > 0.0))
        throw CalibrationError("calibrate: anchors imply a non-positive intercept");
    return m;
}

double frequency_from_eps(const TuningModel& model, double eps) {
    if (!(eps > 0.0)) throw DomainError("frequency_from_eps: eps must be positive");
    const double x = model.x_a + model.x_b * eps;
    if (!(x > 0.0)) throw DomainError("frequency_from_eps: model gives X <= 0");
    return 1.0 / (2.0 * kPi * std::sqrt(x));
}

std::vector<S11Point> s11_curve(const TuningModel& model, double eps, const std::vector<double>& freqs) {
    if (!(model.q_factor > 0.0) || !(model.z0 > 0.0))
        throw InputError("s11_curve: q_factor and z0 must be positive");
    const double f0 = frequency_from_eps(model, eps);
    std::vector<S11Point> out;
    out.reserve(freqs.size());
    double prev = 0.0;
    for (const double f : freqs) {
        if (!(f > prev)) throw InputError("s11_curve: frequencies must be positive and ascending");
        prev = f;
        const double u = f / f0;
        const double x = model.z0 * model.q_factor * (u - 1.0 / u);
        const std::complex<double> z(model.z0, x);
        const double gamma = std::abs((z - model.z0) / (z + model.z0));
        const double db = gamma > 0.0 ? 20.0 * std::log10(gamma) : -300.0;
        out.push_back({f, std::max(db, -300.0)});
    }
    return out;
}

double bandwidth_minus10db(const std::vector<S11Point>& curve) {
    if (curve.empty()) throw DomainError("bandwidth_minus10db: empty curve");
    const auto it = std::min_element(curve.begin(), curve.end(),
                                     [](const auto& a, const auto& b) { return a.s11_db < b.s11_db; });
    if (!(it->s11_db <= -10.0)) throw DomainError("bandwidth_minus10db: minimum above -10 dB");
    const auto k0 = static_cast<std::size_t>(it - curve.begin());
    auto cross = [&](std::size_t a, std::size_t b) {
        const double t = (-10.0 - curve[a].s11_db) / (curve[b].s11_db - curve[a].s11_db);
        return curve[a].freq + t * (curve[b].freq - curve[a].freq);
    };
    std::size_t lo = k0;
    while (lo > 0 && curve[lo - 1].s11_db <= -10.0) --lo;
    std::size_t hi = k0;
    while (hi + 1 < curve.size() && curve[hi + 1].s11_db <= -10.0) ++hi;
    if (lo == 0 || hi + 1 == curve.size())
        throw DomainError("bandwidth_minus10db: -10 dB crossing outside the curve");
    return cross(hi, hi + 1) - cross(lo - 1, lo);
}

std::vector<TuningRow> tuning_curve(const std::vector<CurveRow>& table, const TuningModel& model) {
    std::vector<TuningRow> out;
    out.reserve(table.size());
    for (const auto& r : table) out.push_back({r.voltage, r.eps_eff, frequency_from_eps(model, r.eps_eff)});
    return out;
}

BandCoverage band_coverage(const std::vector<TuningRow>& rows, double f_low, double f_high) {
    BandCoverage b;
    auto crossing = [&](double f) -> std::optional<double> {
        for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
            const double a = rows[k].f_res;
            const double c = rows[k + 1].f_res;
            if (a >= f && c <= f && a != c) {
                const double t = (a - f) / (a - c);
                return rows[k].voltage + t * (rows[k + 1].voltage - rows[k].voltage);
            }
        }
        return std::nullopt;
    };
    const auto lo = crossing(f_high);
    const auto hi = crossing(f_low);
    if (lo && hi) {
        b.covered = true;
        b.v_low = *lo;
        b.v_high = *hi;
    }
    return b;
}

std::vector<Point2> spiral_path(const SpiralParams& p, int samples_per_turn) {
    if (samples_per_turn < 8) throw InputError("spiral_path: need at least 8 samples per turn");
    if (!(p.r0 > 0.0) || !(p.r0 < p.r1)) throw InputError("spiral_path: need 0 < r0 < r1");
    if (!(p.phi_max >= 0.0)) throw InputError("spiral_path: phi_max must be non-negative");
    std::vector<Point2> out;
    if (p.phi_max == 0.0) {
        out.push_back({p.r0, 0.0});
        return out;
    }
    const int n = std::max(1, static_cast<int>(std::ceil(p.phi_max / (2.0 * kPi) * samples_per_turn)));
    out.reserve(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) {
        const double phi = p.phi_max * k / n;
        const double r = radius_at(p, phi);
        out.push_back({r * std::cos(phi), r * std::sin(phi)});
    }
    return out;
}

double spiral_inductance_estimate(const SpiralParams& p) {
    if (!(p.phi_max > 0.0)) throw InputError("spiral_inductance_estimate: phi_max must be positive");
    const double d_in = 2.0 * radius_at(p, 0.0);
    const double d_out = 2.0 * radius_at(p, p.phi_max);
    if (!(d_out > d_in)) throw InputError("spiral_inductance_estimate: radius must grow");
    const double turns = p.phi_max / (2.0 * kPi);
    const double d_avg = 0.5 * (d_in + d_out);
    const double rho = (d_out - d_in) / (d_out + d_in);
    return 0.5 * kMu0 * turns * turns * d_avg * (std::log(2.46 / rho) + 0.20 * rho * rho);
}

}  // namespace lctune
