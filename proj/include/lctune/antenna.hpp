#pragma once

#include "lctune/relax.hpp"

#include <optional>
#include <vector>

namespace lctune {

// f = 1 / (2 pi sqrt(L C)). DomainError for non-positive inputs.
double resonant_frequency(double inductance, double capacitance);

// Q at which the -10 dB bandwidth is 17 MHz at eps = 20 for the default anchors.
inline constexpr double kDefaultQFactor = 145.75;

// X(eps) = 1 / (2 pi f)^2 = x_a + x_b eps.
struct TuningModel {
    double x_a = 0.0;  // s^2
    double x_b = 0.0;  // s^2 per unit permittivity
    double q_factor = kDefaultQFactor;
    double c_p = 0.8e-12;  // F
    double z0 = 50.0;      // ohm
};

// Exact two-point fit through (eps_low, f_low) and (eps_high, f_high).
// CalibrationError unless eps_low < eps_high and f_low > f_high > 0.
TuningModel calibrate(double eps_low, double f_low, double eps_high, double f_high);

// DomainError for eps <= 0 or a model with X(eps) <= 0.
double frequency_from_eps(const TuningModel& model, double eps);

struct S11Point {
    double freq = 0.0;  // Hz
    double s11_db = 0.0;
};

// Series RLC branch resonant at frequency_from_eps with R = z0 and the model's Q,
// seen from a z0 line. Values are floored at -300 dB.
std::vector<S11Point> s11_curve(const TuningModel& model, double eps, const std::vector<double>& freqs);

// Width of the -10 dB dip around the minimum, interpolated linearly at the
// crossings. DomainError when the minimum is above -10 dB or a crossing lies
// outside the curve.
double bandwidth_minus10db(const std::vector<S11Point>& curve);

struct TuningRow {
    double voltage = 0.0;
    double eps_eff = 0.0;
    double f_res = 0.0;
};

std::vector<TuningRow> tuning_curve(const std::vector<CurveRow>& table, const TuningModel& model);

// Voltage interval over which the resonance sweeps from f_high down to f_low,
// interpolated linearly in the tuning table.
struct BandCoverage {
    bool covered = false;
    double v_low = 0.0;   // voltage where f crosses f_high
    double v_high = 0.0;  // voltage where f crosses f_low
};
BandCoverage band_coverage(const std::vector<TuningRow>& rows, double f_low = 3.3e9,
                           double f_high = 3.8e9);

enum class SpiralForm { archimedean, exponential };

struct SpiralParams {
    double r0 = 4.5e-3;             // m
    double r1 = 4.7e-3;             // m
    std::optional<double> alpha;    // archimedean: m/rad; exponential: 1/rad
    double phi_max = 6.0 * 3.14159265358979323846;
    SpiralForm form = SpiralForm::archimedean;
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

// Archimedean: r = r0 + a phi with a = alpha or (r1 - r0) / phi_max.
// Exponential: (r0 e^{a t} cos t, r0 e^{a t} sin t) with a = alpha or
// ln(r1 / r0) / phi_max. InputError for samples_per_turn < 8, r0 >= r1 or phi_max < 0.
std::vector<Point2> spiral_path(const SpiralParams& params, int samples_per_turn = 64);

// Current-sheet estimate for a circular planar spiral of the given path (H).
// Not part of the calibrated tuning model.
double spiral_inductance_estimate(const SpiralParams& params);

}  // namespace lctune
