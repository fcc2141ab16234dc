#include "lctune/pipeline.hpp"

#include "lctune/antenna.hpp"
#include "lctune/electrostatics.hpp"
#include "lctune/error.hpp"
#include "lctune/profile.hpp"
#include "lctune/relax.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <map>

namespace lctune {

namespace {

std::string g(double v) { return fmt::format("{:.10g}", v); }

class CsvFile {
public:
    CsvFile(const std::filesystem::path& path, const RunConfig& config, const std::string& columns)
        : path_(path), out_(path) {
        if (!out_) throw IoError(fmt::format("cannot write '{}'", path.string()));
        out_ << output_header(config) << columns << '\n';
        check();
    }

    template <typename... T>
    void row(const T&... values) {
        std::string line;
        ((line += (line.empty() ? "" : ",") + g(values)), ...);
        out_ << line << '\n';
        out_.flush();
        check();
    }

    void fail(const std::string& what) {
        out_ << "# FAILED: " << what << '\n';
        out_.flush();
    }

private:
    void check() {
        if (!out_) throw IoError(fmt::format("write error on '{}'", path_.string()));
    }

    std::filesystem::path path_;
    std::ofstream out_;
};

void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw IoError(fmt::format("cannot create output directory '{}'", dir.string()));
}

void write_text(const std::filesystem::path& path, const RunConfig& config, const std::string& body) {
    std::ofstream out(path);
    if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
    out << output_header(config) << body;
    if (!out) throw IoError(fmt::format("write error on '{}'", path.string()));
}

std::ostream* log_of(const CommandEnv& env) { return env.log; }

LdgModel make_model(const RunConfig& c) { return LdgModel(c.material, c.model); }

void write_profile_1d(const std::filesystem::path& path, const RunConfig& config,
                      const CellState& s, const CellStack& stack) {
    CsvFile f(path, config, "z_m,nx,ny,nz,S");
    for (int j = 0; j < s.nz; ++j) {
        const DirectorOrder d = director_and_order(s.q[static_cast<std::size_t>(j)]);
        f.row(j * stack.lc_spacing(), d.director.x(), d.director.y(), d.director.z(), d.order);
    }
}

void write_profile_2d(const std::filesystem::path& path, const RunConfig& config,
                      const CellState& s, const CellStack& stack) {
    CsvFile f(path, config, "x_m,z_m,nx,ny,nz,S");
    for (int j = 0; j < s.nz; ++j)
        for (int i = 0; i < s.nx; ++i) {
            const DirectorOrder d = director_and_order(s.at(i, j));
            f.row(column_x(stack, i), j * stack.lc_spacing(), d.director.x(), d.director.y(),
                  d.director.z(), d.order);
        }
}

// Runs the configured sweep, streaming rows into freedericksz.csv.
std::vector<CurveRow> run_sweep(const CommandEnv& env) {
    const RunConfig& c = env.config;
    const LdgModel model = make_model(c);
    SweepOptions sweep;
    sweep.warm_start = c.sweep.warm_start;
    sweep.jobs = env.jobs;
    sweep.average = c.average;
    sweep.dims = Dimensionality::one_d;

    CsvFile csv(env.out_dir / "freedericksz.csv", c, "voltage_V,eps_eff,midplane_tilt_rad,energy");
    std::map<double, CellState> profiles;
    const auto voltages = c.sweep.voltages();
    auto wanted = [&](double v) {
        for (const double p : c.sweep.profile_voltages)
            if (std::abs(p - v) <= 1e-9 * std::max(1.0, std::abs(p))) return true;
        return false;
    };
    std::vector<CurveRow> rows;
    try {
        rows = freedericksz_curve(c.cell, model, voltages, c.solver, sweep,
                                  [&](const CurveRow& r, const CellState& s) {
                                      csv.row(r.voltage, r.eps_eff, r.midplane_tilt, r.energy);
                                      if (wanted(r.voltage)) profiles.emplace(r.voltage, s);
                                  });
    } catch (const std::exception& e) {
        csv.fail(e.what());
        throw;
    }
    for (const auto& [v, s] : profiles)
        write_profile_1d(env.out_dir / fmt::format("director_1d_{}V.csv", g(v)), c, s, c.cell);
    return rows;
}

}  // namespace

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const CalibrationError*>(&e) ||
        dynamic_cast<const InputError*>(&e))
        return kExitConfig;
    if (dynamic_cast<const SolverError*>(&e)) return kExitNonConvergence;
    if (dynamic_cast<const IoError*>(&e)) return kExitIo;
    return kExitFailure;
}

std::string output_header(const RunConfig& c) {
    return fmt::format(
        "# lctune {}\n# config_sha256 {}\n# material={} quartic_convention={} elastic_rule={} "
        "permittivity_average={}\n",
        kVersion, config_hash(c), c.material.name, to_string(c.model.quartic),
        to_string(c.model.elastic), to_string(c.average));
}

void cmd_materials(const MaterialTable& table, std::ostream& out) {
    out << fmt::format("{:<10} {:>8} {:>7} {:>7} {:>6} {:>7} {:>6} {:>6} {:>6} {:>7} {:>7}\n", "name",
                       "T_NI_C", "eps_perp", "d_eps", "n_o", "d_n", "K11_pN", "K22_pN", "K33_pN",
                       "S_eq", "V_c_V");
    for (const auto& m : table.all()) {
        const double s_eq = equilibrium_order(m);
        const double vc = m.delta_eps > 0.0 ? freedericksz_threshold(m) : std::nan("");
        out << fmt::format("{:<10} {:>8.2f} {:>7.2f} {:>7.2f} {:>6.3f} {:>7.4f} {:>6.1f} {:>6.1f} "
                           "{:>6.1f} {:>7.4f} {:>7.4f}\n",
                           m.name, m.clearing_temp_c, m.eps_perp, m.delta_eps, m.n_o, m.delta_n,
                           m.k11 * 1e12, m.k22 * 1e12, m.k33 * 1e12, s_eq, vc);
    }
}

void cmd_freedericksz(const CommandEnv& env) {
    validate_config(env.config);
    ensure_dir(env.out_dir);
    const auto rows = run_sweep(env);
    if (auto* log = log_of(env)) {
        *log << fmt::format("rows {}  eps_eff {:.4f} -> {:.4f}\n", rows.size(), rows.front().eps_eff,
                            rows.back().eps_eff);
        *log << fmt::format("analytic threshold {:.4f} V, simulated onset {:.4f} V\n",
                            freedericksz_threshold(env.config.material), estimate_threshold(rows));
    }
}

void cmd_tune(const CommandEnv& env) {
    const RunConfig& c = env.config;
    validate_config(c);
    ensure_dir(env.out_dir);
    const TuningModel model = c.antenna.model();
    const auto rows = run_sweep(env);
    const auto tuning = tuning_curve(rows, model);
    {
        CsvFile f(env.out_dir / "tuning.csv", c, "voltage_V,eps_eff,f_res_hz");
        for (const auto& t : tuning) f.row(t.voltage, t.eps_eff, t.f_res);
    }
    {
        CsvFile f(env.out_dir / "eps_frequency.csv", c, "eps_eff,f_res_hz");
        const int n = 80;
        for (int k = 0; k < n; ++k) {
            const double eps = c.antenna.eps_low + (c.antenna.eps_high - c.antenna.eps_low) * k / (n - 1);
            f.row(eps, frequency_from_eps(model, eps));
        }
    }
    const BandCoverage band = band_coverage(tuning, c.antenna.band_low, c.antenna.band_high);
    std::string report;
    report += fmt::format("band_GHz {} {}\n", g(c.antenna.band_low * 1e-9), g(c.antenna.band_high * 1e-9));
    if (band.covered)
        report += fmt::format("band_voltage_V {} {}\n", g(band.v_low), g(band.v_high));
    else
        report += "band_voltage_V not covered by the sweep\n";
    report += fmt::format("f_sweep_start_GHz {}\n", g(tuning.front().f_res * 1e-9));
    report += fmt::format("f_sweep_end_GHz {}\n", g(tuning.back().f_res * 1e-9));
    report += fmt::format("f_anchor_range_GHz {} {}\n", g(frequency_from_eps(model, c.antenna.eps_low) * 1e-9),
                          g(frequency_from_eps(model, c.antenna.eps_high) * 1e-9));
    report += fmt::format("max_tunability_GHz {}\n",
                          g((frequency_from_eps(model, c.antenna.eps_low) -
                             frequency_from_eps(model, c.antenna.eps_high)) * 1e-9));
    report += fmt::format("threshold_analytic_V {}\n", g(freedericksz_threshold(c.material)));
    report += fmt::format("threshold_onset_V {}\n", g(estimate_threshold(rows)));
    write_text(env.out_dir / "band_report.txt", c, report);
    if (auto* log = log_of(env)) *log << report;
}

void cmd_optics(const CommandEnv& env) {
    const RunConfig& c = env.config;
    validate_config(c);
    ensure_dir(env.out_dir);
    const LdgModel model = make_model(c);
    const CellState s = relax(c.cell, model, c.optics.voltage, c.solver, Dimensionality::two_d);
    write_profile_2d(env.out_dir / "director_2d.csv", c, s, c.cell);
    const auto profile = transmittance_profile_2d(s, c.cell, model, c.optics.options);
    {
        CsvFile f(env.out_dir / "transmittance.csv", c, "x_m,T,R");
        for (const auto& r : profile) f.row(r.x, r.t, r.r);
    }

    // Spectrum of the column half a period away from the bottom fingers.
    const int mid = s.nx / 2;
    std::vector<QTensor> column(static_cast<std::size_t>(s.nz));
    for (int j = 0; j < s.nz; ++j) column[static_cast<std::size_t>(j)] = s.at(mid, j);
    CellState probe = s;
    prepare_potential_grid(probe, c.cell);
    const ElectrodeRows er = electrode_rows(probe, c.cell);
    {
        CsvFile f(env.out_dir / "spectrum.csv", c, "wavelength_m,T,R");
        OpticsOptions o = c.optics.options;
        const int n = c.optics.spectrum_count;
        for (int k = 0; k < n; ++k) {
            o.wave.wavelength = c.optics.spectrum_start + (c.optics.spectrum_stop - c.optics.spectrum_start) * k / (n - 1);
            const ColumnOptics col = column_transmittance(column, c.cell.lc_spacing(),
                                                          er.bottom[static_cast<std::size_t>(mid)],
                                                          er.top[static_cast<std::size_t>(mid)], model, o);
            f.row(o.wave.wavelength, col.t, col.r);
        }
    }

    // Plate electrodes: x-invariant, so the 1D state with ITO on both sides.
    const CellState plate = relax(c.cell, model, c.optics.voltage, c.solver, Dimensionality::one_d);
    const double t_plate = transmittance_profile_2d(plate, c.cell, model, c.optics.options).front().t;
    double t_min = profile.front().t;
    double t_max = profile.front().t;
    for (const auto& r : profile) {
        t_min = std::min(t_min, r.t);
        t_max = std::max(t_max, r.t);
    }
    std::string report;
    report += fmt::format("voltage_V {}\n", g(c.optics.voltage));
    report += fmt::format("T_mean {}\nT_min {}\nT_max {}\n", g(mean_transmittance(profile)), g(t_min), g(t_max));
    report += fmt::format("T_plate {}\n", g(t_plate));
    report += fmt::format("eps_eff_2d {}\n", g(effective_permittivity(s, c.cell, model, c.average)));
    report += fmt::format("solver_steps {}\nresidual {}\n", s.steps, g(s.residual));
    write_text(env.out_dir / "optics_report.txt", c, report);
    if (auto* log = log_of(env)) *log << report;
}

void cmd_spiral(const CommandEnv& env) {
    const RunConfig& c = env.config;
    validate_config(c);
    ensure_dir(env.out_dir);
    const auto path = spiral_path(c.spiral.params, c.spiral.samples_per_turn);
    CsvFile f(env.out_dir / "spiral.csv", c, "x_m,y_m");
    for (const auto& p : path) f.row(p.x, p.y);
    if (auto* log = log_of(env)) {
        *log << fmt::format("points {}\n", path.size());
        if (c.spiral.params.phi_max > 0.0)
            *log << fmt::format("inductance_estimate_H {} (current-sheet approximation, not calibrated)\n",
                                g(spiral_inductance_estimate(c.spiral.params)));
    }
}

void cmd_s11(const CommandEnv& env) {
    const RunConfig& c = env.config;
    validate_config(c);
    ensure_dir(env.out_dir);
    const TuningModel model = c.antenna.model();
    std::vector<double> freqs;
    const int n = c.antenna.s11_count;
    for (int k = 0; k < n; ++k)
        freqs.push_back(c.antenna.s11_start + (c.antenna.s11_stop - c.antenna.s11_start) * k / (n - 1));
    const auto curve = s11_curve(model, c.antenna.s11_eps, freqs);
    {
        CsvFile f(env.out_dir / "s11.csv", c, "freq_hz,s11_db");
        for (const auto& p : curve) f.row(p.freq, p.s11_db);
    }
    std::string report;
    report += fmt::format("eps {}\nf_res_hz {}\n", g(c.antenna.s11_eps), g(frequency_from_eps(model, c.antenna.s11_eps)));
    report += fmt::format("bandwidth_minus10db_hz {}\n", g(bandwidth_minus10db(curve)));
    write_text(env.out_dir / "s11_report.txt", c, report);
    if (auto* log = log_of(env)) *log << report;
}

}  // namespace lctune
