#include "lctune/config.hpp"

#include "lctune/error.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <openssl/evp.h>

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace lctune {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size() || t.empty())
        throw ConfigError(fmt::format("config: '{}' is not a number: '{}'", key, text));
    return v;
}

class Reader {
public:
    explicit Reader(const boost::property_tree::ptree& tree) : tree_(tree) {}

    bool has(const std::string& section, const std::string& key) const {
        return raw(section, key) != nullptr;
    }

    std::string text(const std::string& section, const std::string& key, const std::string& fallback) {
        const auto* v = raw(section, key);
        return v ? trim(*v) : fallback;
    }

    double number(const std::string& section, const std::string& key, double fallback) {
        const auto* v = raw(section, key);
        return v ? parse_double(section + "." + key, *v) : fallback;
    }

    int integer(const std::string& section, const std::string& key, int fallback) {
        const double v = number(section, key, fallback);
        if (v != static_cast<double>(static_cast<long>(v)) || std::abs(v) > 2e9)
            throw ConfigError(fmt::format("config: '{}.{}' must be an integer", section, key));
        return static_cast<int>(v);
    }

    bool flag(const std::string& section, const std::string& key, bool fallback) {
        const auto* v = raw(section, key);
        if (!v) return fallback;
        const std::string t = trim(*v);
        if (t == "true" || t == "1" || t == "yes") return true;
        if (t == "false" || t == "0" || t == "no") return false;
        throw ConfigError(fmt::format("config: '{}.{}' must be true or false", section, key));
    }

    std::vector<double> numbers(const std::string& section, const std::string& key,
                                std::vector<double> fallback) {
        const auto* v = raw(section, key);
        if (!v) return fallback;
        std::vector<double> out;
        std::istringstream is(*v);
        std::string item;
        while (is >> item) out.push_back(parse_double(section + "." + key, item));
        return out;
    }

    void check_all_used() const {
        for (const auto& [section, sub] : tree_) {
            if (sub.empty() && !sub.data().empty())
                throw ConfigError(fmt::format("config: key '{}' outside a section", section));
            for (const auto& [key, value] : sub)
                if (!used_.count(section + "." + key))
                    throw ConfigError(fmt::format("config: unknown key '{}.{}'", section, key));
        }
    }

private:
    const std::string* raw(const std::string& section, const std::string& key) const {
        const auto s = tree_.find(section);
        if (s == tree_.not_found()) return nullptr;
        const auto k = s->second.find(key);
        if (k == s->second.not_found()) return nullptr;
        used_.insert(section + "." + key);
        return &k->second.data();
    }

    const boost::property_tree::ptree& tree_;
    mutable std::set<std::string> used_;
};

template <typename E>
E choose(const std::string& key, const std::string& value,
         std::initializer_list<std::pair<const char*, E>> options) {
    for (const auto& [name, e] : options)
        if (value == name) return e;
    std::string names;
    for (const auto& o : options) names += std::string(names.empty() ? "" : ", ") + o.first;
    throw ConfigError(fmt::format("config: '{}' must be one of {} (got '{}')", key, names, value));
}

std::string num(double v) { return fmt::format("{:.15g}", v); }

std::string list(const std::vector<double>& v) {
    std::string out;
    for (const double x : v) out += (out.empty() ? "" : " ") + num(x);
    return out;
}

std::string to_string(StepScheme s) {
    return s == StepScheme::explicit_euler ? "explicit_euler" : "linearly_implicit";
}
std::string to_string(PoissonMethod m) { return m == PoissonMethod::direct ? "direct" : "sor"; }
std::string to_string(Polarisation p) {
    switch (p) {
    case Polarisation::unpolarised: return "unpolarised";
    case Polarisation::x: return "x";
    case Polarisation::y: return "y";
    case Polarisation::crossed_45: return "crossed_45";
    }
    return "unpolarised";
}

}  // namespace

std::string to_string(QuarticConvention c) {
    return c == QuarticConvention::tr_q2_sq ? "tr_q2_sq" : "tr_q4";
}
std::string to_string(ElasticRule r) { return r == ElasticRule::k11 ? "k11" : "average"; }
std::string to_string(PermittivityAverage a) {
    return a == PermittivityAverage::volume ? "volume" : "series";
}

std::vector<double> SweepConfig::voltages() const {
    std::vector<double> v;
    if (count < 2) return v;
    for (int k = 0; k < count; ++k) v.push_back(start + (stop - start) * k / (count - 1));
    return v;
}

TuningModel AntennaConfig::model() const {
    TuningModel m = calibrate(eps_low, f_low, eps_high, f_high);
    m.q_factor = q_factor;
    m.c_p = c_p;
    m.z0 = z0;
    return m;
}

RunConfig default_config() {
    RunConfig c;
    c.material = MaterialTable::builtin().get("RDP-84909");
    return c;
}

void validate_config(const RunConfig& c) {
    try {
        c.material.validate();
        c.cell.validate();
    } catch (const InputError& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (c.sweep.count < 2) throw ConfigError("config: sweep.count must be at least 2");
    if (!(c.sweep.start >= 0.0) || !(c.sweep.start < c.sweep.stop))
        throw ConfigError("config: sweep needs 0 <= start_V < stop_V");
    if (!(c.solver.tol_q > 0.0) || !(c.solver.energy_rtol > 0.0) || c.solver.max_steps < 1)
        throw ConfigError("config: solver tolerances and max_steps must be positive");
    if (c.solver.poisson_every < 1) throw ConfigError("config: solver.poisson_every must be positive");
    if (!(c.optics.voltage >= 0.0)) throw ConfigError("config: optics.voltage_V must be non-negative");
    if (!(c.optics.options.wave.wavelength > 0.0))
        throw ConfigError("config: optics.wavelength_nm must be positive");
    if (c.optics.spectrum_count < 2 || !(c.optics.spectrum_start > 0.0) ||
        !(c.optics.spectrum_start < c.optics.spectrum_stop))
        throw ConfigError("config: optics spectrum needs 0 < start < stop and count >= 2");
    if (!(c.optics.options.wave.n_in > std::abs(c.optics.options.wave.eta)) ||
        !(c.optics.options.wave.n_out > std::abs(c.optics.options.wave.eta)))
        throw ConfigError("config: optics ambient indices must exceed |eta|");
    if (!(c.antenna.q_factor > 0.0) || !(c.antenna.z0 > 0.0) || !(c.antenna.c_p > 0.0))
        throw ConfigError("config: antenna q_factor, z0 and c_p must be positive");
    if (!(c.antenna.band_low < c.antenna.band_high))
        throw ConfigError("config: antenna band_low_GHz must be below band_high_GHz");
    if (c.antenna.s11_count < 3 || !(c.antenna.s11_start > 0.0) ||
        !(c.antenna.s11_start < c.antenna.s11_stop))
        throw ConfigError("config: antenna s11 grid needs 0 < start < stop and count >= 3");
    try {
        (void)c.antenna.model();
    } catch (const CalibrationError& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    const auto& sp = c.spiral.params;
    if (!(sp.r0 > 0.0) || !(sp.r0 < sp.r1) || !(sp.phi_max >= 0.0) || c.spiral.samples_per_turn < 8)
        throw ConfigError("config: spiral needs 0 < r0 < r1, phi_max >= 0, samples_per_turn >= 8");
    if (c.output_dir.empty()) throw ConfigError("config: output.dir must not be empty");
}

RunConfig parse_config(const std::string& text, const MaterialTable& table) {
    boost::property_tree::ptree tree;
    try {
        std::istringstream is(text);
        boost::property_tree::ini_parser::read_ini(is, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    Reader r(tree);
    RunConfig c;

    const std::string name = r.text("material", "name", "RDP-84909");
    if (!table.contains(name) && !r.has("material", "eps_perp"))
        throw ConfigError(fmt::format("config: unknown material '{}'", name));
    LCMaterial m = table.contains(name) ? table.get(name) : LCMaterial{};
    m.name = name;
    m.clearing_temp_c = r.number("material", "clearing_temp_C", m.clearing_temp_c);
    m.eps_perp = r.number("material", "eps_perp", m.eps_perp);
    m.delta_eps = r.number("material", "delta_eps", m.delta_eps);
    m.n_o = r.number("material", "n_o", m.n_o);
    m.delta_n = r.number("material", "delta_n", m.delta_n);
    m.k11 = r.number("material", "k11_pN", m.k11 * 1e12) * 1e-12;
    m.k22 = r.number("material", "k22_pN", m.k22 * 1e12) * 1e-12;
    m.k33 = r.number("material", "k33_pN", m.k33 * 1e12) * 1e-12;
    m.a_coef = r.number("material", "a_coef_Nm2", table.contains(name) ? m.a_coef : kDefaultA);
    m.b_coef = r.number("material", "b_coef_Nm2", table.contains(name) ? m.b_coef : kDefaultB);
    m.c_coef = r.number("material", "c_coef_Nm2", table.contains(name) ? m.c_coef : kDefaultC);
    c.material = m;

    c.model.quartic = choose<QuarticConvention>(
        "model.quartic_convention", r.text("model", "quartic_convention", "tr_q2_sq"),
        {{"tr_q2_sq", QuarticConvention::tr_q2_sq}, {"tr_q4", QuarticConvention::tr_q4}});
    c.model.elastic = choose<ElasticRule>("model.elastic_rule", r.text("model", "elastic_rule", "k11"),
                                          {{"k11", ElasticRule::k11}, {"average", ElasticRule::average}});
    const std::string sref = r.text("model", "s_ref", "auto");
    if (sref != "auto") c.model.s_ref = parse_double("model.s_ref", sref);

    auto& cell = c.cell;
    cell.lc_thickness = r.number("cell", "lc_thickness_um", 80.0) * 1e-6;
    const std::vector<double> cover_t = r.numbers("cell", "cover_thickness_um", {50.0});
    const std::vector<double> cover_e = r.numbers("cell", "cover_eps", {3.5});
    const std::vector<double> inner_t = r.numbers("cell", "inner_thickness_um", {});
    const std::vector<double> inner_e = r.numbers("cell", "inner_eps", {});
    if (cover_t.size() != cover_e.size() || inner_t.size() != inner_e.size())
        throw ConfigError("config: layer thickness and eps lists differ in length");
    cell.cover_layers.clear();
    for (std::size_t k = 0; k < cover_t.size(); ++k) cell.cover_layers.push_back({cover_t[k] * 1e-6, cover_e[k]});
    cell.inner_layers.clear();
    for (std::size_t k = 0; k < inner_t.size(); ++k) cell.inner_layers.push_back({inner_t[k] * 1e-6, inner_e[k]});
    cell.electrodes.kind = choose<ElectrodeKind>("cell.electrode", r.text("cell", "electrode", "grid"),
                                                 {{"grid", ElectrodeKind::grid}, {"plate", ElectrodeKind::plate}});
    cell.electrodes.width = r.number("cell", "electrode_width_um", 1.0) * 1e-6;
    cell.electrodes.gap = r.number("cell", "electrode_gap_um", 49.0) * 1e-6;
    cell.electrodes.offset = r.number("cell", "electrode_offset_um", 0.0) * 1e-6;
    const std::vector<double> axis = r.numbers("cell", "easy_axis", {1.0, 0.0, 0.0});
    if (axis.size() != 3) throw ConfigError("config: cell.easy_axis needs three components");
    cell.easy_axis = Eigen::Vector3d(axis[0], axis[1], axis[2]);
    cell.anchoring = choose<Anchoring>("cell.anchoring", r.text("cell", "anchoring", "strong"),
                                       {{"strong", Anchoring::strong}, {"free", Anchoring::free}});
    cell.grid_nz = r.integer("cell", "grid_nz", 129);
    cell.grid_nx = r.integer("cell", "grid_nx", 128);

    c.sweep.start = r.number("sweep", "start_V", 0.0);
    c.sweep.stop = r.number("sweep", "stop_V", 3.0);
    c.sweep.count = r.integer("sweep", "count", 61);
    c.sweep.warm_start = r.flag("sweep", "warm_start", true);
    c.sweep.profile_voltages = r.numbers("sweep", "profile_voltages_V", {1.0});

    auto& so = c.solver;
    so.tol_q = r.number("solver", "tol_q", so.tol_q);
    so.energy_rtol = r.number("solver", "energy_rtol", so.energy_rtol);
    so.max_steps = r.integer("solver", "max_steps", static_cast<int>(so.max_steps));
    so.poisson_every = r.integer("solver", "poisson_every", so.poisson_every);
    so.tilt_perturbation = r.number("solver", "tilt_perturbation_rad", so.tilt_perturbation);
    so.scheme = choose<StepScheme>("solver.scheme", r.text("solver", "scheme", "linearly_implicit"),
                                   {{"linearly_implicit", StepScheme::linearly_implicit},
                                    {"explicit_euler", StepScheme::explicit_euler}});
    so.poisson.method = choose<PoissonMethod>("solver.poisson", r.text("solver", "poisson", "direct"),
                                              {{"direct", PoissonMethod::direct}, {"sor", PoissonMethod::sor}});
    so.poisson.tol = r.number("solver", "poisson_tol", so.poisson.tol);
    c.average = choose<PermittivityAverage>(
        "solver.permittivity_average", r.text("solver", "permittivity_average", "volume"),
        {{"volume", PermittivityAverage::volume}, {"series", PermittivityAverage::series}});

    auto& op = c.optics;
    op.voltage = r.number("optics", "voltage_V", 1.0);
    op.options.wave.wavelength = r.number("optics", "wavelength_nm", 532.0) * 1e-9;
    op.options.wave.eta = r.number("optics", "eta", 0.0);
    op.options.wave.n_in = r.number("optics", "n_in", 1.5);
    op.options.wave.n_out = r.number("optics", "n_out", 1.5);
    op.options.outer_index = r.number("optics", "outer_index", 1.0);
    const bool ito = r.flag("optics", "ito", true);
    ItoCoating coat;
    coat.thickness = r.number("optics", "ito_thickness_nm", coat.thickness * 1e9) * 1e-9;
    coat.index = cdouble(r.number("optics", "ito_n", coat.index.real()), r.number("optics", "ito_k", coat.index.imag()));
    op.options.ito = ito ? std::optional<ItoCoating>(coat) : std::nullopt;
    op.options.polarisation = choose<Polarisation>(
        "optics.polarisation", r.text("optics", "polarisation", "unpolarised"),
        {{"unpolarised", Polarisation::unpolarised}, {"x", Polarisation::x}, {"y", Polarisation::y},
         {"crossed_45", Polarisation::crossed_45}});
    op.spectrum_start = r.number("optics", "spectrum_start_nm", 400.0) * 1e-9;
    op.spectrum_stop = r.number("optics", "spectrum_stop_nm", 700.0) * 1e-9;
    op.spectrum_count = r.integer("optics", "spectrum_count", 61);

    auto& an = c.antenna;
    an.eps_low = r.number("antenna", "eps_low", an.eps_low);
    an.f_low = r.number("antenna", "f_low_GHz", an.f_low * 1e-9) * 1e9;
    an.eps_high = r.number("antenna", "eps_high", an.eps_high);
    an.f_high = r.number("antenna", "f_high_GHz", an.f_high * 1e-9) * 1e9;
    an.q_factor = r.number("antenna", "q_factor", an.q_factor);
    an.c_p = r.number("antenna", "c_p_pF", an.c_p * 1e12) * 1e-12;
    an.z0 = r.number("antenna", "z0_ohm", an.z0);
    an.band_low = r.number("antenna", "band_low_GHz", an.band_low * 1e-9) * 1e9;
    an.band_high = r.number("antenna", "band_high_GHz", an.band_high * 1e-9) * 1e9;
    an.s11_eps = r.number("antenna", "s11_eps", an.s11_eps);
    an.s11_start = r.number("antenna", "s11_start_GHz", an.s11_start * 1e-9) * 1e9;
    an.s11_stop = r.number("antenna", "s11_stop_GHz", an.s11_stop * 1e-9) * 1e9;
    an.s11_count = r.integer("antenna", "s11_count", an.s11_count);

    auto& sp = c.spiral;
    sp.params.form = choose<SpiralForm>("spiral.form", r.text("spiral", "form", "archimedean"),
                                        {{"archimedean", SpiralForm::archimedean},
                                         {"exponential", SpiralForm::exponential}});
    sp.params.r0 = r.number("spiral", "r0_mm", 4.5) * 1e-3;
    sp.params.r1 = r.number("spiral", "r1_mm", 4.7) * 1e-3;
    const std::string alpha = r.text("spiral", "alpha", "auto");
    if (alpha != "auto") sp.params.alpha = parse_double("spiral.alpha", alpha);
    sp.params.phi_max = r.number("spiral", "phi_max_pi", 6.0) * kPi;
    sp.samples_per_turn = r.integer("spiral", "samples_per_turn", 64);

    c.output_dir = r.text("output", "dir", "out");
    r.check_all_used();
    validate_config(c);
    return c;
}

RunConfig load_config(const std::string& path, const MaterialTable& table) {
    std::ifstream in(path);
    if (!in) throw IoError(fmt::format("cannot read config file '{}'", path));
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), table);
}

std::string serialize_config(const RunConfig& c) {
    fmt::memory_buffer b;
    auto kv = [&](const char* key, const std::string& value) {
        fmt::format_to(std::back_inserter(b), "{} = {}\n", key, value);
    };
    auto section = [&](const char* name) {
        fmt::format_to(std::back_inserter(b), "{}[{}]\n", b.size() ? "\n" : "", name);
    };
    const auto& m = c.material;
    section("material");
    kv("name", m.name);
    kv("clearing_temp_C", num(m.clearing_temp_c));
    kv("eps_perp", num(m.eps_perp));
    kv("delta_eps", num(m.delta_eps));
    kv("n_o", num(m.n_o));
    kv("delta_n", num(m.delta_n));
    kv("k11_pN", num(m.k11 * 1e12));
    kv("k22_pN", num(m.k22 * 1e12));
    kv("k33_pN", num(m.k33 * 1e12));
    kv("a_coef_Nm2", num(m.a_coef));
    kv("b_coef_Nm2", num(m.b_coef));
    kv("c_coef_Nm2", num(m.c_coef));

    section("model");
    kv("quartic_convention", to_string(c.model.quartic));
    kv("elastic_rule", to_string(c.model.elastic));
    kv("s_ref", c.model.s_ref ? num(*c.model.s_ref) : "auto");

    const auto& cell = c.cell;
    std::vector<double> ct, ce, it, ie;
    for (const auto& l : cell.cover_layers) {
        ct.push_back(l.thickness * 1e6);
        ce.push_back(l.eps);
    }
    for (const auto& l : cell.inner_layers) {
        it.push_back(l.thickness * 1e6);
        ie.push_back(l.eps);
    }
    section("cell");
    kv("lc_thickness_um", num(cell.lc_thickness * 1e6));
    kv("cover_thickness_um", list(ct));
    kv("cover_eps", list(ce));
    kv("inner_thickness_um", list(it));
    kv("inner_eps", list(ie));
    kv("electrode", cell.electrodes.kind == ElectrodeKind::grid ? "grid" : "plate");
    kv("electrode_width_um", num(cell.electrodes.width * 1e6));
    kv("electrode_gap_um", num(cell.electrodes.gap * 1e6));
    kv("electrode_offset_um", num(cell.electrodes.offset * 1e6));
    kv("easy_axis", list({cell.easy_axis.x(), cell.easy_axis.y(), cell.easy_axis.z()}));
    kv("anchoring", cell.anchoring == Anchoring::strong ? "strong" : "free");
    kv("grid_nz", num(cell.grid_nz));
    kv("grid_nx", num(cell.grid_nx));

    section("sweep");
    kv("start_V", num(c.sweep.start));
    kv("stop_V", num(c.sweep.stop));
    kv("count", num(c.sweep.count));
    kv("warm_start", c.sweep.warm_start ? "true" : "false");
    kv("profile_voltages_V", list(c.sweep.profile_voltages));

    const auto& so = c.solver;
    section("solver");
    kv("tol_q", num(so.tol_q));
    kv("energy_rtol", num(so.energy_rtol));
    kv("max_steps", num(static_cast<double>(so.max_steps)));
    kv("poisson_every", num(so.poisson_every));
    kv("tilt_perturbation_rad", num(so.tilt_perturbation));
    kv("scheme", to_string(so.scheme));
    kv("poisson", to_string(so.poisson.method));
    kv("poisson_tol", num(so.poisson.tol));
    kv("permittivity_average", to_string(c.average));

    const auto& op = c.optics;
    const ItoCoating coat = op.options.ito.value_or(ItoCoating{});
    section("optics");
    kv("voltage_V", num(op.voltage));
    kv("wavelength_nm", num(op.options.wave.wavelength * 1e9));
    kv("eta", num(op.options.wave.eta));
    kv("n_in", num(op.options.wave.n_in));
    kv("n_out", num(op.options.wave.n_out));
    kv("outer_index", num(op.options.outer_index));
    kv("ito", op.options.ito ? "true" : "false");
    kv("ito_thickness_nm", num(coat.thickness * 1e9));
    kv("ito_n", num(coat.index.real()));
    kv("ito_k", num(coat.index.imag()));
    kv("polarisation", to_string(op.options.polarisation));
    kv("spectrum_start_nm", num(op.spectrum_start * 1e9));
    kv("spectrum_stop_nm", num(op.spectrum_stop * 1e9));
    kv("spectrum_count", num(op.spectrum_count));

    const auto& an = c.antenna;
    section("antenna");
    kv("eps_low", num(an.eps_low));
    kv("f_low_GHz", num(an.f_low * 1e-9));
    kv("eps_high", num(an.eps_high));
    kv("f_high_GHz", num(an.f_high * 1e-9));
    kv("q_factor", num(an.q_factor));
    kv("c_p_pF", num(an.c_p * 1e12));
    kv("z0_ohm", num(an.z0));
    kv("band_low_GHz", num(an.band_low * 1e-9));
    kv("band_high_GHz", num(an.band_high * 1e-9));
    kv("s11_eps", num(an.s11_eps));
    kv("s11_start_GHz", num(an.s11_start * 1e-9));
    kv("s11_stop_GHz", num(an.s11_stop * 1e-9));
    kv("s11_count", num(an.s11_count));

    const auto& sp = c.spiral;
    section("spiral");
    kv("form", sp.params.form == SpiralForm::archimedean ? "archimedean" : "exponential");
    kv("r0_mm", num(sp.params.r0 * 1e3));
    kv("r1_mm", num(sp.params.r1 * 1e3));
    kv("alpha", sp.params.alpha ? num(*sp.params.alpha) : "auto");
    kv("phi_max_pi", num(sp.params.phi_max / kPi));
    kv("samples_per_turn", num(sp.samples_per_turn));

    section("output");
    kv("dir", c.output_dir);
    return fmt::to_string(b);
}

std::string config_hash(const RunConfig& config) {
    RunConfig c = config;
    c.output_dir = "-";
    const std::string text = serialize_config(c);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("config_hash: SHA-256 failed");
    std::string hex;
    for (unsigned int k = 0; k < len; ++k) hex += fmt::format("{:02x}", digest[k]);
    return hex;
}

}  // namespace lctune
