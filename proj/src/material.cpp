#include "lctune/material.hpp"

#include "lctune/error.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#ifndef LCTUNE_DATA_DIR
#define LCTUNE_DATA_DIR "data"
#endif

namespace lctune {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

double to_double(std::string_view s, std::string_view column) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw InputError("material table: bad number '" + std::string(s) + "' in column " +
                         std::string(column));
    }
    return value;
}

}  // namespace

void LCMaterial::validate() const {
    if (name.empty()) throw InputError("material: empty name");
    if (!(eps_perp > 0.0)) throw InputError("material " + name + ": eps_perp must be > 0");
    if (!(k11 > 0.0 && k22 > 0.0 && k33 > 0.0))
        throw InputError("material " + name + ": elastic constants must be > 0");
    if (!(c_coef > 0.0)) throw InputError("material " + name + ": c_coef must be > 0");
    if (!(n_o > 1.0)) throw InputError("material " + name + ": n_o must be > 1");
    if (!(eps_par() > 0.0)) throw InputError("material " + name + ": eps_par must be > 0");
}

MaterialTable::MaterialTable(std::vector<LCMaterial> materials) : materials_(std::move(materials)) {
    for (const auto& m : materials_) m.validate();
}

MaterialTable MaterialTable::parse(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::vector<std::string> header;
    std::vector<LCMaterial> out;
    while (std::getline(in, line)) {
        const auto body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto fields = split_csv(body);
        if (header.empty()) {
            header.assign(fields.begin(), fields.end());
            if (std::find(header.begin(), header.end(), "name") == header.end())
                throw InputError("material table: header lacks a 'name' column");
            continue;
        }
        if (fields.size() != header.size())
            throw InputError("material table: row has " + std::to_string(fields.size()) +
                             " fields, header has " + std::to_string(header.size()));
        LCMaterial m;
        m.a_coef = kDefaultA;
        m.b_coef = kDefaultB;
        m.c_coef = kDefaultC;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            const std::string& col = header[i];
            const auto v = fields[i];
            if (col == "name") m.name = std::string(v);
            else if (col == "clearing_temp_c") m.clearing_temp_c = to_double(v, col);
            else if (col == "eps_perp") m.eps_perp = to_double(v, col);
            else if (col == "delta_eps") m.delta_eps = to_double(v, col);
            else if (col == "n_o") m.n_o = to_double(v, col);
            else if (col == "delta_n") m.delta_n = to_double(v, col);
            else if (col == "k11_pN") m.k11 = to_double(v, col) * 1e-12;
            else if (col == "k22_pN") m.k22 = to_double(v, col) * 1e-12;
            else if (col == "k33_pN") m.k33 = to_double(v, col) * 1e-12;
            else if (col == "a_coef_Nm2") m.a_coef = to_double(v, col);
            else if (col == "b_coef_Nm2") m.b_coef = to_double(v, col);
            else if (col == "c_coef_Nm2") m.c_coef = to_double(v, col);
            else throw InputError("material table: unknown column '" + col + "'");
        }
        m.validate();
        out.push_back(std::move(m));
    }
    if (header.empty()) throw InputError("material table: no header row");
    return MaterialTable(std::move(out));
}

MaterialTable MaterialTable::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open material table " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::filesystem::path MaterialTable::builtin_path() {
    if (const char* env = std::getenv("LCTUNE_MATERIALS"); env && *env) return env;
    return std::filesystem::path(LCTUNE_DATA_DIR) / "materials.csv";
}

MaterialTable MaterialTable::builtin() { return load(builtin_path()); }

const LCMaterial& MaterialTable::get(std::string_view name) const {
    const auto it = std::find_if(materials_.begin(), materials_.end(),
                                 [&](const LCMaterial& m) { return m.name == name; });
    if (it == materials_.end()) throw InputError("unknown material '" + std::string(name) + "'");
    return *it;
}

bool MaterialTable::contains(std::string_view name) const {
    return std::any_of(materials_.begin(), materials_.end(),
                       [&](const LCMaterial& m) { return m.name == name; });
}

}  // namespace lctune
