#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace lctune {

// Dielectric, optical, elastic and thermotropic constants of one nematic mixture.
// Elastic constants are stored in newtons, thermotropic coefficients in N/m^2.
struct LCMaterial {
    std::string name;
    double eps_perp = 0.0;
    double delta_eps = 0.0;
    double n_o = 0.0;        // ordinary index at 532 nm
    double delta_n = 0.0;    // birefringence at 532 nm
    double k11 = 0.0;
    double k22 = 0.0;
    double k33 = 0.0;
    double a_coef = 0.0;
    double b_coef = 0.0;
    double c_coef = 0.0;
    double clearing_temp_c = 0.0;

    double eps_par() const { return eps_perp + delta_eps; }
    double eps_mean() const { return (2.0 * eps_perp + eps_par()) / 3.0; }
    double n_e() const { return n_o + delta_n; }

    // Throws InputError when an invariant (positive permittivity, elastic
    // constants, quartic coefficient, n_o > 1) does not hold.
    void validate() const;
};

// Thermotropic coefficients used for every bundled mixture.
inline constexpr double kDefaultA = -6.5e5;
inline constexpr double kDefaultB = -16e5;
inline constexpr double kDefaultC = 39e5;

class MaterialTable {
public:
    MaterialTable() = default;
    explicit MaterialTable(std::vector<LCMaterial> materials);

    // CSV with a header row; columns may appear in any order. Missing
    // thermotropic columns fall back to the kDefault* coefficients.
    static MaterialTable parse(std::string_view text);
    static MaterialTable load(const std::filesystem::path& path);
    // Bundled table: $LCTUNE_MATERIALS if set, otherwise data/materials.csv.
    static MaterialTable builtin();
    static std::filesystem::path builtin_path();

    const std::vector<LCMaterial>& all() const { return materials_; }
    const LCMaterial& get(std::string_view name) const;
    bool contains(std::string_view name) const;

private:
    std::vector<LCMaterial> materials_;
};

}  // namespace lctune
