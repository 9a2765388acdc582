#include "iontrap/phys_core.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "iontrap/constants.hpp"
#include "iontrap/error.hpp"

namespace iontrap {

namespace c = constants;

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw DomainError(std::string(what) + " must be positive and finite");
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

IonSpecies::IonSpecies(std::string name, double mass, double resonance_omega0,
                       double fine_structure_omega, double dipole_moment)
    : name_(std::move(name)),
      mass_(mass),
      omega0_(resonance_omega0),
      omega_fs_(fine_structure_omega),
      dipole_(dipole_moment) {
  require_positive(mass_, "species mass");
  require_positive(omega0_, "resonance frequency");
  require_positive(omega_fs_, "fine-structure splitting");
  require_positive(dipole_, "dipole moment");
}

IonSpecies species_from_record(std::string name, const SpeciesRecord& rec) {
  if (!(rec.mass_amu >= 1.0 && rec.mass_amu <= 300.0))
    throw ValidationError("species " + name + ": mass_amu outside [1, 300]");
  require_positive(rec.resonance_wavelength, "resonance wavelength");
  require_positive(rec.fine_structure_wavelength, "fine-structure wavelength");
  require_positive(rec.p_half_lifetime, "P1/2 lifetime");
  if (!(rec.branching_to_ground > 0.0 && rec.branching_to_ground <= 1.0))
    throw ValidationError("species " + name + ": branching_to_ground outside (0, 1]");
  if (!(rec.fine_structure_wavelength < rec.resonance_wavelength))
    throw ValidationError("species " + name + ": P3/2 line must lie blue of P1/2");

  const double omega0 = wavelength_to_omega(rec.resonance_wavelength);
  const double omega_fs = wavelength_to_omega(rec.fine_structure_wavelength) - omega0;
  // Gamma = omega0^3 d^2 / (3 pi eps0 hbar c^3)
  const double gamma = rec.branching_to_ground / rec.p_half_lifetime;
  const double d = std::sqrt(3.0 * c::pi * c::epsilon0 * c::hbar * c::c * c::c * c::c *
                             gamma / (omega0 * omega0 * omega0));
  return IonSpecies(std::move(name), rec.mass_amu * c::atomic_mass_unit, omega0,
                    omega_fs, d);
}

std::map<std::string, IonSpecies> builtin_species() {
  std::map<std::string, IonSpecies> table;
  auto add = [&](const char* name, SpeciesRecord r) {
    table.emplace(name, species_from_record(name, r));
  };
  add("Ba138+", {138.0, 493.4e-9, 455.4e-9, 7.92e-9, 0.756});
  add("Ca40+", {40.0, 396.96e-9, 393.48e-9, 7.10e-9, 0.9357});
  add("Sr88+", {88.0, 421.67e-9, 407.89e-9, 7.39e-9, 0.9445});
  return table;
}

IonSpecies make_species(std::string_view name) {
  auto table = builtin_species();
  auto it = table.find(std::string(name));
  if (it == table.end())
    throw ValidationError("unknown species '" + std::string(name) + "'");
  return it->second;
}

std::map<std::string, IonSpecies> parse_species_table(std::string_view text) {
  std::map<std::string, SpeciesRecord> records;
  std::string current;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ValidationError("species table line " + std::to_string(line_no) +
                              ": unterminated section header");
      current = trim(std::string_view(line).substr(1, line.size() - 2));
      records[current];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos || current.empty())
      throw ValidationError("species table line " + std::to_string(line_no) +
                            ": expected 'key = value' inside a [species] section");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string val = trim(std::string_view(line).substr(eq + 1));
    double v = 0.0;
    try {
      std::size_t used = 0;
      v = std::stod(val, &used);
      if (used != val.size()) throw std::invalid_argument(val);
    } catch (const std::exception&) {
      throw ValidationError("species table line " + std::to_string(line_no) +
                            ": bad number '" + val + "'");
    }
    auto& r = records[current];
    if (key == "mass_amu") r.mass_amu = v;
    else if (key == "resonance_wavelength_nm") r.resonance_wavelength = v * 1e-9;
    else if (key == "fine_structure_wavelength_nm") r.fine_structure_wavelength = v * 1e-9;
    else if (key == "p_half_lifetime_ns") r.p_half_lifetime = v * 1e-9;
    else if (key == "branching_to_ground") r.branching_to_ground = v;
    else
      throw ValidationError("species table line " + std::to_string(line_no) +
                            ": unknown key '" + key + "'");
  }
  std::map<std::string, IonSpecies> out;
  for (const auto& [name, rec] : records) out.emplace(name, species_from_record(name, rec));
  return out;
}

std::map<std::string, IonSpecies> load_species_table(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot open species table " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_species_table(ss.str());
}

double lamb_dicke(double k_eff, double mass, double omega) {
  require_positive(k_eff, "k_eff");
  require_positive(mass, "mass");
  require_positive(omega, "trap frequency");
  return k_eff * std::sqrt(c::hbar / (2.0 * mass * omega));
}

double orthogonal_beam_k_eff(double wavelength) {
  require_positive(wavelength, "wavelength");
  return std::numbers::sqrt2 * c::two_pi / wavelength;
}

TrapParams::TrapParams(double secular_omega, double k_eff, double mass)
    : omega_(secular_omega), k_eff_(k_eff), mass_(mass),
      eta_(iontrap::lamb_dicke(k_eff, mass, secular_omega)) {}

double TrapParams::period() const { return c::two_pi / omega_; }

double thermal_nbar(double temperature, double omega, NbarConvention convention) {
  if (!(temperature >= 0.0)) throw DomainError("temperature must be non-negative");
  require_positive(omega, "trap frequency");
  if (temperature == 0.0) return 0.0;
  const double x = c::k_b * temperature / (c::hbar * omega);
  if (convention == NbarConvention::classical) return x;
  return 1.0 / std::expm1(1.0 / x);
}

double nbar_to_temperature(double nbar, double omega, NbarConvention convention) {
  if (!(nbar >= 0.0)) throw DomainError("nbar must be non-negative");
  require_positive(omega, "trap frequency");
  if (nbar == 0.0) return 0.0;
  const double quantum = c::hbar * omega / c::k_b;
  if (convention == NbarConvention::classical) return nbar * quantum;
  return quantum / std::log1p(1.0 / nbar);
}

double thermal_position_spread(double temperature, double mass, double omega) {
  if (!(temperature >= 0.0)) throw DomainError("temperature must be non-negative");
  require_positive(mass, "mass");
  require_positive(omega, "trap frequency");
  return std::sqrt(c::k_b * temperature / (mass * omega * omega));
}

double wavelength_to_omega(double wavelength) {
  require_positive(wavelength, "wavelength");
  return c::two_pi * c::c / wavelength;
}

double omega_to_wavelength(double omega) {
  require_positive(omega, "angular frequency");
  return c::two_pi * c::c / omega;
}

}  // namespace iontrap
