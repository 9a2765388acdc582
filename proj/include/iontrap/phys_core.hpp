#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace iontrap {

/// Atomic data for one ion species, as consumed by the pulse formulas.
class IonSpecies {
 public:
  IonSpecies(std::string name, double mass, double resonance_omega0,
             double fine_structure_omega, double dipole_moment);

  const std::string& name() const { return name_; }
  double mass() const { return mass_; }                          // kg
  double resonance_omega0() const { return omega0_; }            // rad/s, S1/2 -> P1/2
  double fine_structure_omega() const { return omega_fs_; }      // rad/s, P3/2 - P1/2
  double dipole_moment() const { return dipole_; }               // C m

 private:
  std::string name_;
  double mass_;
  double omega0_;
  double omega_fs_;
  double dipole_;
};

/// Spectroscopic inputs from which an IonSpecies is derived. The dipole
/// moment comes from the partial decay rate of P1/2 back to S1/2.
struct SpeciesRecord {
  double mass_amu = 0.0;
  double resonance_wavelength = 0.0;       // m, S1/2 -> P1/2
  double fine_structure_wavelength = 0.0;  // m, S1/2 -> P3/2
  double p_half_lifetime = 0.0;            // s
  double branching_to_ground = 1.0;
};

IonSpecies species_from_record(std::string name, const SpeciesRecord& rec);

/// Built-in species: "Ba138+", "Ca40+", "Sr88+".
/// Throws ValidationError naming the identifier if unknown.
IonSpecies make_species(std::string_view name);

/// Species table from a key-value file:
///
///   [Ba138+]
///   mass_amu = 138
///   resonance_wavelength_nm = 493.4
///   fine_structure_wavelength_nm = 455.4
///   p_half_lifetime_ns = 7.92
///   branching_to_ground = 0.756
///
/// '#' starts a comment.
std::map<std::string, IonSpecies> load_species_table(const std::filesystem::path& path);
std::map<std::string, IonSpecies> parse_species_table(std::string_view text);

std::map<std::string, IonSpecies> builtin_species();

/// eta = k_eff sqrt(hbar / (2 m omega)).
double lamb_dicke(double k_eff, double mass, double omega);

/// |k_sigma - k_pi| for two orthogonal beams of the same wavelength.
double orthogonal_beam_k_eff(double wavelength);

class TrapParams {
 public:
  TrapParams(double secular_omega, double k_eff, double mass);

  double secular_omega() const { return omega_; }
  double k_eff() const { return k_eff_; }
  double mass() const { return mass_; }
  double lamb_dicke() const { return eta_; }
  double period() const;  // 2 pi / omega

 private:
  double omega_;
  double k_eff_;
  double mass_;
  double eta_;
};

enum class NbarConvention { classical, bose_einstein };

/// Mean phonon number at temperature T. Classical: k_B T / (hbar omega).
double thermal_nbar(double temperature, double omega,
                    NbarConvention convention = NbarConvention::classical);
double nbar_to_temperature(double nbar, double omega,
                           NbarConvention convention = NbarConvention::classical);

/// Thermal position spread sqrt(k_B T / (m omega^2)).
double thermal_position_spread(double temperature, double mass, double omega);

double wavelength_to_omega(double wavelength);
double omega_to_wavelength(double omega);

}  // namespace iontrap
