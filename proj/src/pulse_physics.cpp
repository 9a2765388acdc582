#include "iontrap/pulse_physics.hpp"

#include <cmath>

#include "iontrap/error.hpp"

namespace iontrap {

namespace c = constants;

namespace {

// Half-maximum points: sech(x) = 1/2 at x = acosh(2), sech^2(x) = 1/2 at x = acosh(sqrt 2).
const double kSechHalf = std::acosh(2.0);
const double kSech2Half = std::acosh(std::numbers::sqrt2);

// Constant from the Rosen-Zener fidelity expression.
constexpr double kRzWidth = 1.76;

double sech(double x) { return 1.0 / std::cosh(x); }

void check_poles(double delta, double omega_fs, PoleGuard guard) {
  if (std::abs(delta) < guard.threshold || std::abs(delta - omega_fs) < guard.threshold)
    throw PoleError("laser detuning within the pole guard of a resonance");
}

}  // namespace

void PulseParams::validate() const {
  if (!(fwhm > 0.0) || !std::isfinite(fwhm)) throw DomainError("pulse FWHM must be positive");
  if (!(area >= 0.0) || !std::isfinite(area)) throw DomainError("pulse area must be non-negative");
  if (!std::isfinite(detuning_qubit)) throw DomainError("qubit detuning must be finite");
}

double envelope_time_constant(Envelope shape, double fwhm) {
  return shape == Envelope::sech ? fwhm / (2.0 * kSechHalf) : fwhm / (2.0 * kSech2Half);
}

double envelope_unit_integral(Envelope shape, double fwhm) {
  const double t = envelope_time_constant(shape, fwhm);
  return shape == Envelope::sech ? c::pi * t : 2.0 * t;
}

double envelope_shape(Envelope shape, double fwhm, double t) {
  const double s = sech(t / envelope_time_constant(shape, fwhm));
  return shape == Envelope::sech ? s : s * s;
}

double envelope_peak(const PulseParams& p) {
  p.validate();
  return p.area / envelope_unit_integral(p.envelope, p.fwhm);
}

double envelope_value(const PulseParams& p, double t) {
  return envelope_peak(p) * envelope_shape(p.envelope, p.fwhm, t);
}

double rosen_zener_fidelity(const PulseParams& p) {
  p.validate();
  const double s = std::sin(0.5 * p.area);
  const double h = sech(p.detuning_qubit * p.fwhm / kRzWidth);
  return s * s * h * h;
}

double rosen_zener_matched_fwhm(double tau) {
  if (!(tau > 0.0)) throw DomainError("pulse timescale must be positive");
  const double t0 = 2.0 * tau / (kRzWidth * c::pi);
  return 2.0 * kSechHalf * t0;
}

RabiFrequency two_photon_rabi(const FieldConfig& f, const IonSpecies& s, PoleGuard guard) {
  const double delta = f.laser_detuning;
  const double wfs = s.fine_structure_omega();
  check_poles(delta, wfs, guard);
  const double d_over_hbar = s.dipole_moment() / c::hbar;
  const double pref = std::numbers::sqrt2 / (6.0 * delta) * d_over_hbar * d_over_hbar *
                      (2.0 * delta / (delta - wfs) - 1.0);
  const std::complex<double> fields =
      std::conj(f.e_pi) * f.e_sigma_minus + std::conj(f.e_sigma_plus) * f.e_pi;
  return {pref * fields};
}

double differential_light_shift(const FieldConfig& f, const IonSpecies& s, PoleGuard guard) {
  const double delta = f.laser_detuning;
  const double wfs = s.fine_structure_omega();
  check_poles(delta, wfs, guard);
  const double d_over_hbar = s.dipole_moment() / c::hbar;
  const double pref = d_over_hbar * d_over_hbar / (6.0 * delta) *
                      (4.0 * delta / (delta - wfs) + 1.0);
  return pref * (std::norm(f.e_sigma_plus) - std::norm(f.e_sigma_minus));
}

MagicPoint magic_detuning(const IonSpecies& s) {
  const double delta = s.fine_structure_omega() / 5.0;
  return {delta, omega_to_wavelength(s.resonance_omega0() + delta)};
}

double laser_detuning_for_wavelength(double wavelength, const IonSpecies& s) {
  return wavelength_to_omega(wavelength) - s.resonance_omega0();
}

double peak_field_from_energy(double energy, double waist, Envelope shape, double fwhm) {
  if (!(energy >= 0.0)) throw DomainError("pulse energy must be non-negative");
  if (!(waist > 0.0)) throw DomainError("beam waist must be positive");
  if (!(fwhm > 0.0)) throw DomainError("pulse FWHM must be positive");
  const double peak_power = energy / envelope_unit_integral(shape, fwhm);
  const double peak_intensity = 2.0 * peak_power / (c::pi * waist * waist);
  return std::sqrt(2.0 * peak_intensity / (c::c * c::epsilon0));
}

}  // namespace iontrap
