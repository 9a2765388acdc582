#pragma once

#include <complex>

#include "iontrap/constants.hpp"
#include "iontrap/phys_core.hpp"

namespace iontrap {

enum class Envelope { sech, sech_squared };

/// A single Raman pulse. `fwhm` is the full width at half maximum of the
/// Rabi frequency Omega(t) itself, for either envelope shape.
struct PulseParams {
  Envelope envelope = Envelope::sech;
  double fwhm = 16.4e-12;          // s
  double area = constants::pi;     // rad, integral of Omega dt
  double detuning_qubit = 0.0;     // rad/s, qubit splitting delta

  void validate() const;
};

/// Time constant T of Omega(t) = Omega0 f(t / T) for the given shape and FWHM.
double envelope_time_constant(Envelope shape, double fwhm);

/// Integral of f(t / T) over all t, for unit peak.
double envelope_unit_integral(Envelope shape, double fwhm);

/// Unit-peak shape f(t / T).
double envelope_shape(Envelope shape, double fwhm, double t);

/// Peak Rabi frequency Omega0 giving the pulse its area.
double envelope_peak(const PulseParams& p);

/// Omega(t), rad/s.
double envelope_value(const PulseParams& p, double t);

/// Single-pulse transfer fidelity sin^2(theta/2) sech^2(delta tau / 1.76).
double rosen_zener_fidelity(const PulseParams& p);

/// Omega-FWHM of the sech envelope whose exact Rosen-Zener transfer
/// sin^2(A/2) sech^2(pi delta T0 / 2) equals rosen_zener_fidelity at pulse
/// timescale `tau`. Equivalent to T0 = 2 tau / (1.76 pi).
double rosen_zener_matched_fwhm(double tau);

/// Polarization amplitudes (V/m) and laser detuning Delta = omega_L - omega0.
struct FieldConfig {
  std::complex<double> e_pi{0.0, 0.0};
  std::complex<double> e_sigma_plus{0.0, 0.0};
  std::complex<double> e_sigma_minus{0.0, 0.0};
  double laser_detuning = 0.0;  // rad/s
};

/// Minimum distance (rad/s) of Delta from either pole, 0 and omega_FS.
struct PoleGuard {
  double threshold = constants::two_pi * 1e9;
};

struct RabiFrequency {
  std::complex<double> value;
  double magnitude() const { return std::abs(value); }
  double phase() const { return std::arg(value); }
};

RabiFrequency two_photon_rabi(const FieldConfig& f, const IonSpecies& s,
                              PoleGuard guard = {});

/// Differential light shift delta_2gamma (rad/s). Positive raises the
/// up-state energy relative to down.
double differential_light_shift(const FieldConfig& f, const IonSpecies& s,
                                PoleGuard guard = {});

struct MagicPoint {
  double laser_detuning;  // rad/s, = omega_FS / 5
  double wavelength;      // m
};

/// Root of 4 Delta / (Delta - omega_FS) + 1 = 0.
MagicPoint magic_detuning(const IonSpecies& s);

/// Delta for a laser of the given vacuum wavelength.
double laser_detuning_for_wavelength(double wavelength, const IonSpecies& s);

/// Peak |E| (V/m) at the focus of a Gaussian beam with 1/e^2 intensity
/// radius `waist` delivering `energy` in a pulse whose intensity follows
/// the unit-peak envelope shape. Uses I = c eps0 |E|^2 / 2.
double peak_field_from_energy(double energy, double waist, Envelope shape, double fwhm);

}  // namespace iontrap
