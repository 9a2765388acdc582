#pragma once

#include <complex>
#include <cstddef>
#include <functional>

#include "iontrap/phys_core.hpp"
#include "iontrap/pulse_physics.hpp"

namespace iontrap {

/// Amplitudes on (|up>, |down>), with sigma_z |up> = +|up>.
struct SpinAmplitudes {
  std::complex<double> up{1.0, 0.0};
  std::complex<double> down{0.0, 0.0};

  double norm() const { return std::norm(up) + std::norm(down); }
};

/// H(t) = 1/2 [Omega(t) sigma_x + (delta + delta_2gamma(t)) sigma_z].
struct DriveProfile {
  std::function<double(double)> rabi;   // rad/s
  std::function<double(double)> shift;  // rad/s
  double static_delta = 0.0;            // rad/s
  double t_begin = 0.0;                 // s
  double t_end = 0.0;                   // s; may be < t_begin for backward runs
};

struct TlsResult {
  SpinAmplitudes state;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
};

/// Adaptive Dormand-Prince 5(4). `tol` in [1e-12, 1e-6] is used as both
/// absolute and relative tolerance on the amplitudes. Throws
/// ConvergenceError on step-size underflow or if the norm drifts by more
/// than 100 tol.
TlsResult integrate_tls(const DriveProfile& p, SpinAmplitudes initial, double tol = 1e-10);

/// Same scheme with `steps` equal steps and no error control; used to
/// measure the convergence order.
SpinAmplitudes integrate_tls_fixed(const DriveProfile& p, SpinAmplitudes initial,
                                   std::size_t steps);

/// Drive built from a pulse envelope: Omega(t) follows envelope_value, the
/// light shift follows the same unit-peak shape scaled to `shift_peak`.
/// The time span is +/- `half_span_fwhm` FWHM.
DriveProfile pulse_drive(const PulseParams& pulse, double shift_peak = 0.0,
                         double half_span_fwhm = 20.0);

struct BeamEnergies {
  double pi = 24e-9;           // J
  double sigma_minus = 14e-9;  // J
};

struct BeamWaists {
  double pi = 8.5e-6;          // m
  double sigma_minus = 20e-6;  // m
};

struct LightShiftOptions {
  double laser_wavelength = 532e-9;  // m
  bool zero_shift = false;           // drop delta_2gamma after calibration
  double tol = 1e-10;
};

struct LightShiftReport {
  double fidelity = 0.0;          // transfer probability up -> down
  double e_pi = 0.0;              // V/m, peak
  double e_sigma_minus = 0.0;     // V/m, peak
  double laser_detuning = 0.0;    // rad/s
  double rabi_peak_eq = 0.0;      // rad/s, |Omega_2gamma| from the field formula
  double rabi_peak = 0.0;         // rad/s, after calibration to the pulse area
  double shift_peak = 0.0;        // rad/s, delta_2gamma at the peak
  double calibration_factor = 0.0;  // rabi_peak / rabi_peak_eq
  bool coupled = true;            // false when a beam is dark
};

/// Light-shift-limited SDK fidelity. The pi beam carries pure pi light and
/// the sigma beam pure sigma-, so E_sigma+ = 0. The Rabi envelope is scaled
/// to the pulse area (tuning the pi-beam energy, which leaves the shift
/// untouched), then the driven two-level problem is integrated from |up>.
LightShiftReport lightshift_fidelity(const BeamEnergies& energies, const BeamWaists& waists,
                                     const IonSpecies& species, const PulseParams& pulse,
                                     const LightShiftOptions& opts = {});

}  // namespace iontrap
