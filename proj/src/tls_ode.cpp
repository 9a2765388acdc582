#include "iontrap/tls_ode.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "iontrap/error.hpp"

namespace iontrap {

namespace {

using cplx = std::complex<double>;
using Vec = std::array<cplx, 2>;

// Dormand-Prince 5(4) tableau
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                 b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;

struct Rhs {
  const DriveProfile& p;

  // dc/dt = -i H c
  Vec operator()(double t, const Vec& y) const {
    const double om = p.rabi ? p.rabi(t) : 0.0;
    const double dz = p.static_delta + (p.shift ? p.shift(t) : 0.0);
    const cplx mi{0.0, -0.5};
    return {mi * (dz * y[0] + om * y[1]), mi * (om * y[0] - dz * y[1])};
  }
};

Vec axpy(const Vec& y, double h, std::initializer_list<std::pair<double, const Vec*>> terms) {
  Vec out = y;
  for (const auto& [coef, k] : terms) {
    out[0] += h * coef * (*k)[0];
    out[1] += h * coef * (*k)[1];
  }
  return out;
}

struct StepOut {
  Vec y5;
  Vec err;
  Vec k7;
};

StepOut dp_step(const Rhs& f, double t, const Vec& y, const Vec& k1, double h) {
  const Vec k2 = f(t + c2 * h, axpy(y, h, {{a21, &k1}}));
  const Vec k3 = f(t + c3 * h, axpy(y, h, {{a31, &k1}, {a32, &k2}}));
  const Vec k4 = f(t + c4 * h, axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
  const Vec k5 = f(t + c5 * h, axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
  const Vec k6 =
      f(t + h, axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
  const Vec y5 = axpy(y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
  const Vec k7 = f(t + h, y5);
  Vec err{};
  for (int i = 0; i < 2; ++i)
    err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
  return {y5, err, k7};
}

}  // namespace

TlsResult integrate_tls(const DriveProfile& p, SpinAmplitudes initial, double tol) {
  if (!(tol >= 1e-12 && tol <= 1e-6))
    throw DomainError("integrate_tls: tolerance must lie in [1e-12, 1e-6]");
  if (std::abs(initial.norm() - 1.0) > 1e-6)
    throw DomainError("integrate_tls: initial state must be normalized");
  const double span = p.t_end - p.t_begin;
  TlsResult out;
  out.state = initial;
  if (span == 0.0) return out;

  const Rhs f{p};
  const double dir = span > 0.0 ? 1.0 : -1.0;
  const double h_min = 1e-14 * std::abs(span);
  double t = p.t_begin;
  Vec y{initial.up, initial.down};
  Vec k1 = f(t, y);
  double h = dir * std::abs(span) * 1e-3;

  while (dir * (p.t_end - t) > 0.0) {
    if (dir * (t + h - p.t_end) > 0.0) h = p.t_end - t;
    const StepOut s = dp_step(f, t, y, k1, h);
    double en = 0.0;
    for (int i = 0; i < 2; ++i) {
      const double scale = tol + tol * std::max(std::abs(y[i]), std::abs(s.y5[i]));
      const double e = std::abs(s.err[i]) / scale;
      // NaN from an undefined drive must count as a failed step.
      en = std::isfinite(e) && std::isfinite(std::abs(s.y5[i])) ? std::max(en, e)
                                                              : std::numeric_limits<double>::infinity();
      if (std::isinf(en)) break;
    }
    if (en <= 1.0) {
      t += h;
      y = s.y5;
      k1 = s.k7;
      ++out.accepted_steps;
    } else {
      ++out.rejected_steps;
    }
    const double factor = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
    h *= en <= 1.0 ? factor : std::min(factor, 1.0);
    if (std::abs(h) < h_min && dir * (p.t_end - t) > h_min)
      throw ConvergenceError("integrate_tls: step size underflow at t = " + std::to_string(t));
  }
  out.state = {y[0], y[1]};
  const double drift = std::abs(out.state.norm() - 1.0);
  if (!(drift <= 100.0 * tol))
    throw ConvergenceError("integrate_tls: norm drift " + std::to_string(drift));
  return out;
}

SpinAmplitudes integrate_tls_fixed(const DriveProfile& p, SpinAmplitudes initial,
                                   std::size_t steps) {
  if (steps == 0) throw DomainError("integrate_tls_fixed: steps must be positive");
  const Rhs f{p};
  const double h = (p.t_end - p.t_begin) / static_cast<double>(steps);
  Vec y{initial.up, initial.down};
  double t = p.t_begin;
  Vec k1 = f(t, y);
  for (std::size_t n = 0; n < steps; ++n) {
    const StepOut s = dp_step(f, t, y, k1, h);
    y = s.y5;
    k1 = s.k7;
    t = p.t_begin + static_cast<double>(n + 1) * h;
  }
  return {y[0], y[1]};
}

DriveProfile pulse_drive(const PulseParams& pulse, double shift_peak, double half_span_fwhm) {
  pulse.validate();
  const double peak = envelope_peak(pulse);
  const Envelope shape = pulse.envelope;
  const double fwhm = pulse.fwhm;
  DriveProfile d;
  d.rabi = [=](double t) { return peak * envelope_shape(shape, fwhm, t); };
  if (shift_peak != 0.0)
    d.shift = [=](double t) { return shift_peak * envelope_shape(shape, fwhm, t); };
  d.static_delta = pulse.detuning_qubit;
  d.t_begin = -half_span_fwhm * fwhm;
  d.t_end = half_span_fwhm * fwhm;
  return d;
}

LightShiftReport lightshift_fidelity(const BeamEnergies& energies, const BeamWaists& waists,
                                     const IonSpecies& species, const PulseParams& pulse,
                                     const LightShiftOptions& opts) {
  pulse.validate();
  if (!(energies.pi >= 0.0) || !(energies.sigma_minus >= 0.0))
    throw DomainError("lightshift_fidelity: beam energies must be non-negative");
  if (!(waists.pi > 0.0) || !(waists.sigma_minus > 0.0))
    throw DomainError("lightshift_fidelity: beam waists must be positive");

  LightShiftReport r;
  r.laser_detuning = laser_detuning_for_wavelength(opts.laser_wavelength, species);
  r.e_pi = peak_field_from_energy(energies.pi, waists.pi, pulse.envelope, pulse.fwhm);
  r.e_sigma_minus =
      peak_field_from_energy(energies.sigma_minus, waists.sigma_minus, pulse.envelope, pulse.fwhm);

  FieldConfig fc;
  fc.e_pi = r.e_pi;
  fc.e_sigma_minus = r.e_sigma_minus;
  fc.laser_detuning = r.laser_detuning;
  r.rabi_peak_eq = two_photon_rabi(fc, species).magnitude();
  r.shift_peak = differential_light_shift(fc, species);

  if (r.rabi_peak_eq == 0.0) {
    // No Raman coupling: the pulse cannot be calibrated and nothing transfers.
    r.coupled = false;
    r.fidelity = 0.0;
    return r;
  }
  r.rabi_peak = envelope_peak(pulse);
  r.calibration_factor = r.rabi_peak / r.rabi_peak_eq;

  const DriveProfile drive = pulse_drive(pulse, opts.zero_shift ? 0.0 : r.shift_peak);
  const TlsResult res = integrate_tls(drive, SpinAmplitudes{}, opts.tol);
  r.fidelity = std::norm(res.state.down);
  return r;
}

}  // namespace iontrap
