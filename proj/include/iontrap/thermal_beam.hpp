#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "iontrap/reduction.hpp"

namespace iontrap {

/// Beam waist against the thermal position spread of the ion.
/// g = w0^2 / (2 sigma_ion^2); sigma_ion = 0 gives g = inf.
class BeamThermalConfig {
 public:
  /// From physical inputs; sigma_ion = sqrt(k_B T / (m omega^2)).
  static BeamThermalConfig thermal(double waist, double temperature, double mass,
                                   double trap_omega);
  /// Directly from the spread, for oracle tests at a chosen g.
  static BeamThermalConfig from_spread(double waist, double sigma_ion);
  static BeamThermalConfig from_g(double g, double waist = 1.0);

  double waist() const { return waist_; }
  double sigma_ion() const { return sigma_; }
  double g() const { return g_; }
  std::optional<double> temperature() const { return temperature_; }

 private:
  BeamThermalConfig(double waist, double sigma, std::optional<double> temperature);

  double waist_;
  double sigma_;
  double g_;
  std::optional<double> temperature_;
};

struct SeriesOptions {
  std::size_t max_terms = 10000;
  double tolerance = 1e-12;
};

struct SeriesResult {
  double value;
  std::size_t terms;
  /// Rounding bound from the largest partial term, relative to |value|.
  double cancellation_error;
};

/// 1F2(a; b, c; x) by term recursion. Throws DomainError for non-positive
/// integer b or c, ConvergenceError if the terms do not decay in time.
SeriesResult hyp1f2_series(double a, double b, double c, double x,
                           const SeriesOptions& opts = {});
double hyp1f2(double a, double b, double c, double x, const SeriesOptions& opts = {});

/// 2a * int_0^1 u^(2a-1) cos(z u) du, which equals 1F2(a; 1/2, 1+a; -z^2/4).
/// Stable for large z where the series cancels.
double thermal_cos_average(double a, double z);

/// P_down = (1 - 1F2(g/2; 1/2, 1+g/2; -theta^2)) / 2 with theta = area / 2.
double thermal_rabi_pdown(double theta, const BeamThermalConfig& cfg);

/// Spatial dependence of the local pulse area across the beam.
enum class BeamProfile {
  field,      // area * exp(-r^2 / w0^2); matches the closed form at the same g
  intensity,  // area * exp(-2 r^2 / w0^2); matches the closed form at g / 2
};

/// Monte-Carlo average of sin^2(local_area / 2) over transverse positions
/// (x, y) drawn from independent Gaussians of std sigma_ion.
MeanEstimate mc_thermal_rabi(double area, const BeamThermalConfig& cfg,
                             std::size_t samples, std::uint64_t seed,
                             BeamProfile profile = BeamProfile::field);
MeanEstimate mc_thermal_rabi_serial(double area, const BeamThermalConfig& cfg,
                                    std::size_t samples, std::uint64_t seed,
                                    BeamProfile profile = BeamProfile::field);

/// Linear energy-per-area calibration: energy = calibration * area.
double pi_energy_from_area(double area, double calibration);

}  // namespace iontrap
