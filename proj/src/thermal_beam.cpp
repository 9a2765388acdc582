#include "iontrap/thermal_beam.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "iontrap/constants.hpp"
#include "iontrap/error.hpp"
#include "iontrap/phys_core.hpp"
#include "iontrap/quadrature.hpp"
#include "iontrap/random.hpp"

namespace iontrap {

namespace c = constants;

BeamThermalConfig::BeamThermalConfig(double waist, double sigma,
                                     std::optional<double> temperature)
    : waist_(waist), sigma_(sigma), temperature_(temperature) {
  if (!(waist_ > 0.0)) throw DomainError("beam waist must be positive");
  if (!(sigma_ >= 0.0)) throw DomainError("position spread must be non-negative");
  g_ = sigma_ == 0.0 ? std::numeric_limits<double>::infinity()
                     : waist_ * waist_ / (2.0 * sigma_ * sigma_);
  if (std::isfinite(g_)) {
    const double back = std::sqrt(waist_ * waist_ / (2.0 * g_));
    if (std::abs(back - sigma_) > 1e-12 * sigma_)
      throw DomainError("BeamThermalConfig: g and sigma_ion inconsistent");
  }
}

BeamThermalConfig BeamThermalConfig::thermal(double waist, double temperature, double mass,
                                             double trap_omega) {
  return BeamThermalConfig(waist, thermal_position_spread(temperature, mass, trap_omega),
                           temperature);
}

BeamThermalConfig BeamThermalConfig::from_spread(double waist, double sigma_ion) {
  return BeamThermalConfig(waist, sigma_ion, std::nullopt);
}

BeamThermalConfig BeamThermalConfig::from_g(double g, double waist) {
  if (!(g > 0.0)) throw DomainError("g must be positive");
  if (std::isinf(g)) return BeamThermalConfig(waist, 0.0, std::nullopt);
  return BeamThermalConfig(waist, waist / std::sqrt(2.0 * g), std::nullopt);
}

namespace {

bool is_nonpositive_integer(double v) { return v <= 0.0 && v == std::floor(v); }

}  // namespace

SeriesResult hyp1f2_series(double a, double b, double c_, double x, const SeriesOptions& opts) {
  if (is_nonpositive_integer(b) || is_nonpositive_integer(c_))
    throw DomainError("hyp1f2: lower parameters must not be non-positive integers");
  if (!std::isfinite(x)) throw DomainError("hyp1f2: argument must be finite");

  long double term = 1.0L;
  long double sum = 1.0L, comp = 0.0L;
  long double max_term = 1.0L;
  std::size_t k = 0;
  while (true) {
    const long double kk = static_cast<long double>(k);
    term *= (a + kk) / ((b + kk) * (c_ + kk)) * static_cast<long double>(x) / (kk + 1.0L);
    ++k;
    const long double t = sum + term;
    if (std::fabs(sum) >= std::fabs(term))
      comp += (sum - t) + term;
    else
      comp += (term - t) + sum;
    sum = t;
    max_term = std::max(max_term, std::fabs(term));
    const long double total = sum + comp;
    // Past the turning point the terms decay faster than geometrically.
    const bool decaying = kk + 1.0L > std::sqrt(std::fabs(static_cast<long double>(x)));
    if (term == 0.0L ||
        (decaying && std::fabs(term) <= opts.tolerance * 1e-3 * std::max(std::fabs(total), 1e-300L)))
      break;
    if (k >= opts.max_terms)
      throw ConvergenceError("hyp1f2: series did not converge within " +
                             std::to_string(opts.max_terms) + " terms");
  }
  const long double total = sum + comp;
  const double value = static_cast<double>(total);
  const double err = static_cast<double>(max_term * std::numeric_limits<long double>::epsilon() *
                                         std::sqrt(static_cast<long double>(k))) /
                     std::max(std::abs(value), std::numeric_limits<double>::min());
  return {value, k, err};
}

double hyp1f2(double a, double b, double c_, double x, const SeriesOptions& opts) {
  return hyp1f2_series(a, b, c_, x, opts).value;
}

double thermal_cos_average(double a, double z) {
  if (!(a > 0.0)) throw DomainError("thermal_cos_average: a must be positive");
  // Moments of u^2 under the density b u^(b-1), b = 2a, are a / (a + k).
  const double b = 2.0 * a;
  static const QuadratureRule gl = gauss_legendre(24);
  CompensatedSum acc;
  if (b < 1.0) {
    // v = u^b maps the endpoint singularity away: int_0^1 cos(z v^(1/b)) dv.
    // Phase rate is at most z / b, reached at v = 1.
    const int panels = 8 + static_cast<int>(std::ceil(std::abs(z) / b / 2.0));
    const double h = 1.0 / panels;
    for (int p = 0; p < panels; ++p) {
      const double lo = p * h;
      for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        const double v = lo + 0.5 * h * (gl.nodes[i] + 1.0);
        acc.add(0.5 * h * gl.weights[i] * std::cos(z * std::pow(v, 1.0 / b)));
      }
    }
    return acc.value();
  }
  // u = exp(-t / b): int_0^inf exp(-t) cos(z exp(-t / b)) dt, truncated at t = 60.
  constexpr double t_max = 60.0;
  const int panels = 16 + static_cast<int>(std::ceil(t_max * std::abs(z) / b / 3.0));
  const double h = t_max / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = p * h;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      const double t = lo + 0.5 * h * (gl.nodes[i] + 1.0);
      acc.add(0.5 * h * gl.weights[i] * std::exp(-t) * std::cos(z * std::exp(-t / b)));
    }
  }
  return acc.value();
}

double thermal_rabi_pdown(double theta, const BeamThermalConfig& cfg) {
  if (!(theta >= 0.0) || !std::isfinite(theta))
    throw DomainError("thermal_rabi_pdown: theta must be non-negative");
  if (theta == 0.0) return 0.0;
  if (std::isinf(cfg.g())) {
    const double s = std::sin(theta);
    return s * s;
  }
  const double a = 0.5 * cfg.g();
  double f = 0.0;
  bool have = false;
  try {
    const SeriesResult r = hyp1f2_series(a, 0.5, 1.0 + a, -theta * theta);
    if (r.cancellation_error < 1e-12) {
      f = r.value;
      have = true;
    }
  } catch (const ConvergenceError&) {
  }
  if (!have) f = thermal_cos_average(a, 2.0 * theta);
  return std::clamp(0.5 * (1.0 - f), 0.0, 1.0);
}

namespace {

struct ThermalSample {
  double area;
  double sigma;
  double inv_w2;
  std::uint64_t seed;

  double operator()(std::size_t i) const {
    KeyedRng rng(seed, i);
    const double x = sigma * rng.normal();
    const double y = sigma * rng.normal();
    const double local = area * std::exp(-(x * x + y * y) * inv_w2);
    const double s = std::sin(0.5 * local);
    return s * s;
  }
};

ThermalSample make_sampler(double area, const BeamThermalConfig& cfg, std::size_t samples,
                           std::uint64_t seed, BeamProfile profile) {
  if (samples < 1) throw DomainError("mc_thermal_rabi: samples must be >= 1");
  if (!(area >= 0.0)) throw DomainError("mc_thermal_rabi: area must be non-negative");
  const double k = profile == BeamProfile::field ? 1.0 : 2.0;
  return {area, cfg.sigma_ion(), k / (cfg.waist() * cfg.waist()), seed};
}

}  // namespace

MeanEstimate mc_thermal_rabi(double area, const BeamThermalConfig& cfg, std::size_t samples,
                             std::uint64_t seed, BeamProfile profile) {
  return parallel_mean(samples, make_sampler(area, cfg, samples, seed, profile));
}

MeanEstimate mc_thermal_rabi_serial(double area, const BeamThermalConfig& cfg,
                                    std::size_t samples, std::uint64_t seed,
                                    BeamProfile profile) {
  return serial_mean(samples, make_sampler(area, cfg, samples, seed, profile));
}

double pi_energy_from_area(double area, double calibration) {
  if (!(calibration > 0.0)) throw DomainError("energy calibration must be positive");
  if (!(area >= 0.0)) throw DomainError("pulse area must be non-negative");
  return calibration * area;
}

}  // namespace iontrap
