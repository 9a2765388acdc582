#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "iontrap/datasets.hpp"
#include "iontrap/least_squares.hpp"

namespace iontrap {

/// Projection-noise variance p(1-p)/N, with p(1-p) floored at 1/(4N).
double binomial_variance(double p_hat, std::size_t repetitions);

/// Weighted fit of p(delta) = offset + (amplitude/2) cos(delta tau + phase).
/// Parameters: amplitude (peak-to-trough, >= 0), phase, offset.
FitResult fit_fringe(std::span<const FringePoint> points, double wait_time);

/// Weighted residuals of the fringe model in (amplitude, phase, offset).
ResidualFn fringe_residual_fn(std::vector<FringePoint> points, double wait_time);

struct RabiGeometry {
  double waist = 8.5e-6;     // m
  double mass = 0.0;         // kg
  double trap_omega = 0.0;   // rad/s
};

/// 1/2 + scale (P_down(theta, g(T)) - 1/2) with theta = (pi/2) E / E_pi.
double rabi_model(double energy, double pi_energy, double temperature, double scale,
                  const RabiGeometry& geo);

/// Weighted residuals in (pi_energy, temperature, scale).
ResidualFn rabi_residual_fn(std::vector<RabiPoint> points, const RabiGeometry& geo);

struct RabiFitOptions {
  /// Narrows the coarse E_pi scan to [start / 1.5, 1.5 start].
  std::optional<double> pi_energy_start;
  std::optional<double> temperature_start;
  bool fix_scale = false;
  double scale = 1.0;  // start, or value when fixed
};

/// Parameters: pi_energy (J), temperature (K), scale. When the temperature
/// is not resolved, extras["temperature_upper_90"] holds the one-sided 90%
/// profile-likelihood bound.
FitResult fit_rabi_curve(std::span<const RabiPoint> points, const RabiGeometry& geo,
                         const RabiFitOptions& opts = {});

/// Residuals in (omega, nbar, A, B).
ResidualFn revival_residual_fn(std::vector<VisibilityPoint> points, double eta);

struct RevivalFitOptions {
  std::optional<double> omega_start;
  std::optional<double> nbar_start;
  std::size_t starts = 8;
  /// Parameters held fixed by name ("omega", "nbar", "A", "B").
  std::map<std::string, double> fixed;
};

/// Fit of V = A + B exp[-eta^2 (1 - cos omega tau)(2 nbar + 1)] with eta fixed.
/// Parameters: omega (rad/s), nbar, A, B. extras["tau_rev"] = 2 pi / omega.
FitResult fit_revival(std::span<const VisibilityPoint> points, double eta,
                      const RevivalFitOptions& opts = {});

struct RevivalAnalysis {
  std::vector<double> wait_times;
  std::vector<FitResult> fringes;
  std::vector<VisibilityPoint> visibilities;
  FitResult revival;
};

/// Per-wait-time fringe fits followed by the revival fit.
RevivalAnalysis analyze_revival(const FringeDataset& data, double eta,
                                const RevivalFitOptions& opts = {});

struct ConfidenceInterval {
  double lower;
  double upper;
};

/// Likelihood-ratio-ordered (Feldman-Cousins) belt for a Gaussian
/// measurement x ~ N(mu, sigma) of a parameter with mu <= bound.
class FeldmanCousinsBelt {
 public:
  FeldmanCousinsBelt(double sigma, double bound_upper, double cl,
                     std::size_t grid_points = 2001, double span_sigmas = 8.0);

  struct Acceptance {
    double x_lo;
    double x_hi;  // +inf at mu = bound
  };

  /// Acceptance region in x for true value mu.
  Acceptance acceptance(double mu) const;

  /// Set of mu whose acceptance region contains `measured`.
  ConfidenceInterval interval(double measured) const;

  const std::vector<double>& grid() const { return grid_; }
  const std::vector<Acceptance>& belt() const { return belt_; }
  double sigma() const { return sigma_; }
  double bound() const { return bound_; }
  double cl() const { return cl_; }

 private:
  double solve_root(double measured, bool upper_edge) const;

  double sigma_;
  double bound_;
  double cl_;
  double z_central_;  // two-sided quantile for the unconstrained case
  std::vector<double> grid_;
  std::vector<Acceptance> belt_;
};

ConfidenceInterval feldman_cousins_interval(double measured, double sigma, double bound_upper,
                                            double cl);

/// raw / spam. Throws ValidationError when raw exceeds spam by more than
/// the slack fraction.
double spam_correct(double raw_visibility, double spam_visibility, double slack = 0.05);

double standard_normal_cdf(double x);
double standard_normal_quantile(double p);

}  // namespace iontrap
