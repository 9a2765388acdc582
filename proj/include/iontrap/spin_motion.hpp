#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "iontrap/reduction.hpp"

namespace iontrap {

using cplx = std::complex<double>;

enum class Spin { up, down };

inline Spin flipped(Spin s) { return s == Spin::up ? Spin::down : Spin::up; }

/// One term weight * |spin> (x) |alpha>.
struct Branch {
  Spin spin;
  cplx alpha;
  cplx weight;
};

/// Superposition of spin-labelled coherent states. Closed under the SDK
/// operator and free harmonic evolution, so it represents the joint state
/// exactly at any temperature.
class SpinMotionState {
 public:
  SpinMotionState() = default;
  explicit SpinMotionState(std::vector<Branch> branches) : branches_(std::move(branches)) {}

  static SpinMotionState coherent(Spin spin, cplx alpha) {
    return SpinMotionState({{spin, alpha, cplx{1.0, 0.0}}});
  }

  const std::vector<Branch>& branches() const { return branches_; }
  std::size_t size() const { return branches_.size(); }

  /// <psi|psi>, including overlaps between non-orthogonal coherent states.
  double norm() const;

 private:
  std::vector<Branch> branches_;
};

struct Displaced {
  cplx alpha;
  cplx phase;
};

/// D(beta)|alpha> = phase |alpha + beta>, phase = exp((beta alpha* - beta* alpha) / 2).
Displaced displace(cplx alpha, cplx beta);

/// <a|b> = exp(-|a|^2/2 - |b|^2/2 + a* b).
cplx coherent_overlap(cplx a, cplx b);

/// U(theta) = cos(theta/2) 1 + i sin(theta/2) [D(i eta) s- + D(-i eta) s+].
SpinMotionState apply_sdk(const SpinMotionState& state, double theta, double eta);

struct RamseyConfig {
  double eta = 0.0;
  double trap_omega = 0.0;   // rad/s
  double qubit_delta = 0.0;  // rad/s
  double wait_time = 0.0;    // s
  double nbar = 0.0;

  void validate() const;
};

/// Harmonic rotation alpha -> alpha e^{-i omega tau} plus spin phases
/// e^{+i delta tau / 2} (up) and e^{-i delta tau / 2} (down), the sign for
/// which the Ramsey fringe phase is delta tau + eta^2 sin(omega tau). The
/// oscillator zero-point phase is dropped.
SpinMotionState free_evolve(const SpinMotionState& state, const RamseyConfig& cfg);

/// Throws NormalizationError if |norm - 1| > 1e-8.
double measure_up(const SpinMotionState& state);
double measure_down(const SpinMotionState& state);

/// pi/2 - wait - pi/2 from |up, alpha>, returning P_up.
double ramsey_pup_coherent(const RamseyConfig& cfg, cplx alpha);

/// P_up = 1/2 - 1/2 cos(gamma) V, gamma = delta tau + eta^2 sin(omega tau).
double ramsey_pup_analytic(const RamseyConfig& cfg);

/// Thermal average over the Glauber-Sudarshan distribution by sampling
/// alpha with <|alpha|^2> = nbar. nbar = 0 evaluates alpha = 0 once.
MeanEstimate ramsey_pup_mc(const RamseyConfig& cfg, std::size_t samples, std::uint64_t seed);
MeanEstimate ramsey_pup_mc_serial(const RamseyConfig& cfg, std::size_t samples,
                                  std::uint64_t seed);

/// Same average by Gauss-Laguerre in |alpha|^2 / nbar and a uniform phase grid.
double ramsey_pup_quadrature(const RamseyConfig& cfg, std::size_t radial_nodes = 64,
                             std::size_t phase_nodes = 64);

/// V = exp[-eta^2 (1 - cos omega tau)(2 nbar + 1)].
double visibility_analytic(const RamseyConfig& cfg);

/// V = A + B exp[-eta^2 (1 - cos omega tau)(2 nbar + 1)].
double visibility_model(const RamseyConfig& cfg, double offset, double scale);

/// V_SPAM * (F_thermal * F_lightshift) * exp(-tau / T2).
double visibility_budget(double v_spam, double f_thermal, double f_lightshift, double tau,
                         double t2);

double revival_time(double trap_omega);

/// Half width at half maximum of the visibility envelope around a revival.
double revival_half_width(double eta, double nbar, double trap_omega);

}  // namespace iontrap
