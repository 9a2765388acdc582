#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "iontrap/datasets.hpp"
#include "iontrap/estimation.hpp"
#include "iontrap/spin_motion.hpp"

namespace iontrap {

enum class PlanMode { rabi_curve, ramsey_scan, revival_scan };

/// Readout compression p_obs = 1/2 + V (p - 1/2). When both error rates are
/// given they replace V: p_obs = p (1 - e_bright) + (1 - p) e_dark, where
/// e_bright is the chance a true "1" reads as "0" and e_dark the reverse.
struct SpamModel {
  double visibility = 1.0;
  std::optional<double> e_bright;
  std::optional<double> e_dark;

  double apply(double p) const;
  void validate() const;
};

struct ExperimentPlan {
  PlanMode mode = PlanMode::rabi_curve;

  // rabi_curve
  std::vector<double> energies;  // J
  double pi_energy = 38e-9;      // J
  double temperature = 0.5e-3;   // K
  RabiGeometry geometry;

  // ramsey_scan: wait_times x detunings (absolute, rad/s).
  // revival_scan: per wait time, `fringe_points` detunings spanning one
  // fringe period above ramsey.qubit_delta.
  std::vector<double> wait_times;  // s
  std::vector<double> detunings;   // rad/s
  std::size_t fringe_points = 16;
  RamseyConfig ramsey;             // wait_time and qubit_delta overwritten per point
  double contrast = 1.0;           // extra fringe compression (pulse fidelity, dephasing)

  std::size_t repetitions = 1000;
  SpamModel spam;
  std::uint64_t seed = 1;
  bool analytic = false;  // record the compressed model without sampling

  void validate() const;
};

using SimulatedData = std::variant<RabiDataset, FringeDataset>;

RabiDataset simulate_rabi(const ExperimentPlan& plan);
FringeDataset simulate_fringes(const ExperimentPlan& plan);
SimulatedData simulate_experiment(const ExperimentPlan& plan);

/// Fraction of successes in `repetitions` Bernoulli(p) trials from stream (seed, index).
double sample_fraction(double p, std::size_t repetitions, std::uint64_t seed, std::uint64_t index);

}  // namespace iontrap
