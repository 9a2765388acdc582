#include "iontrap/synth_data.hpp"

#include <algorithm>
#include <cmath>

#include "iontrap/constants.hpp"
#include "iontrap/error.hpp"
#include "iontrap/random.hpp"

namespace iontrap {

void SpamModel::validate() const {
  if (e_bright.has_value() != e_dark.has_value())
    throw ValidationError("SPAM error rates must be given together");
  if (e_bright) {
    if (!(*e_bright >= 0.0 && *e_bright < 1.0 && *e_dark >= 0.0 && *e_dark < 1.0 &&
          *e_bright + *e_dark < 1.0))
      throw ValidationError("SPAM error rates must lie in [0, 1) and sum below 1");
  } else if (!(visibility > 0.0 && visibility <= 1.0)) {
    throw ValidationError("SPAM visibility must lie in (0, 1]");
  }
}

double SpamModel::apply(double p) const {
  if (e_bright) return p * (1.0 - *e_bright) + (1.0 - p) * *e_dark;
  return 0.5 + visibility * (p - 0.5);
}

void ExperimentPlan::validate() const {
  if (repetitions < 1) throw ValidationError("repetitions must be >= 1");
  spam.validate();
  if (mode == PlanMode::rabi_curve) {
    if (energies.empty()) throw ValidationError("rabi plan has no energies");
    for (double e : energies)
      if (!(e >= 0.0)) throw ValidationError("pulse energies must be non-negative");
    if (!(pi_energy > 0.0) || !(temperature >= 0.0))
      throw ValidationError("pi energy must be positive and temperature non-negative");
    if (!(geometry.waist > 0.0 && geometry.mass > 0.0 && geometry.trap_omega > 0.0))
      throw ValidationError("beam waist, mass and trap frequency must be positive");
    return;
  }
  if (wait_times.empty()) throw ValidationError("Ramsey plan has no wait times");
  for (double t : wait_times)
    if (!(t >= 0.0)) throw ValidationError("wait times must be non-negative");
  if (mode == PlanMode::ramsey_scan && detunings.empty())
    throw ValidationError("Ramsey plan has no detunings");
  if (mode == PlanMode::revival_scan) {
    if (fringe_points < 4) throw ValidationError("revival scan needs >= 4 fringe points");
    for (double t : wait_times)
      if (!(t > 0.0)) throw ValidationError("revival scan wait times must be positive");
  }
  if (!(contrast >= 0.0 && contrast <= 1.0)) throw ValidationError("contrast must lie in [0, 1]");
  RamseyConfig probe = ramsey;
  probe.wait_time = wait_times.front();
  probe.validate();
}

double sample_fraction(double p, std::size_t repetitions, std::uint64_t seed, std::uint64_t index) {
  KeyedRng rng(seed, index);
  std::size_t hits = 0;
  for (std::size_t k = 0; k < repetitions; ++k) hits += rng.uniform() < p ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(repetitions);
}

namespace {

double observe(const ExperimentPlan& plan, double p, std::uint64_t index) {
  const double q = std::clamp(plan.spam.apply(p), 0.0, 1.0);
  return plan.analytic ? q : sample_fraction(q, plan.repetitions, plan.seed, index);
}

}  // namespace

RabiDataset simulate_rabi(const ExperimentPlan& plan) {
  if (plan.mode != PlanMode::rabi_curve) throw ValidationError("plan is not a Rabi curve");
  plan.validate();
  RabiDataset out;
  out.points.resize(plan.energies.size());
  const auto n = static_cast<std::ptrdiff_t>(plan.energies.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double e = plan.energies[static_cast<std::size_t>(i)];
    const double p = rabi_model(e, plan.pi_energy, plan.temperature, 1.0, plan.geometry);
    out.points[static_cast<std::size_t>(i)] = {e, observe(plan, p, static_cast<std::uint64_t>(i)),
                                               plan.repetitions};
  }
  return out;
}

FringeDataset simulate_fringes(const ExperimentPlan& plan) {
  if (plan.mode == PlanMode::rabi_curve) throw ValidationError("plan is not a Ramsey scan");
  plan.validate();
  const std::size_t per_tau =
      plan.mode == PlanMode::revival_scan ? plan.fringe_points : plan.detunings.size();
  FringeDataset out;
  out.records.resize(plan.wait_times.size() * per_tau);
  const auto n = static_cast<std::ptrdiff_t>(out.records.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t idx = 0; idx < n; ++idx) {
    const auto i = static_cast<std::size_t>(idx);
    const double tau = plan.wait_times[i / per_tau];
    const std::size_t j = i % per_tau;
    const double delta = plan.mode == PlanMode::revival_scan
                             ? plan.ramsey.qubit_delta + constants::two_pi *
                                                             static_cast<double>(j) /
                                                             (static_cast<double>(per_tau) * tau)
                             : plan.detunings[j];
    RamseyConfig cfg = plan.ramsey;
    cfg.wait_time = tau;
    cfg.qubit_delta = delta;
    const double p = 0.5 + plan.contrast * (ramsey_pup_analytic(cfg) - 0.5);
    out.records[i] = {tau, delta, observe(plan, p, i), plan.repetitions};
  }
  return out;
}

SimulatedData simulate_experiment(const ExperimentPlan& plan) {
  if (plan.mode == PlanMode::rabi_curve) return simulate_rabi(plan);
  return simulate_fringes(plan);
}

}  // namespace iontrap
