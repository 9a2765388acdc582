#include "iontrap/datasets.hpp"

#include <cmath>
#include <string>

#include "iontrap/error.hpp"

namespace iontrap {

namespace {

void check_probability(double p, std::size_t reps, const char* what) {
  if (!(p >= 0.0 && p <= 1.0))
    throw ValidationError(std::string(what) + " outside [0, 1]: " + std::to_string(p));
  if (reps < 1) throw ValidationError(std::string(what) + ": repetitions must be >= 1");
}

}  // namespace

void FringeDataset::validate(std::size_t min_points) const {
  if (records.empty()) throw ValidationError("fringe dataset is empty");
  for (const auto& r : records) {
    check_probability(r.p_up, r.repetitions, "p_up");
    if (!(r.wait_time >= 0.0) || !std::isfinite(r.detuning))
      throw ValidationError("fringe record has invalid wait time or detuning");
  }
  for (const auto& [tau, pts] : by_wait_time())
    if (pts.size() < min_points)
      throw ValidationError("wait time " + std::to_string(tau) + " s has only " +
                            std::to_string(pts.size()) + " detunings");
}

std::map<double, std::vector<FringePoint>> FringeDataset::by_wait_time() const {
  std::map<double, std::vector<FringePoint>> out;
  for (const auto& r : records) out[r.wait_time].push_back({r.detuning, r.p_up, r.repetitions});
  return out;
}

void RabiDataset::validate() const {
  if (points.empty()) throw ValidationError("Rabi dataset is empty");
  for (const auto& p : points) {
    check_probability(p.p_down, p.repetitions, "p_down");
    if (!(p.energy >= 0.0)) throw ValidationError("pulse energy must be non-negative");
  }
}

}  // namespace iontrap
