#pragma once

#include <cstddef>
#include <map>
#include <vector>

namespace iontrap {

struct FringePoint {
  double detuning;  // rad/s
  double p_up;
  std::size_t repetitions;
};

struct FringeRecord {
  double wait_time;  // s
  double detuning;   // rad/s
  double p_up;
  std::size_t repetitions;
};

/// Ramsey measurements: wait times x detunings x P_up.
struct FringeDataset {
  std::vector<FringeRecord> records;

  /// Throws ValidationError on p_up outside [0,1], zero repetitions, or a
  /// wait time with fewer than `min_points` detunings.
  void validate(std::size_t min_points = 4) const;
  std::map<double, std::vector<FringePoint>> by_wait_time() const;
};

struct RabiPoint {
  double energy;  // J
  double p_down;
  std::size_t repetitions;
};

struct RabiDataset {
  std::vector<RabiPoint> points;
  void validate() const;
};

struct VisibilityPoint {
  double wait_time;  // s
  double visibility;
  double sigma;
};

}  // namespace iontrap
