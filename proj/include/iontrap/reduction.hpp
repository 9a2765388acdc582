#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace iontrap {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

namespace detail {

inline MeanEstimate finish(double sum, double sum_sq, std::size_t n) {
  MeanEstimate out;
  out.samples = n;
  if (n == 0) return out;
  out.mean = sum / static_cast<double>(n);
  if (n > 1) {
    const double var =
        std::max(0.0, (sum_sq - sum * out.mean) / static_cast<double>(n - 1));
    out.std_error = std::sqrt(var / static_cast<double>(n));
  }
  return out;
}

}  // namespace detail

/// Reference reduction: one pass, in index order.
template <class Sample>
MeanEstimate serial_mean(std::size_t n, Sample&& sample) {
  CompensatedSum s, s2;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = sample(i);
    s.add(x);
    s2.add(x * x);
  }
  return detail::finish(s.value(), s2.value(), n);
}

/// OpenMP reduction over fixed-size blocks. Block boundaries and the final
/// combine order are independent of the thread count, so the result is
/// bit-identical for any OMP_NUM_THREADS.
template <class Sample>
MeanEstimate parallel_mean(std::size_t n, Sample&& sample) {
  constexpr std::size_t block = 4096;
  const std::size_t blocks = (n + block - 1) / block;
  std::vector<double> sums(blocks), sums_sq(blocks);
  const long long nb = static_cast<long long>(blocks);
#pragma omp parallel for schedule(static)
  for (long long b = 0; b < nb; ++b) {
    CompensatedSum s, s2;
    const std::size_t lo = static_cast<std::size_t>(b) * block;
    const std::size_t hi = std::min(n, lo + block);
    for (std::size_t i = lo; i < hi; ++i) {
      const double x = sample(i);
      s.add(x);
      s2.add(x * x);
    }
    sums[static_cast<std::size_t>(b)] = s.value();
    sums_sq[static_cast<std::size_t>(b)] = s2.value();
  }
  CompensatedSum s, s2;
  for (std::size_t b = 0; b < blocks; ++b) {
    s.add(sums[b]);
    s2.add(sums_sq[b]);
  }
  return detail::finish(s.value(), s2.value(), n);
}

}  // namespace iontrap
