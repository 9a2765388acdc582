#include <boost/math/special_functions/erf.hpp>
#include <algorithm>
#include <cmath>
#include <limits>

#include "iontrap/constants.hpp"
#include "iontrap/error.hpp"
#include "iontrap/estimation.hpp"

namespace iontrap {

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double standard_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("normal quantile needs p in (0, 1)");
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

// Upper acceptance edge for half-width s (in sigmas) and true value mu.
// Left of the bound the likelihood ratio is the plain Gaussian; beyond it the
// best fit sticks to the bound, which stretches the region to the right.
double upper_edge(double s, double mu, double sigma, double bound) {
  if (mu >= bound) return inf;
  if (mu + s * sigma <= bound) return mu + s * sigma;
  return 0.5 * (mu + bound) + s * s * sigma * sigma / (2.0 * (bound - mu));
}

}  // namespace

FeldmanCousinsBelt::FeldmanCousinsBelt(double sigma, double bound_upper, double cl,
                                       std::size_t grid_points, double span_sigmas)
    : sigma_(sigma), bound_(bound_upper), cl_(cl) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ValidationError("Feldman-Cousins: sigma must be positive");
  if (!(cl > 0.5 && cl < 1.0)) throw ValidationError("Feldman-Cousins: cl must lie in (0.5, 1)");
  if (!std::isfinite(bound_upper)) throw ValidationError("Feldman-Cousins: bound must be finite");
  if (grid_points < 2 || !(span_sigmas > 0.0)) throw ValidationError("Feldman-Cousins: bad grid");
  z_central_ = standard_normal_quantile(0.5 * (1.0 + cl));
  grid_.resize(grid_points);
  belt_.resize(grid_points);
  for (std::size_t i = 0; i < grid_points; ++i) {
    grid_[i] = bound_ - span_sigmas * sigma_ * (1.0 - static_cast<double>(i) / (grid_points - 1));
    belt_[i] = acceptance(grid_[i]);
  }
}

FeldmanCousinsBelt::Acceptance FeldmanCousinsBelt::acceptance(double mu) const {
  if (mu > bound_) throw DomainError("Feldman-Cousins: mu above the physical bound");
  if (mu + z_central_ * sigma_ <= bound_) return {mu - z_central_ * sigma_, mu + z_central_ * sigma_};
  // Coverage as a function of s is increasing; the root lies in [z(cl), z_central].
  auto coverage = [&](double s) {
    const double hi = upper_edge(s, mu, sigma_, bound_);
    const double p_hi = std::isinf(hi) ? 1.0 : standard_normal_cdf((hi - mu) / sigma_);
    return p_hi - standard_normal_cdf(-s) - cl_;
  };
  double lo = standard_normal_quantile(cl_), hi = z_central_;
  if (mu >= bound_) return {mu - lo * sigma_, inf};
  double s = hi;
  for (int k = 0; k < 100; ++k) {
    const double f = coverage(s);
    (f > 0.0 ? hi : lo) = s;
    // Newton step on the coverage, falling back to bisection outside the bracket.
    const double t = (upper_edge(s, mu, sigma_, bound_) - mu) / sigma_;
    const double phi_t = std::exp(-0.5 * t * t) / std::sqrt(constants::two_pi);
    const double phi_s = std::exp(-0.5 * s * s) / std::sqrt(constants::two_pi);
    const double df = phi_t * s * sigma_ / (bound_ - mu) + phi_s;
    double next = df > 0.0 ? s - f / df : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - s) < 1e-14 || hi - lo < 1e-14) {
      s = next;
      break;
    }
    s = next;
  }
  return {mu - s * sigma_, upper_edge(s, mu, sigma_, bound_)};
}

double FeldmanCousinsBelt::solve_root(double x0, bool upper_end) const {
  // upper_end: largest mu with x_lo(mu) <= x0; otherwise smallest mu with x_hi(mu) >= x0.
  auto edge = [&](double mu) {
    const auto a = acceptance(mu);
    return upper_end ? a.x_lo : a.x_hi;
  };
  // Bracket on the stored belt where possible, else extend below the grid,
  // where the belt is the central interval.
  double lo, hi;
  const auto& g = grid_;
  auto edge_at = [&](std::size_t i) { return upper_end ? belt_[i].x_lo : belt_[i].x_hi; };
  if (edge_at(0) >= x0) {
    const double shift = upper_end ? -z_central_ * sigma_ : z_central_ * sigma_;
    const double mu = x0 - shift;  // exact for mu below the grid
    if (mu <= g[0]) return mu;
    lo = g[0] - 1.0;
    hi = g[0];
  } else {
    std::size_t a = 0, b = g.size() - 1;
    if (edge_at(b) < x0) return bound_;
    while (b - a > 1) {
      const std::size_t m = (a + b) / 2;
      (edge_at(m) < x0 ? a : b) = m;
    }
    lo = g[a];
    hi = g[b];
  }
  for (int k = 0; k < 200 && hi - lo > 1e-13 * sigma_; ++k) {
    const double mid = 0.5 * (lo + hi);
    (edge(mid) < x0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

ConfidenceInterval FeldmanCousinsBelt::interval(double measured) const {
  if (!std::isfinite(measured)) throw ValidationError("Feldman-Cousins: measured value must be finite");
  const double lower = solve_root(measured, false);
  double upper = solve_root(measured, true);
  if (acceptance(bound_).x_lo <= measured) upper = bound_;
  return {std::min(lower, bound_), std::min(upper, bound_)};
}

ConfidenceInterval feldman_cousins_interval(double measured, double sigma, double bound_upper,
                                            double cl) {
  return FeldmanCousinsBelt(sigma, bound_upper, cl).interval(measured);
}

}  // namespace iontrap
