#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "iontrap/constants.hpp"
#include "iontrap/error.hpp"
#include "iontrap/estimation.hpp"
#include "iontrap/phys_core.hpp"
#include "iontrap/random.hpp"
#include "iontrap/spin_motion.hpp"

using namespace iontrap;
using constants::pi;
using constants::two_pi;

namespace {

const double trap_omega = two_pi * 32.4e3;
const double tau_fringe = 30.0e-6;

std::vector<FringePoint> fringe_points(double amp, double phase, double offset, std::size_t n,
                                       std::size_t reps = 1000) {
  std::vector<FringePoint> out;
  for (std::size_t j = 0; j < n; ++j) {
    const double d = two_pi * 150e6 + two_pi * static_cast<double>(j) / (n * tau_fringe);
    out.push_back({d, offset + 0.5 * amp * std::cos(d * tau_fringe + phase), reps});
  }
  return out;
}

RabiGeometry ba_geometry() {
  return {8.5e-6, make_species("Ba138+").mass(), trap_omega};
}

std::vector<RabiPoint> rabi_points(double e_pi, double t, double scale, const RabiGeometry& geo,
                                   std::size_t n = 80, double e_max = 380e-9) {
  std::vector<RabiPoint> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = e_max * static_cast<double>(i) / (n - 1);
    out.push_back({e, rabi_model(e, e_pi, t, scale, geo), 1000});
  }
  return out;
}

double vis_model(double tau, double omega, double nbar, double a, double b, double eta) {
  return a + b * std::exp(-eta * eta * (1.0 - std::cos(omega * tau)) * (2.0 * nbar + 1.0));
}

std::vector<VisibilityPoint> revival_points(double omega, double nbar, double a, double b,
                                            double eta, std::size_t n = 41) {
  std::vector<VisibilityPoint> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double tau = 30.3e-6 + 1.1e-6 * static_cast<double>(i) / (n - 1);
    out.push_back({tau, vis_model(tau, omega, nbar, a, b, eta), 0.01});
  }
  return out;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("binomial variance floor") {
  CHECK(binomial_variance(0.5, 100) == doctest::Approx(0.25 / 100));
  CHECK(binomial_variance(0.1, 100) == doctest::Approx(0.09 / 100));
  CHECK(binomial_variance(0.0, 100) == doctest::Approx(1.0 / (4.0 * 100 * 100)));
  CHECK(binomial_variance(1.0, 1) == doctest::Approx(0.25));
  CHECK(binomial_variance(0.999999, 1000) > 0.0);
  CHECK_THROWS_AS(binomial_variance(0.5, 0), ValidationError);
}

TEST_CASE("fringe fit: noiseless roundtrip") {
  for (double phase : {0.0, 0.7, -2.9, 3.1}) {
    const auto pts = fringe_points(0.45, phase, 0.52, 16);
    const auto r = fit_fringe(pts, tau_fringe);
    CHECK(r.converged);
    CHECK(std::abs(r.value("amplitude") - 0.45) < 1e-10);
    CHECK(std::abs(std::remainder(r.value("phase") - phase, two_pi)) < 1e-10);
    CHECK(std::abs(r.value("offset") - 0.52) < 1e-10);
    CHECK(r.chi2 < 1e-18);
    CHECK(r.dof == 13);
    CHECK(r.value("amplitude") >= 0.0);
  }
}

TEST_CASE("fringe fit: flat data and degenerate designs") {
  const auto flat = fringe_points(0.0, 0.0, 0.5, 16);
  const auto r = fit_fringe(flat, tau_fringe);
  CHECK(r.value("amplitude") < 1e-12);
  CHECK(std::isfinite(r.sigma("amplitude")));
  CHECK(r.sigma("amplitude") > 0.0);
  CHECK(r.value("amplitude") <= r.sigma("amplitude"));

  std::vector<FringePoint> same(6, {1e9, 0.3, 1000});
  CHECK_THROWS_AS(fit_fringe(same, tau_fringe), ValidationError);
  CHECK_THROWS_AS(fit_fringe(std::vector<FringePoint>(fringe_points(0.4, 0, 0.5, 3)), tau_fringe),
                  ValidationError);
  auto bad = fringe_points(0.4, 0, 0.5, 8);
  bad[2].p_up = 1.2;
  CHECK_THROWS_AS(fit_fringe(bad, tau_fringe), ValidationError);
}

TEST_CASE("fringe fit: amplitude coverage under projection noise") {
  const double amp = 0.45;
  const auto truth = fringe_points(amp, 0.4, 0.5, 16);
  int covered = 0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    auto pts = truth;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      KeyedRng rng(99, static_cast<std::uint64_t>(t) * 64 + j);
      int k = 0;
      for (std::size_t m = 0; m < pts[j].repetitions; ++m) k += rng.uniform() < truth[j].p_up;
      pts[j].p_up = static_cast<double>(k) / pts[j].repetitions;
    }
    const auto r = fit_fringe(pts, tau_fringe);
    covered += std::abs(r.value("amplitude") - amp) < 3.0 * r.sigma("amplitude");
  }
  CHECK(covered >= 190);
}

TEST_CASE("fringe fit: covariance matches the normal-matrix oracle") {
  // Evenly spaced phases over a full period make the design orthogonal:
  // var(c) = var(s) = 2 sigma^2 / n for equal weights, so var(A) = 8 sigma^2 / n.
  std::vector<FringePoint> pts;
  const std::size_t n = 16;
  for (std::size_t j = 0; j < n; ++j)
    pts.push_back({two_pi * static_cast<double>(j) / (n * tau_fringe), 0.5, 400});
  const double s2 = binomial_variance(0.5, 400);
  const auto r = fit_fringe(pts, tau_fringe);
  CHECK(r.sigma("offset") == doctest::Approx(std::sqrt(s2 / n)).epsilon(1e-10));
  CHECK(r.sigma("amplitude") == doctest::Approx(std::sqrt(8.0 * s2 / n)).epsilon(1e-10));
  CHECK_FALSE(r.sigma("phase") < 1e6);
}

TEST_CASE("fringe fit: order invariance and gradient") {
  auto pts = fringe_points(0.31, 1.1, 0.47, 20);
  for (std::size_t j = 0; j < pts.size(); ++j) pts[j].p_up += 0.01 * std::sin(3.0 * j);
  const auto a = fit_fringe(pts, tau_fringe);
  std::mt19937_64 rng(5);
  std::shuffle(pts.begin(), pts.end(), rng);
  const auto b = fit_fringe(pts, tau_fringe);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(a.values[i] - b.values[i]) < 1e-8);

  // The linear solution is the chi^2 minimum of the nonlinear model.
  const auto fn = fringe_residual_fn(pts, tau_fringe);
  std::vector<ParamSpec> specs{{"amplitude", 0}, {"phase", 0}, {"offset", 0}};
  const auto g = chi2_gradient(fn, pts.size(), specs, a.values);
  for (double gi : g) CHECK(std::abs(gi) < 1e-6);
  CHECK(chi2_at(fn, pts.size(), a.values) == doctest::Approx(a.chi2).epsilon(1e-10));
}

TEST_CASE("chi2 gradient agrees with finite differences of chi2") {
  const auto geo = ba_geometry();
  auto pts = rabi_points(38e-9, 0.5e-3, 0.9, geo, 40);
  for (std::size_t i = 0; i < pts.size(); ++i)
    pts[i].p_down = std::clamp(pts[i].p_down + 0.02 * std::sin(1.7 * i), 0.0, 1.0);
  const auto fn = rabi_residual_fn(pts, geo);
  std::vector<ParamSpec> specs{{"pi_energy", 0, Transform::log},
                               {"temperature", 0, Transform::log},
                               {"scale", 0}};
  const std::vector<double> at{40e-9, 0.6e-3, 0.85};
  const auto g = chi2_gradient(fn, pts.size(), specs, at);
  for (std::size_t k = 0; k < 3; ++k) {
    // Richardson-extrapolated central difference of the scalar objective.
    auto f = [&](double h) {
      auto p = at, m = at;
      p[k] += h;
      m[k] -= h;
      return (chi2_at(fn, pts.size(), p) - chi2_at(fn, pts.size(), m)) / (2.0 * h);
    };
    const double h = 1e-4 * std::abs(at[k]);
    const double fd = (4.0 * f(h / 2.0) - f(h)) / 3.0;
    CHECK(rel(g[k], fd) < 1e-4);
  }
}

TEST_CASE("Rabi fit: noiseless roundtrip") {
  const auto geo = ba_geometry();
  const auto pts = rabi_points(38e-9, 0.5e-3, 1.0, geo);
  const auto r = fit_rabi_curve(pts, geo);
  CHECK(r.converged);
  CHECK(rel(r.value("pi_energy"), 38e-9) < 1e-6);
  CHECK(rel(r.value("temperature"), 0.5e-3) < 1e-6);
  CHECK(std::abs(r.value("scale") - 1.0) < 1e-6);
  CHECK(r.chi2 < 1e-8);
}

TEST_CASE("Rabi fit: compressed curve, perturbed starts, order invariance") {
  const auto geo = ba_geometry();
  auto pts = rabi_points(38e-9, 0.5e-3, 0.7, geo);
  for (double f : {0.8, 1.2}) {
    RabiFitOptions o;
    o.pi_energy_start = 38e-9 * f;
    o.temperature_start = 0.5e-3 * (2.0 - f);
    o.scale = 0.7 * f;
    const auto r = fit_rabi_curve(pts, geo, o);
    CHECK(rel(r.value("pi_energy"), 38e-9) < 1e-6);
    CHECK(rel(r.value("temperature"), 0.5e-3) < 1e-6);
    CHECK(rel(r.value("scale"), 0.7) < 1e-6);
  }
  const auto a = fit_rabi_curve(pts, geo);
  std::reverse(pts.begin(), pts.end());
  std::swap(pts[3], pts[40]);
  const auto b = fit_rabi_curve(pts, geo);
  for (std::size_t i = 0; i < 3; ++i) CHECK(rel(b.values[i], a.values[i]) < 1e-8);
}

TEST_CASE("Rabi fit: optimum gradient matches finite differences") {
  const auto geo = ba_geometry();
  auto pts = rabi_points(38e-9, 0.5e-3, 0.95, geo, 60);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    KeyedRng rng(3, i);
    int k = 0;
    for (int m = 0; m < 1000; ++m) k += rng.uniform() < pts[i].p_down;
    pts[i].p_down = k / 1000.0;
  }
  const auto r = fit_rabi_curve(pts, geo);
  REQUIRE(r.converged);
  const auto fn = rabi_residual_fn(pts, geo);
  std::vector<ParamSpec> specs{{"pi_energy", 0, Transform::log},
                               {"temperature", 0, Transform::log},
                               {"scale", 0}};
  const auto g = chi2_gradient(fn, pts.size(), specs, r.values);
  for (std::size_t k = 0; k < 3; ++k) {
    // Stationarity in scaled units: |dchi2/dp| * sigma_p is a dimensionless slope.
    CHECK(std::abs(g[k]) * r.sigmas[k] < 1e-3);
  }
  CHECK(std::abs(r.value("pi_energy") - 38e-9) < 4.0 * r.sigma("pi_energy"));
}

TEST_CASE("Rabi fit: cold limit reports an upper bound") {
  const auto geo = ba_geometry();
  std::vector<RabiPoint> pts;
  for (int i = 0; i < 80; ++i) {
    const double e = 380e-9 * i / 79.0;
    pts.push_back({e, std::pow(std::sin(0.5 * pi * e / 38e-9), 2), 1000});
  }
  const auto r = fit_rabi_curve(pts, geo);
  CHECK(rel(r.value("pi_energy"), 38e-9) < 1e-4);
  REQUIRE(r.extras.count("temperature_upper_90"));
  const double ub = r.extras.at("temperature_upper_90");
  CHECK(ub > 0.0);
  CHECK(ub < 0.1e-3);
  CHECK(r.value("temperature") <= ub);
  CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("Rabi fit: preconditions") {
  const auto geo = ba_geometry();
  auto pts = rabi_points(38e-9, 0.5e-3, 1.0, geo, 5);
  CHECK_THROWS_AS(fit_rabi_curve(pts, geo), ValidationError);
  pts = rabi_points(38e-9, 0.5e-3, 1.0, geo, 10);
  CHECK_THROWS_AS(fit_rabi_curve(pts, RabiGeometry{}), ValidationError);
  pts[4].repetitions = 0;
  CHECK_THROWS_AS(fit_rabi_curve(pts, geo), ValidationError);
}

TEST_CASE("revival fit: noiseless roundtrip from perturbed starts") {
  const double omega = two_pi * 32.4e3, eta = 0.56;
  auto pts = revival_points(omega, 1059, 0.036, 0.41, eta);
  const auto r = fit_revival(pts, eta);
  CHECK(r.converged);
  CHECK(rel(r.value("omega"), omega) < 1e-8);
  CHECK(rel(r.value("nbar"), 1059) < 1e-8);
  CHECK(rel(r.value("A"), 0.036) < 1e-8);
  CHECK(rel(r.value("B"), 0.41) < 1e-8);
  CHECK(r.extras.at("tau_rev") == doctest::Approx(two_pi / omega).epsilon(1e-12));
  CHECK(r.warnings.empty());

  for (double f : {0.8, 1.2}) {
    RevivalFitOptions o;
    o.nbar_start = 1059 * f;
    o.starts = 1;
    const auto s = fit_revival(pts, eta, o);
    CHECK(rel(s.value("nbar"), 1059) < 1e-6);
    CHECK(rel(s.value("omega"), omega) < 1e-6);
  }

  std::mt19937_64 rng(11);
  std::shuffle(pts.begin(), pts.end(), rng);
  const auto b = fit_revival(pts, eta);
  for (std::size_t i = 0; i < 4; ++i) CHECK(rel(b.values[i], r.values[i]) < 1e-8);
}

TEST_CASE("revival fit: gradient at the optimum and against finite differences") {
  const double omega = two_pi * 32.4e3, eta = 0.56;
  auto pts = revival_points(omega, 1059, 0.036, 0.41, eta);
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i].visibility += 0.01 * std::cos(2.3 * i);
  const auto r = fit_revival(pts, eta);
  REQUIRE(r.converged);
  const auto fn = revival_residual_fn(pts, eta);
  std::vector<ParamSpec> specs{{"omega", 0, Transform::log},
                               {"nbar", 0, Transform::log},
                               {"A", 0},
                               {"B", 0}};
  const auto g = chi2_gradient(fn, pts.size(), specs, r.values);
  for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(g[k]) * r.sigmas[k] < 1e-3);

  std::vector<double> at{omega * (1 + 2e-5), 1100, 0.03, 0.4};
  const auto ga = chi2_gradient(fn, pts.size(), specs, at);
  for (std::size_t k = 0; k < 4; ++k) {
    const double h = 1e-5 * std::abs(at[k]);
    auto p = at, m = at;
    p[k] += h;
    m[k] -= h;
    const double fd = (chi2_at(fn, pts.size(), p) - chi2_at(fn, pts.size(), m)) / (2.0 * h);
    CHECK(rel(ga[k], fd) < 1e-4);
  }
}

TEST_CASE("revival fit: B fixed at zero is degenerate") {
  const double omega = two_pi * 32.4e3, eta = 0.56;
  const auto pts = revival_points(omega, 1059, 0.036, 0.41, eta);
  RevivalFitOptions o;
  o.fixed["B"] = 0.0;
  const auto r = fit_revival(pts, eta, o);
  CHECK(r.degenerate);
  CHECK(r.value("B") == 0.0);
}

TEST_CASE("revival fit: unbracketed data warns, bad input throws") {
  const double omega = two_pi * 32.4e3, eta = 0.56;
  std::vector<VisibilityPoint> side;
  for (int i = 0; i < 12; ++i) {
    const double tau = 30.0e-6 + 0.07e-6 * i;
    side.push_back({tau, vis_model(tau, omega, 1059, 0.036, 0.41, eta), 0.01});
  }
  const auto r = fit_revival(side, eta);
  CHECK(std::find(r.warnings.begin(), r.warnings.end(), "revival not bracketed by the data") !=
        r.warnings.end());

  auto few = revival_points(omega, 1059, 0.036, 0.41, eta, 7);
  CHECK_THROWS_AS(fit_revival(few, eta), ValidationError);
  CHECK_THROWS_AS(fit_revival(revival_points(omega, 1059, 0.036, 0.41, eta), 0.0),
                  ValidationError);
  RevivalFitOptions o;
  o.fixed["bogus"] = 1.0;
  CHECK_THROWS_AS(fit_revival(revival_points(omega, 1059, 0.036, 0.41, eta), eta, o),
                  ValidationError);
}

TEST_CASE("revival analysis from fringes") {
  const double omega = two_pi * 32.4e3, eta = 0.56;
  FringeDataset ds;
  std::vector<double> taus;
  for (int i = 0; i < 23; ++i) taus.push_back(30.3e-6 + 0.05e-6 * i);
  for (double tau : taus) {
    RamseyConfig cfg{eta, omega, 0.0, tau, 1059};
    for (int j = 0; j < 16; ++j) {
      cfg.qubit_delta = two_pi * 150e6 + two_pi * j / (16.0 * tau);
      ds.records.push_back({tau, cfg.qubit_delta, ramsey_pup_analytic(cfg), 1000});
    }
  }
  const auto a = analyze_revival(ds, eta);
  REQUIRE(a.visibilities.size() == taus.size());
  for (std::size_t i = 0; i < taus.size(); ++i)
    CHECK(std::abs(a.visibilities[i].visibility -
                   visibility_analytic({eta, omega, 0.0, taus[i], 1059})) < 1e-10);
  CHECK(rel(a.revival.value("omega"), omega) < 1e-7);
  CHECK(rel(a.revival.value("nbar"), 1059) < 1e-6);
}

TEST_CASE("Feldman-Cousins: far from the bound is the central interval") {
  const double sigma = 0.03;
  const double z = standard_normal_quantile(0.95);
  CHECK(z == doctest::Approx(1.6448536269514722).epsilon(1e-14));
  const auto ci = feldman_cousins_interval(1.0 - 10 * sigma, sigma, 1.0, 0.9);
  CHECK(std::abs(ci.lower - (1.0 - 10 * sigma - z * sigma)) < 1e-3 * sigma);
  CHECK(std::abs(ci.upper - (1.0 - 10 * sigma + z * sigma)) < 1e-3 * sigma);
}

TEST_CASE("Feldman-Cousins: acceptance regions hold cl probability") {
  const FeldmanCousinsBelt belt(0.03, 1.0, 0.9);
  for (double mu : {0.7, 0.9, 0.95, 0.97, 0.99, 0.999}) {
    const auto acc = belt.acceptance(mu);
    const double hi = std::isinf(acc.x_hi) ? 1.0 : standard_normal_cdf((acc.x_hi - mu) / 0.03);
    const double lo = standard_normal_cdf((acc.x_lo - mu) / 0.03);
    CHECK(hi - lo == doctest::Approx(0.9).epsilon(1e-10));
    CHECK(acc.x_lo < mu);
    // Likelihood-ratio ordering: both edges rank equally, R(x) = phi(x-mu)/phi(x-mu_best).
    auto logr = [&](double x) {
      const double best = std::min(x, 1.0);
      return (-(x - mu) * (x - mu) + (x - best) * (x - best)) / (2 * 0.03 * 0.03);
    };
    if (std::isfinite(acc.x_hi)) CHECK(logr(acc.x_lo) == doctest::Approx(logr(acc.x_hi)).epsilon(1e-8));
  }
  CHECK(std::isinf(belt.acceptance(1.0).x_hi));
}

TEST_CASE("Feldman-Cousins: monotone, bounded, and covering") {
  const double sigma = 0.03, bound = 1.0;
  const FeldmanCousinsBelt belt(sigma, bound, 0.9);
  double prev_lo = -1e9, prev_hi = -1e9;
  for (int i = 0; i <= 400; ++i) {
    const double x = 0.75 + 0.4 * i / 400.0;
    const auto ci = belt.interval(x);
    CHECK(ci.lower >= prev_lo - 1e-12);
    CHECK(ci.upper >= prev_hi - 1e-12);
    CHECK(ci.upper <= bound);
    CHECK(ci.lower <= ci.upper);
    prev_lo = ci.lower;
    prev_hi = ci.upper;
  }
  // Above the bound the interval still exists and shrinks toward it.
  const auto far = belt.interval(1.2);
  CHECK(far.upper == bound);
  CHECK(far.lower < bound);

  for (double mu : {0.9, 0.97, 1.0}) {
    const MeanEstimate cov = parallel_mean(20000, [&](std::size_t i) {
      KeyedRng rng(2024, i);
      const auto ci = belt.interval(mu + sigma * rng.normal());
      return (ci.lower <= mu && mu <= ci.upper) ? 1.0 : 0.0;
    });
    CHECK(cov.mean > 0.9 - 4 * cov.std_error);
    CHECK(cov.mean < 0.9 + 4 * cov.std_error + 0.02);
  }
  CHECK_THROWS_AS(FeldmanCousinsBelt(0.0, 1.0, 0.9), ValidationError);
  CHECK_THROWS_AS(FeldmanCousinsBelt(0.03, 1.0, 0.4), ValidationError);
}

TEST_CASE("SPAM correction") {
  CHECK(spam_correct(0.68, 0.70) == doctest::Approx(0.971428571).epsilon(1e-8));
  CHECK(spam_correct(0.42, 1.0) == 0.42);
  CHECK(spam_correct(0.72, 0.70) == doctest::Approx(0.72 / 0.70));
  CHECK_THROWS_AS(spam_correct(0.9, 0.7), ValidationError);
  CHECK_THROWS_AS(spam_correct(0.5, 0.0), ValidationError);
  CHECK_THROWS_AS(spam_correct(0.5, 1.1), ValidationError);
  CHECK_THROWS_AS(spam_correct(-0.1, 0.7), ValidationError);
}
