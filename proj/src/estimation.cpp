#include "iontrap/estimation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <tuple>

#include "iontrap/constants.hpp"
#include "iontrap/error.hpp"
#include "iontrap/thermal_beam.hpp"

namespace iontrap {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

template <class T, class Key>
std::vector<T> sorted_copy(std::span<const T> in, Key key) {
  std::vector<T> v(in.begin(), in.end());
  std::sort(v.begin(), v.end(), [&](const T& a, const T& b) { return key(a) < key(b); });
  return v;
}

// Lowest chi^2 wins; exact ties go to the lexicographically smaller vector.
bool better(const FitResult& a, const FitResult& b) {
  if (a.chi2 != b.chi2) return a.chi2 < b.chi2;
  return a.values < b.values;
}

}  // namespace

double binomial_variance(double p_hat, std::size_t repetitions) {
  if (repetitions < 1) throw ValidationError("repetitions must be >= 1");
  const double n = static_cast<double>(repetitions);
  return std::max(p_hat * (1.0 - p_hat), 1.0 / (4.0 * n)) / n;
}

// ---------------------------------------------------------------- fringe

FitResult fit_fringe(std::span<const FringePoint> points_in, double wait_time) {
  if (points_in.size() < 4) throw ValidationError("fit_fringe needs at least 4 points");
  const auto points = sorted_copy(points_in, [](const FringePoint& p) {
    return std::tuple(p.detuning, p.p_up, p.repetitions);
  });
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd y(n), w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = points[static_cast<std::size_t>(i)];
    if (!(p.p_up >= 0.0 && p.p_up <= 1.0)) throw ValidationError("p_up outside [0, 1]");
    const double ph = p.detuning * wait_time;
    x(i, 0) = 1.0;
    x(i, 1) = std::cos(ph);
    x(i, 2) = std::sin(ph);
    y[i] = p.p_up;
    w[i] = 1.0 / binomial_variance(p.p_up, p.repetitions);
  }
  const Eigen::MatrixXd a = x.transpose() * w.asDiagonal() * x;
  const Eigen::VectorXd rhs = x.transpose() * w.asDiagonal() * y;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(a);
  const double emax = eig.eigenvalues().maxCoeff();
  if (!(eig.eigenvalues().minCoeff() > 1e-10 * emax))
    throw ValidationError("fit_fringe: degenerate design (detuning phases do not resolve a sinusoid)");
  const Eigen::Matrix3d cov_lin = a.inverse();
  const Eigen::Vector3d beta = cov_lin * rhs;

  const double c = beta[1], s = beta[2];
  const double rho = std::hypot(c, s);
  FitResult out;
  out.names = {"amplitude", "phase", "offset"};
  out.values = {2.0 * rho, rho > 0.0 ? std::atan2(-s, c) : 0.0, beta[0]};
  // d(amplitude, phase, offset) / d(offset, c, s)
  Eigen::Matrix3d d = Eigen::Matrix3d::Zero();
  d(2, 0) = 1.0;
  if (rho > 0.0) {
    d(0, 1) = 2.0 * c / rho;
    d(0, 2) = 2.0 * s / rho;
    d(1, 1) = s / (rho * rho);
    d(1, 2) = -c / (rho * rho);
  }
  Eigen::Matrix3d cov = d * cov_lin * d.transpose();
  if (!(rho > 0.0)) {
    cov(0, 0) = 2.0 * (cov_lin(1, 1) + cov_lin(2, 2));
    cov(1, 1) = inf;
    out.warnings.push_back("zero amplitude; phase undefined");
  }
  out.covariance.assign(3, std::vector<double>(3));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out.covariance[i][j] = cov(i, j);
  out.sigmas = {std::sqrt(cov(0, 0)), std::sqrt(cov(1, 1)), std::sqrt(cov(2, 2))};
  const Eigen::VectorXd r = y - x * beta;
  out.chi2 = r.dot(w.asDiagonal() * r);
  out.dof = points.size() - 3;
  out.converged = true;
  return out;
}

ResidualFn fringe_residual_fn(std::vector<FringePoint> pts, double wait_time) {
  return [pts = std::move(pts), wait_time](std::span<const double> p, std::span<double> out) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double model = p[2] + 0.5 * p[0] * std::cos(pts[i].detuning * wait_time + p[1]);
      out[i] = (pts[i].p_up - model) / std::sqrt(binomial_variance(pts[i].p_up, pts[i].repetitions));
    }
  };
}

// ------------------------------------------------------------------ Rabi

double rabi_model(double energy, double pi_energy, double temperature, double scale,
                  const RabiGeometry& geo) {
  if (!(pi_energy > 0.0)) throw DomainError("rabi_model: pi_energy must be positive");
  const auto cfg = BeamThermalConfig::thermal(geo.waist, temperature, geo.mass, geo.trap_omega);
  const double theta = 0.5 * constants::pi * energy / pi_energy;
  return 0.5 + scale * (thermal_rabi_pdown(theta, cfg) - 0.5);
}

namespace {

constexpr double min_temperature = 1e-9;  // K; the log parameter is clamped here

}  // namespace

ResidualFn rabi_residual_fn(std::vector<RabiPoint> pts, const RabiGeometry& geo) {
  std::vector<double> inv_sigma(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i)
    inv_sigma[i] = 1.0 / std::sqrt(binomial_variance(pts[i].p_down, pts[i].repetitions));
  return [pts, geo, inv_sigma](std::span<const double> p, std::span<double> out) {
    for (std::size_t i = 0; i < pts.size(); ++i)
      out[i] = (pts[i].p_down - rabi_model(pts[i].energy, p[0], p[1], p[2], geo)) * inv_sigma[i];
  };
}

namespace {

std::vector<ParamSpec> rabi_specs(double e_pi, double t, const RabiFitOptions& opts, double scale) {
  return {
      {"pi_energy", e_pi, Transform::log, false, 0.0, inf},
      {"temperature", std::max(t, min_temperature), Transform::log, false, min_temperature, inf},
      {"scale", opts.fix_scale ? opts.scale : scale, Transform::identity, opts.fix_scale, -2.0, 2.0},
  };
}

}  // namespace

FitResult fit_rabi_curve(std::span<const RabiPoint> points_in, const RabiGeometry& geo,
                         const RabiFitOptions& opts) {
  if (points_in.size() < 6) throw ValidationError("fit_rabi_curve needs at least 6 points");
  if (!(geo.waist > 0.0 && geo.mass > 0.0 && geo.trap_omega > 0.0))
    throw ValidationError("fit_rabi_curve: waist, mass and trap frequency must be positive");
  RabiDataset ds{sorted_copy(points_in, [](const RabiPoint& p) {
    return std::tuple(p.energy, p.p_down, p.repetitions);
  })};
  ds.validate();
  const auto& pts = ds.points;
  const double e_max = pts.back().energy;
  if (!(e_max > 0.0)) throw ValidationError("fit_rabi_curve: all energies are zero");

  const ResidualFn fn = rabi_residual_fn(pts, geo);
  const std::size_t n = pts.size();

  // Coarse scan with the scale solved in closed form for each (E_pi, T).
  struct Candidate {
    double chi2, e_pi, t, scale;
  };
  std::vector<Candidate> cands;
  std::vector<double> e_grid, t_grid;
  if (opts.pi_energy_start) {
    // A start is a hint: the curve is many periods long, so even a 20% error
    // in E_pi lands in another fringe's basin. Scan a neighbourhood of it.
    if (!(*opts.pi_energy_start > 0.0)) throw ValidationError("pi_energy start must be positive");
    const std::size_t ne = 61;
    for (std::size_t k = 0; k < ne; ++k)
      e_grid.push_back(*opts.pi_energy_start / 1.5 * std::pow(2.25, static_cast<double>(k) / (ne - 1)));
  } else {
    const std::size_t ne = 240;
    for (std::size_t k = 0; k < ne; ++k)
      e_grid.push_back(e_max / 40.0 * std::pow(80.0, static_cast<double>(k) / (ne - 1)));
  }
  if (opts.temperature_start)
    t_grid = {*opts.temperature_start};
  else
    t_grid = {1e-5, 1e-4, 5e-4, 2e-3};
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 / binomial_variance(pts[i].p_down, pts[i].repetitions);
  for (double t : t_grid) {
    for (double e : e_grid) {
      std::vector<double> q(n);
      double sxy = 0.0, sxx = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        q[i] = rabi_model(pts[i].energy, e, t, 1.0, geo) - 0.5;
        sxy += w[i] * q[i] * (pts[i].p_down - 0.5);
        sxx += w[i] * q[i] * q[i];
      }
      double s = opts.fix_scale ? opts.scale : (sxx > 0.0 ? sxy / sxx : 1.0);
      s = std::clamp(s, -2.0, 2.0);
      double chi2 = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double r = pts[i].p_down - 0.5 - s * q[i];
        chi2 += w[i] * r * r;
      }
      cands.push_back({chi2, e, t, s});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.chi2, a.e_pi, a.t) < std::tie(b.chi2, b.e_pi, b.t);
  });

  FitResult best;
  bool have = false;
  for (std::size_t k = 0; k < std::min<std::size_t>(3, cands.size()); ++k) {
    const auto& c = cands[k];
    FitResult r = levenberg_marquardt(fn, n, rabi_specs(c.e_pi, c.t, opts, c.scale));
    if (!have || better(r, best)) {
      best = std::move(r);
      have = true;
    }
  }

  const double t_hat = best.value("temperature");
  const bool unresolved = best.degenerate || t_hat <= 10.0 * min_temperature ||
                          !(best.sigma("temperature") < t_hat);
  if (unresolved) {
    // Keep E_pi and scale uncertainties meaningful by freezing T at its estimate,
    // then bound T from above with a profile-likelihood scan.
    auto specs = rabi_specs(best.value("pi_energy"), t_hat, opts, best.value("scale"));
    specs[1].fixed = true;
    FitResult frozen = levenberg_marquardt(fn, n, specs);
    const double chi2_min = std::min(frozen.chi2, best.chi2);
    frozen.sigmas[1] = inf;
    frozen.covariance[1][1] = inf;
    frozen.warnings.push_back("temperature not resolved by the data; see temperature_upper_90");

    // Profile chi^2 rises monotonically above the estimate; walk geometrically then bisect.
    auto profile = [&](double t) {
      auto sp = rabi_specs(frozen.values[0], t, opts, frozen.values[2]);
      sp[1].fixed = true;
      return levenberg_marquardt(fn, n, sp).chi2 - chi2_min;
    };
    const double target = 2.705543454095404;  // chi^2_1 quantile for a one-sided 90% bound
    double lo = std::max(t_hat, 1e-7), hi = lo;
    double dlo = profile(lo), dhi = dlo;
    for (int k = 0; k < 60 && dhi < target; ++k) {
      lo = hi;
      dlo = dhi;
      hi *= 2.0;
      dhi = profile(hi);
    }
    double upper = hi;
    if (dhi >= target && dlo < target) {
      for (int k = 0; k < 40; ++k) {
        const double mid = std::sqrt(lo * hi);
        (profile(mid) < target ? lo : hi) = mid;
      }
      upper = std::sqrt(lo * hi);
    } else if (dlo >= target) {
      upper = lo;
    } else {
      upper = inf;
    }
    frozen.extras["temperature_upper_90"] = upper;
    best = std::move(frozen);
  }
  return best;
}

// --------------------------------------------------------------- revival

ResidualFn revival_residual_fn(std::vector<VisibilityPoint> pts, double eta) {
  return [pts, eta](std::span<const double> p, std::span<double> out) {
    const double k = eta * eta * (2.0 * p[1] + 1.0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double env = std::exp(-k * (1.0 - std::cos(p[0] * pts[i].wait_time)));
      out[i] = (pts[i].visibility - (p[2] + p[3] * env)) / pts[i].sigma;
    }
  };
}

FitResult fit_revival(std::span<const VisibilityPoint> points_in, double eta,
                      const RevivalFitOptions& opts) {
  if (points_in.size() < 8) throw ValidationError("fit_revival needs at least 8 points");
  if (!(eta > 0.0)) throw ValidationError("fit_revival: eta must be positive");
  for (const auto& [name, v] : opts.fixed)
    if (name != "omega" && name != "nbar" && name != "A" && name != "B")
      throw ValidationError("fit_revival: unknown parameter '" + name + "'");
  const auto pts = sorted_copy(points_in, [](const VisibilityPoint& p) {
    return std::tuple(p.wait_time, p.visibility, p.sigma);
  });
  for (const auto& p : pts)
    if (!(p.sigma > 0.0) || !(p.wait_time >= 0.0) || !std::isfinite(p.visibility))
      throw ValidationError("fit_revival: sigma must be positive and wait times non-negative");

  // Peak, baseline and half-width from the data.
  std::size_t ipk = 0;
  double vmin = pts[0].visibility;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].visibility > pts[ipk].visibility) ipk = i;
    vmin = std::min(vmin, pts[i].visibility);
  }
  const double vmax = pts[ipk].visibility;
  const double half = 0.5 * (vmin + vmax);
  std::size_t left = ipk, right = ipk;
  while (left > 0 && pts[left - 1].visibility > half) --left;
  while (right + 1 < pts.size() && pts[right + 1].visibility > half) ++right;
  const bool bracketed = left > 0 && right + 1 < pts.size();

  FitResult best;
  bool have = false;
  std::vector<std::string> warnings;
  if (!bracketed) warnings.push_back("revival not bracketed by the data");

  const double tau_pk = pts[ipk].wait_time;
  if (!(tau_pk > 0.0) && !opts.omega_start && !opts.fixed.count("omega"))
    throw ValidationError("fit_revival: cannot infer a start for omega; give omega_start");
  const double omega0 = opts.omega_start.value_or(constants::two_pi / tau_pk);
  double nbar0 = 1000.0;
  if (opts.nbar_start) {
    nbar0 = *opts.nbar_start;
  } else if (bracketed) {
    const double hw = 0.5 * (pts[right + 1].wait_time + pts[right].wait_time -
                             pts[left - 1].wait_time - pts[left].wait_time) / 2.0;
    const double k = 2.0 * std::log(2.0) / std::pow(omega0 * hw, 2);
    nbar0 = std::max(1.0, 0.5 * (k / (eta * eta) - 1.0));
  }

  auto fixed_or = [&](const std::string& name, double v) {
    auto it = opts.fixed.find(name);
    return it == opts.fixed.end() ? std::pair{v, false} : std::pair{it->second, true};
  };
  const ResidualFn fn = revival_residual_fn(pts, eta);
  const std::size_t starts = std::max<std::size_t>(1, opts.starts);
  for (std::size_t s = 0; s < starts; ++s) {
    const double factor =
        starts == 1 ? 1.0 : std::pow(2.0, (static_cast<double>(s) - starts / 2.0) / 2.0);
    auto [om, fo] = fixed_or("omega", omega0);
    auto [nb, fn_] = fixed_or("nbar", nbar0 * factor);
    auto [a, fa] = fixed_or("A", vmin);
    auto [b, fb] = fixed_or("B", std::max(vmax - vmin, 1e-3));
    std::vector<ParamSpec> specs = {
        {"omega", om, Transform::log, fo, 0.0, inf},
        {"nbar", nb, Transform::log, fn_, 0.0, inf},
        {"A", a, Transform::identity, fa},
        {"B", b, Transform::identity, fb},
    };
    FitResult r;
    try {
      r = levenberg_marquardt(fn, pts.size(), specs);
    } catch (const ConvergenceError&) {
      continue;
    }
    if (!have || better(r, best)) {
      best = std::move(r);
      have = true;
    }
  }
  if (!have) throw ConvergenceError("fit_revival: no start produced a finite fit");
  for (auto& w : warnings) best.warnings.push_back(w);
  const double om = best.value("omega");
  best.extras["tau_rev"] = constants::two_pi / om;
  best.extras["tau_rev_sigma"] = constants::two_pi / (om * om) * best.sigma("omega");
  return best;
}

RevivalAnalysis analyze_revival(const FringeDataset& data, double eta,
                                const RevivalFitOptions& opts) {
  data.validate();
  RevivalAnalysis out;
  for (const auto& [tau, pts] : data.by_wait_time()) {
    FitResult f = fit_fringe(pts, tau);
    out.wait_times.push_back(tau);
    out.visibilities.push_back({tau, f.value("amplitude"), f.sigma("amplitude")});
    out.fringes.push_back(std::move(f));
  }
  out.revival = fit_revival(out.visibilities, eta, opts);
  return out;
}

double spam_correct(double raw_visibility, double spam_visibility, double slack) {
  if (!(spam_visibility > 0.0 && spam_visibility <= 1.0))
    throw ValidationError("SPAM visibility must lie in (0, 1]");
  if (!(raw_visibility >= 0.0)) throw ValidationError("raw visibility must be non-negative");
  const double ratio = raw_visibility / spam_visibility;
  if (ratio > 1.0 + slack)
    throw ValidationError("raw visibility " + std::to_string(raw_visibility) +
                          " exceeds SPAM visibility " + std::to_string(spam_visibility));
  return ratio;
}

}  // namespace iontrap
