#include "iontrap/spin_motion.hpp"

#include <cmath>
#include <algorithm>
#include <limits>
#include <string>

#include "iontrap/constants.hpp"
#include "iontrap/error.hpp"
#include "iontrap/quadrature.hpp"
#include "iontrap/random.hpp"

namespace iontrap {

namespace c = constants;

namespace {

struct SpinPopulations {
  cplx up;
  cplx down;
};

SpinPopulations populations(const SpinMotionState& state) {
  CompensatedSum up_re, up_im, dn_re, dn_im;
  const auto& b = state.branches();
  for (std::size_t i = 0; i < b.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (b[i].spin != b[j].spin) continue;
      const cplx term = std::conj(b[i].weight) * b[j].weight *
                        coherent_overlap(b[i].alpha, b[j].alpha);
      if (b[i].spin == Spin::up) {
        up_re.add(term.real());
        up_im.add(term.imag());
      } else {
        dn_re.add(term.real());
        dn_im.add(term.imag());
      }
    }
  }
  return {{up_re.value(), up_im.value()}, {dn_re.value(), dn_im.value()}};
}

double checked_population(const SpinMotionState& state, Spin which) {
  const SpinPopulations p = populations(state);
  const double norm = p.up.real() + p.down.real();
  if (std::abs(norm - 1.0) > 1e-8)
    throw NormalizationError("spin-motion state norm deviates from 1 by " +
                             std::to_string(norm - 1.0));
  const cplx v = which == Spin::up ? p.up : p.down;
  if (std::abs(v.imag()) > 1e-10)
    throw NormalizationError("population has imaginary residue " + std::to_string(v.imag()));
  return std::clamp(v.real(), 0.0, 1.0);
}

}  // namespace

double SpinMotionState::norm() const {
  const SpinPopulations p = populations(*this);
  return p.up.real() + p.down.real();
}

Displaced displace(cplx alpha, cplx beta) {
  const cplx exponent = 0.5 * (beta * std::conj(alpha) - std::conj(beta) * alpha);
  // exponent is purely imaginary
  return {alpha + beta, std::polar(1.0, exponent.imag())};
}

cplx coherent_overlap(cplx a, cplx b) {
  const cplx exponent = -0.5 * std::norm(a) - 0.5 * std::norm(b) + std::conj(a) * b;
  return std::exp(exponent);
}

SpinMotionState apply_sdk(const SpinMotionState& state, double theta, double eta) {
  // Rounding residues such as cos(pi/2) ~ 6e-17 would add empty branches.
  auto snap = [](double v) { return std::abs(v) < 1e-15 ? 0.0 : v; };
  const double cs = snap(std::cos(0.5 * theta));
  const double sn = snap(std::sin(0.5 * theta));
  std::vector<Branch> out;
  out.reserve(2 * state.size());
  for (const Branch& b : state.branches()) {
    if (cs != 0.0) out.push_back({b.spin, b.alpha, b.weight * cs});
    if (sn != 0.0) {
      // s- takes up to down with D(i eta); s+ takes down to up with D(-i eta).
      const cplx kick = b.spin == Spin::up ? cplx{0.0, eta} : cplx{0.0, -eta};
      const Displaced d = displace(b.alpha, kick);
      out.push_back({flipped(b.spin), d.alpha, b.weight * cplx{0.0, sn} * d.phase});
    }
  }
  return SpinMotionState(std::move(out));
}

void RamseyConfig::validate() const {
  if (!(eta >= 0.0)) throw DomainError("Lamb-Dicke parameter must be non-negative");
  if (!(wait_time >= 0.0)) throw DomainError("wait time must be non-negative");
  if (!(nbar >= 0.0)) throw DomainError("nbar must be non-negative");
  if (!std::isfinite(trap_omega) || !std::isfinite(qubit_delta))
    throw DomainError("trap and qubit frequencies must be finite");
}

SpinMotionState free_evolve(const SpinMotionState& state, const RamseyConfig& cfg) {
  const cplx rot = std::polar(1.0, -cfg.trap_omega * cfg.wait_time);
  const double half = 0.5 * cfg.qubit_delta * cfg.wait_time;
  const cplx up_phase = std::polar(1.0, half);
  const cplx down_phase = std::polar(1.0, -half);
  std::vector<Branch> out;
  out.reserve(state.size());
  for (const Branch& b : state.branches())
    out.push_back({b.spin, b.alpha * rot, b.weight * (b.spin == Spin::up ? up_phase : down_phase)});
  return SpinMotionState(std::move(out));
}

double measure_up(const SpinMotionState& state) { return checked_population(state, Spin::up); }

double measure_down(const SpinMotionState& state) {
  return checked_population(state, Spin::down);
}

double ramsey_pup_coherent(const RamseyConfig& cfg, cplx alpha) {
  const double half_pi = 0.5 * c::pi;
  SpinMotionState s = SpinMotionState::coherent(Spin::up, alpha);
  s = apply_sdk(s, half_pi, cfg.eta);
  s = free_evolve(s, cfg);
  s = apply_sdk(s, half_pi, cfg.eta);
  return measure_up(s);
}

double visibility_analytic(const RamseyConfig& cfg) {
  cfg.validate();
  const double one_minus_cos = 1.0 - std::cos(cfg.trap_omega * cfg.wait_time);
  return std::exp(-cfg.eta * cfg.eta * one_minus_cos * (2.0 * cfg.nbar + 1.0));
}

double ramsey_pup_analytic(const RamseyConfig& cfg) {
  const double gamma = cfg.qubit_delta * cfg.wait_time +
                       cfg.eta * cfg.eta * std::sin(cfg.trap_omega * cfg.wait_time);
  return 0.5 - 0.5 * std::cos(gamma) * visibility_analytic(cfg);
}

namespace {

struct GlauberSample {
  RamseyConfig cfg;
  double spread;  // std of Re and Im
  std::uint64_t seed;

  double operator()(std::size_t i) const {
    KeyedRng rng(seed, i);
    const double re = spread * rng.normal();
    const double im = spread * rng.normal();
    return ramsey_pup_coherent(cfg, {re, im});
  }
};

template <class Reduce>
MeanEstimate glauber_average(const RamseyConfig& cfg, std::size_t samples, std::uint64_t seed,
                             Reduce reduce) {
  cfg.validate();
  if (samples < 1) throw DomainError("ramsey_pup_mc: samples must be >= 1");
  if (cfg.nbar == 0.0) return {ramsey_pup_coherent(cfg, {0.0, 0.0}), 0.0, 1};
  return reduce(samples, GlauberSample{cfg, std::sqrt(0.5 * cfg.nbar), seed});
}

}  // namespace

MeanEstimate ramsey_pup_mc(const RamseyConfig& cfg, std::size_t samples, std::uint64_t seed) {
  return glauber_average(cfg, samples, seed,
                         [](std::size_t n, const GlauberSample& s) { return parallel_mean(n, s); });
}

MeanEstimate ramsey_pup_mc_serial(const RamseyConfig& cfg, std::size_t samples,
                                  std::uint64_t seed) {
  return glauber_average(cfg, samples, seed,
                         [](std::size_t n, const GlauberSample& s) { return serial_mean(n, s); });
}

double ramsey_pup_quadrature(const RamseyConfig& cfg, std::size_t radial_nodes,
                             std::size_t phase_nodes) {
  cfg.validate();
  if (cfg.nbar == 0.0) return ramsey_pup_coherent(cfg, {0.0, 0.0});
  if (radial_nodes == 0 || phase_nodes == 0)
    throw DomainError("ramsey_pup_quadrature: node counts must be positive");
  const QuadratureRule lag = gauss_laguerre(radial_nodes);
  CompensatedSum acc;
  for (std::size_t i = 0; i < radial_nodes; ++i) {
    const double r = std::sqrt(cfg.nbar * lag.nodes[i]);
    CompensatedSum ring;
    for (std::size_t j = 0; j < phase_nodes; ++j) {
      const double phi = c::two_pi * static_cast<double>(j) / static_cast<double>(phase_nodes);
      ring.add(ramsey_pup_coherent(cfg, std::polar(r, phi)));
    }
    acc.add(lag.weights[i] * ring.value() / static_cast<double>(phase_nodes));
  }
  return acc.value();
}

double visibility_model(const RamseyConfig& cfg, double offset, double scale) {
  if (!(offset >= 0.0) || !(scale >= 0.0))
    throw DomainError("visibility_model: offset and scale must be non-negative");
  return offset + scale * visibility_analytic(cfg);
}

double visibility_budget(double v_spam, double f_thermal, double f_lightshift, double tau,
                         double t2) {
  auto unit = [](double v, const char* what) {
    if (!(v > 0.0 && v <= 1.0)) throw DomainError(std::string(what) + " must lie in (0, 1]");
  };
  unit(v_spam, "SPAM visibility");
  unit(f_thermal, "thermal fidelity");
  unit(f_lightshift, "light-shift fidelity");
  if (!(t2 > 0.0)) throw DomainError("T2 must be positive");
  if (!(tau >= 0.0)) throw DomainError("tau must be non-negative");
  return v_spam * (f_thermal * f_lightshift) * std::exp(-tau / t2);
}

double revival_time(double trap_omega) {
  if (!(trap_omega > 0.0)) throw DomainError("trap frequency must be positive");
  return c::two_pi / trap_omega;
}

double revival_half_width(double eta, double nbar, double trap_omega) {
  if (!(trap_omega > 0.0)) throw DomainError("trap frequency must be positive");
  const double k = eta * eta * (2.0 * nbar + 1.0);
  // Below ln 2 the envelope never drops to half.
  if (!(k > 0.5 * std::log(2.0))) return std::numeric_limits<double>::infinity();
  return std::acos(1.0 - std::log(2.0) / k) / trap_omega;
}

}  // namespace iontrap
