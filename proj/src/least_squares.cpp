#include "iontrap/least_squares.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "iontrap/error.hpp"

namespace iontrap {

std::size_t FitResult::index(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return i;
  throw std::out_of_range("FitResult: no parameter named " + std::string(name));
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Problem {
  const ResidualFn& fn;
  std::size_t n_res;
  const std::vector<ParamSpec>& specs;
  std::vector<std::size_t> free;  // indices into specs
  double fd_step;

  double to_physical(std::size_t k, double u) const {
    const ParamSpec& s = specs[free[k]];
    const double p = s.transform == Transform::log ? std::exp(u) : u;
    return std::clamp(p, s.lower, s.upper);
  }

  double to_internal(std::size_t i, double p) const {
    const ParamSpec& s = specs[i];
    if (s.transform == Transform::log) {
      if (!(p > 0.0)) throw DomainError("log-transformed parameter " + s.name + " must be positive");
      return std::log(p);
    }
    return p;
  }

  std::vector<double> physical(const VectorXd& u) const {
    std::vector<double> p(specs.size());
    for (std::size_t i = 0; i < specs.size(); ++i) p[i] = specs[i].start;
    for (std::size_t k = 0; k < free.size(); ++k) p[free[k]] = to_physical(k, u[static_cast<Eigen::Index>(k)]);
    return p;
  }

  VectorXd residual(const VectorXd& u) const {
    const std::vector<double> p = physical(u);
    std::vector<double> r(n_res);
    fn(p, r);
    return Eigen::Map<const VectorXd>(r.data(), static_cast<Eigen::Index>(n_res));
  }

  MatrixXd jacobian(const VectorXd& u) const {
    MatrixXd j(static_cast<Eigen::Index>(n_res), u.size());
    for (Eigen::Index k = 0; k < u.size(); ++k) {
      const double h = fd_step * std::max(std::abs(u[k]), 1e-2);
      VectorXd up = u, dn = u;
      up[k] += h;
      dn[k] -= h;
      j.col(k) = (residual(up) - residual(dn)) / (2.0 * h);
    }
    return j;
  }

  // dp/du
  double jacobian_of_transform(std::size_t k, double u) const {
    return specs[free[k]].transform == Transform::log ? std::exp(u) : 1.0;
  }
};

bool finite(const VectorXd& v) { return v.allFinite(); }

}  // namespace

FitResult levenberg_marquardt(const ResidualFn& residuals, std::size_t n_residuals,
                              const std::vector<ParamSpec>& params, const LmOptions& opts) {
  Problem pr{residuals, n_residuals, params, {}, opts.fd_step};
  for (std::size_t i = 0; i < params.size(); ++i)
    if (!params[i].fixed) pr.free.push_back(i);
  const auto nf = static_cast<Eigen::Index>(pr.free.size());
  if (n_residuals < pr.free.size())
    throw ValidationError("levenberg_marquardt: fewer residuals than free parameters");

  VectorXd u(nf);
  for (Eigen::Index k = 0; k < nf; ++k)
    u[k] = pr.to_internal(pr.free[static_cast<std::size_t>(k)],
                          params[pr.free[static_cast<std::size_t>(k)]].start);

  FitResult out;
  for (const auto& s : params) out.names.push_back(s.name);
  out.dof = n_residuals - pr.free.size();

  VectorXd r = pr.residual(u);
  if (!finite(r)) throw ConvergenceError("levenberg_marquardt: non-finite residuals at start");
  double cost = r.squaredNorm();
  double lambda = -1.0;
  double nu = 2.0;
  MatrixXd j = pr.jacobian(u);

  std::size_t it = 0;
  for (; it < opts.max_iterations && nf > 0; ++it) {
    const MatrixXd a = j.transpose() * j;
    const VectorXd g = j.transpose() * r;
    if (g.lpNorm<Eigen::Infinity>() <= opts.gradient_tol * std::max(1.0, cost)) {
      out.converged = true;
      break;
    }
    VectorXd diag = a.diagonal().cwiseMax(1e-12 * std::max(1.0, a.diagonal().maxCoeff()));
    if (lambda < 0.0) lambda = 1e-3 * diag.maxCoeff();

    bool accepted = false;
    for (int tries = 0; tries < 60 && !accepted; ++tries) {
      MatrixXd damped = a;
      damped.diagonal() += lambda * diag;
      const VectorXd step = damped.ldlt().solve(-g);
      const VectorXd trial = u + step;
      VectorXd rt;
      double ct = std::numeric_limits<double>::infinity();
      try {
        rt = pr.residual(trial);
        if (finite(rt)) ct = rt.squaredNorm();
      } catch (const DomainError&) {
        // Step left the model's domain (e.g. a log parameter underflowed): reject it.
      }
      const double predicted = -(step.dot(g) * 2.0 + step.dot(a * step));
      if (ct < cost) {
        const double rho = predicted > 0.0 ? (cost - ct) / predicted : 1.0;
        lambda *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
        nu = 2.0;
        const double rel_cost = (cost - ct) / std::max(cost, 1e-300);
        const double rel_step = step.norm() / (u.norm() + opts.step_tol);
        u = trial;
        r = rt;
        cost = ct;
        j = pr.jacobian(u);
        accepted = true;
        if (rel_cost < opts.cost_tol || rel_step < opts.step_tol) out.converged = true;
      } else {
        lambda *= nu;
        nu *= 2.0;
      }
    }
    if (!accepted) {
      // No downhill step at any damping: we sit at a minimum to working precision.
      out.converged = true;
      break;
    }
    if (out.converged) break;
  }
  if (nf == 0) out.converged = true;
  out.iterations = it;
  out.chi2 = cost;
  out.values = pr.physical(u);

  const std::size_t np = params.size();
  out.covariance.assign(np, std::vector<double>(np, 0.0));
  out.sigmas.assign(np, 0.0);
  if (nf > 0) {
    const MatrixXd a = j.transpose() * j;
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(a);
    const double emax = eig.eigenvalues().cwiseAbs().maxCoeff();
    const double emin = eig.eigenvalues().minCoeff();
    if (!(emax > 0.0) || emin <= 1e-13 * emax) {
      out.degenerate = true;
      out.warnings.push_back("normal matrix is singular; parameters not identifiable");
      for (std::size_t k = 0; k < pr.free.size(); ++k) {
        out.sigmas[pr.free[k]] = std::numeric_limits<double>::infinity();
        out.covariance[pr.free[k]][pr.free[k]] = std::numeric_limits<double>::infinity();
      }
    } else {
      const MatrixXd cu = a.inverse();
      for (Eigen::Index k = 0; k < nf; ++k) {
        for (Eigen::Index l = 0; l < nf; ++l) {
          const double dk = pr.jacobian_of_transform(static_cast<std::size_t>(k), u[k]);
          const double dl = pr.jacobian_of_transform(static_cast<std::size_t>(l), u[l]);
          out.covariance[pr.free[static_cast<std::size_t>(k)]][pr.free[static_cast<std::size_t>(l)]] =
              dk * cu(k, l) * dl;
        }
      }
      for (std::size_t i = 0; i < np; ++i) out.sigmas[i] = std::sqrt(std::max(0.0, out.covariance[i][i]));
    }
  }
  return out;
}

std::vector<double> chi2_gradient(const ResidualFn& residuals, std::size_t n_residuals,
                                  const std::vector<ParamSpec>& params,
                                  std::span<const double> at, const LmOptions& opts) {
  std::vector<ParamSpec> specs = params;
  for (std::size_t i = 0; i < specs.size(); ++i) specs[i].start = at[i];
  Problem pr{residuals, n_residuals, specs, {}, opts.fd_step};
  for (std::size_t i = 0; i < specs.size(); ++i)
    if (!specs[i].fixed) pr.free.push_back(i);
  VectorXd u(static_cast<Eigen::Index>(pr.free.size()));
  for (std::size_t k = 0; k < pr.free.size(); ++k)
    u[static_cast<Eigen::Index>(k)] = pr.to_internal(pr.free[k], at[pr.free[k]]);
  const VectorXd r = pr.residual(u);
  const VectorXd gu = 2.0 * pr.jacobian(u).transpose() * r;
  std::vector<double> g(specs.size(), 0.0);
  for (std::size_t k = 0; k < pr.free.size(); ++k)
    g[pr.free[k]] = gu[static_cast<Eigen::Index>(k)] /
                    pr.jacobian_of_transform(k, u[static_cast<Eigen::Index>(k)]);
  return g;
}

double chi2_at(const ResidualFn& residuals, std::size_t n_residuals, std::span<const double> at) {
  std::vector<double> r(n_residuals);
  residuals(at, r);
  double s = 0.0;
  for (double v : r) s += v * v;
  return s;
}

}  // namespace iontrap
