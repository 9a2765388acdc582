#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace iontrap {

struct FitResult {
  std::vector<std::string> names;
  std::vector<double> values;
  std::vector<double> sigmas;
  std::vector<std::vector<double>> covariance;
  double chi2 = 0.0;
  std::size_t dof = 0;
  std::size_t iterations = 0;
  bool converged = false;
  /// Normal matrix singular: some parameters are not identified by the data.
  bool degenerate = false;
  std::vector<std::string> warnings;
  std::map<std::string, double> extras;

  std::size_t index(std::string_view name) const;
  double value(std::string_view name) const { return values[index(name)]; }
  double sigma(std::string_view name) const { return sigmas[index(name)]; }
};

enum class Transform { identity, log };

struct ParamSpec {
  std::string name;
  double start = 0.0;
  Transform transform = Transform::identity;
  bool fixed = false;
  double lower = -std::numeric_limits<double>::infinity();  // physical units
  double upper = std::numeric_limits<double>::infinity();
};

/// Weighted residuals (data - model) / sigma for physical parameter values.
using ResidualFn = std::function<void(std::span<const double> params, std::span<double> out)>;

struct LmOptions {
  std::size_t max_iterations = 300;
  double gradient_tol = 1e-10;
  double step_tol = 1e-12;
  double cost_tol = 1e-15;
  double fd_step = 1e-6;
};

/// Damped Gauss-Newton (Levenberg-Marquardt) with central-difference
/// Jacobians in the transformed parameters. Covariance is (J^T J)^-1 mapped
/// back to physical parameters; fixed parameters get zero variance.
FitResult levenberg_marquardt(const ResidualFn& residuals, std::size_t n_residuals,
                              const std::vector<ParamSpec>& params, const LmOptions& opts = {});

/// Gradient of chi^2 = sum r^2 with respect to the physical parameters,
/// assembled as 2 J^T r from the same central-difference Jacobian the
/// optimizer uses (free parameters only; fixed ones report 0).
std::vector<double> chi2_gradient(const ResidualFn& residuals, std::size_t n_residuals,
                                  const std::vector<ParamSpec>& params,
                                  std::span<const double> at, const LmOptions& opts = {});

double chi2_at(const ResidualFn& residuals, std::size_t n_residuals,
               std::span<const double> at);

}  // namespace iontrap
