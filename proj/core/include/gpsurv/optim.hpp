#pragma once

#include <functional>

#include <Eigen/Core>

namespace gpsurv {

struct NelderMeadOptions {
  int max_evals = 2000;
  double f_tol = 1e-8;   // stop when simplex value spread falls below this
  double x_tol = 1e-6;   // ... and its vertices lie within this box (inf-norm)
  double initial_step = 0.5;
};

struct MinimizeResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int evaluations = 0;
  int iterations = 0;
  bool converged = false;
};

/// Derivative-free simplex minimization. Non-finite objective values are
/// treated as +inf, so the simplex retreats from them.
MinimizeResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                           const Eigen::VectorXd& start, const NelderMeadOptions& opts = {});

/// Objective with analytic gradient and Hessian.
struct SecondOrder {
  double value = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

struct NewtonOptions {
  int max_iterations = 500;
  double grad_tol = 1e-8;  // inf-norm
  double initial_damping = 1e-3;
};

/// Levenberg-Marquardt damped Newton: solves (H + lambda I) p = -g, shrinks
/// lambda after accepted steps and grows it after rejected ones.
MinimizeResult damped_newton(const std::function<SecondOrder(const Eigen::VectorXd&)>& objective,
                             const Eigen::VectorXd& start, const NewtonOptions& opts = {});

}  // namespace gpsurv
