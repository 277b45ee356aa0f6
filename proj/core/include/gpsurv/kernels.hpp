#pragma once

#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace gpsurv {

/// Squared-exponential ARD kernel parameters. `sigma` is the output variance
/// (not its square root).
struct SingleKernelParams {
  double sigma = 1.0;
  Eigen::VectorXd lengthscales = Eigen::VectorXd::Ones(1);

  void validate(Eigen::Index dim) const;
};

/// Two-output convolution kernel: each output is a unique process u_r plus a
/// shared process s_r driven by the same white noise. `sigma` scales the unique
/// parts, `omega` the shared parts, `mu` translates output 2 against output 1
/// (replicated over every covariate dimension).
///
/// `lengthscales` has either one entry (one length scale for every dimension
/// and both components) or one entry per covariate dimension.
struct MultiKernelParams {
  double sigma = 1.0;
  double omega = 1.0;
  double mu = 0.0;
  Eigen::VectorXd lengthscales = Eigen::VectorXd::Ones(1);

  void validate(Eigen::Index dim) const;
  double lengthscale(Eigen::Index k) const {
    return lengthscales.size() == 1 ? lengthscales[0] : lengthscales[k];
  }
};

double se_ard(const Eigen::Ref<const Eigen::VectorXd>& xi,
              const Eigen::Ref<const Eigen::VectorXd>& xj, const SingleKernelParams& p);

/// Covariance <f_r(xi), f_q(xj)> between outputs r, q in {1, 2}.
double multi_cov(const Eigen::Ref<const Eigen::VectorXd>& xi,
                 const Eigen::Ref<const Eigen::VectorXd>& xj, int r, int q,
                 const MultiKernelParams& p);

/// Prior variance <f_r(x), f_r(x)>; identical for both outputs.
double multi_prior_variance(const MultiKernelParams& p, Eigen::Index dim);

/// Symmetric covariance matrix together with the Cholesky factor of
/// (values + jitter I).
///
/// Jitter starts at 1e-10 * mean(diag) and grows tenfold per failed attempt up
/// to 1e-4 * mean(diag). All solves, determinants and products go through the
/// jittered matrix.
class GramMatrix {
 public:
  static constexpr double kJitterStart = 1e-10;
  static constexpr double kJitterGrowth = 10.0;
  static constexpr double kJitterMax = 1e-4;

  GramMatrix() = default;
  /// Throws IllConditionedError (mentioning `what`) if no rung of the jitter
  /// ladder yields a factorization.
  explicit GramMatrix(Eigen::MatrixXd values, const std::string& what = {});

  Eigen::Index size() const { return values_.rows(); }
  const Eigen::MatrixXd& values() const { return values_; }
  double jitter() const { return jitter_; }
  const Eigen::LLT<Eigen::MatrixXd>& factor() const { return llt_; }

  Eigen::MatrixXd jittered() const;
  Eigen::VectorXd multiply(const Eigen::VectorXd& v) const;
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;
  double log_det() const;

 private:
  Eigen::MatrixXd values_;
  double jitter_ = 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

/// N x N matrix of se_ard over the rows of `x`, before jitter.
Eigen::MatrixXd single_cov_matrix(const Eigen::MatrixXd& x, const SingleKernelParams& p);
/// 2N x 2N block matrix [K11 K12; K21 K22] over the rows of `x`, before jitter.
Eigen::MatrixXd multi_cov_matrix(const Eigen::MatrixXd& x, const MultiKernelParams& p);

GramMatrix build_gram(const Eigen::MatrixXd& x, const SingleKernelParams& p);
GramMatrix build_gram(const Eigen::MatrixXd& x, const MultiKernelParams& p);

/// Cross-covariances between a test input and every training input.
Eigen::VectorXd single_cross_cov(const Eigen::MatrixXd& x, const Eigen::VectorXd& x_star,
                                 const SingleKernelParams& p);
/// [<f_r(x*), f_1(x_i)>; <f_r(x*), f_2(x_i)>], length 2N.
Eigen::VectorXd multi_cross_cov(const Eigen::MatrixXd& x, const Eigen::VectorXd& x_star, int r,
                                const MultiKernelParams& p);

}  // namespace gpsurv
