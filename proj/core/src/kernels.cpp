#include "gpsurv/kernels.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "gpsurv/error.hpp"

namespace gpsurv {

void SingleKernelParams::validate(Eigen::Index dim) const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ValidationError("kernel sigma must be positive");
  if (lengthscales.size() != dim) {
    throw ValidationError("expected " + std::to_string(dim) + " length scales, got " +
                          std::to_string(lengthscales.size()));
  }
  for (double l : lengthscales) {
    if (!(l > 0.0) || !std::isfinite(l)) throw ValidationError("length scales must be positive");
  }
}

void MultiKernelParams::validate(Eigen::Index dim) const {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ValidationError("kernel sigma must be >= 0");
  if (!(omega >= 0.0) || !std::isfinite(omega)) throw ValidationError("kernel omega must be >= 0");
  if (!std::isfinite(mu)) throw ValidationError("kernel mu must be finite");
  if (lengthscales.size() != 1 && lengthscales.size() != dim) {
    throw ValidationError("multi-output kernel needs 1 or " + std::to_string(dim) +
                          " length scales");
  }
  for (double l : lengthscales) {
    if (!(l > 0.0) || !std::isfinite(l)) throw ValidationError("length scales must be positive");
  }
  if (sigma == 0.0 && omega == 0.0) throw ValidationError("sigma and omega cannot both be zero");
}

double se_ard(const Eigen::Ref<const Eigen::VectorXd>& xi,
              const Eigen::Ref<const Eigen::VectorXd>& xj, const SingleKernelParams& p) {
  if (xi.size() != xj.size() || xi.size() != p.lengthscales.size()) {
    throw ValidationError("se_ard: dimension mismatch");
  }
  double r2 = 0.0;
  for (Eigen::Index k = 0; k < xi.size(); ++k) {
    const double u = (xi[k] - xj[k]) / p.lengthscales[k];
    r2 += u * u;
  }
  return p.sigma * std::exp(-0.5 * r2);
}

namespace {

// pi^{d/2} * prod_k l_k, the normalization shared by every block.
double multi_prefactor(const MultiKernelParams& p, Eigen::Index dim) {
  double prod_l = 1.0;
  for (Eigen::Index k = 0; k < dim; ++k) prod_l *= p.lengthscale(k);
  return std::pow(std::numbers::pi, 0.5 * static_cast<double>(dim)) * prod_l;
}

// sum_k (d_k + shift)^2 / l_k^2
double scaled_sq(const Eigen::Ref<const Eigen::VectorXd>& xi,
                 const Eigen::Ref<const Eigen::VectorXd>& xj, double shift,
                 const MultiKernelParams& p) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < xi.size(); ++k) {
    const double u = (xi[k] - xj[k] + shift) / p.lengthscale(k);
    s += u * u;
  }
  return s;
}

}  // namespace

double multi_cov(const Eigen::Ref<const Eigen::VectorXd>& xi,
                 const Eigen::Ref<const Eigen::VectorXd>& xj, int r, int q,
                 const MultiKernelParams& p) {
  if (r < 1 || r > 2 || q < 1 || q > 2) {
    throw ValidationError("multi_cov: risk index must be 1 or 2");
  }
  if (xi.size() != xj.size()) throw ValidationError("multi_cov: dimension mismatch");
  const Eigen::Index dim = xi.size();
  if (p.lengthscales.size() != 1 && p.lengthscales.size() != dim) {
    throw ValidationError("multi_cov: dimension mismatch with length scales");
  }
  const double pre = multi_prefactor(p, dim);
  if (r == q) {
    // Sigma_r = Omega_r = l^-2: unique and shared parts have the same shape.
    const double e = std::exp(-0.25 * scaled_sq(xi, xj, 0.0, p));
    return pre * (p.sigma * p.sigma + p.omega * p.omega) * e;
  }
  // Gamma = Omega_1 (Omega_1 + Omega_2)^-1 Omega_2 = l^-2 / 2, and
  // (2 pi)^{d/2} / sqrt|Omega_1 + Omega_2| = pi^{d/2} prod l.
  const double shift = (r == 1) ? -p.mu : p.mu;
  return pre * p.omega * p.omega * std::exp(-0.25 * scaled_sq(xi, xj, shift, p));
}

double multi_prior_variance(const MultiKernelParams& p, Eigen::Index dim) {
  return multi_prefactor(p, dim) * (p.sigma * p.sigma + p.omega * p.omega);
}

GramMatrix::GramMatrix(Eigen::MatrixXd values, const std::string& what)
    : values_(std::move(values)) {
  const Eigen::Index n = values_.rows();
  if (n == 0 || values_.cols() != n) throw ValidationError("Gram matrix must be square and non-empty");
  const double mean_diag = values_.diagonal().mean();
  if (!(mean_diag > 0.0) || !values_.allFinite()) {
    throw IllConditionedError("covariance matrix has non-positive or non-finite diagonal" +
                              (what.empty() ? std::string() : " (" + what + ")"));
  }
  for (double rel = kJitterStart; rel <= kJitterMax * 1.0000001; rel *= kJitterGrowth) {
    const double jitter = rel * mean_diag;
    Eigen::MatrixXd a = values_;
    a.diagonal().array() += jitter;
    llt_.compute(a);
    if (llt_.info() == Eigen::Success && llt_.matrixLLT().diagonal().minCoeff() > 0.0) {
      jitter_ = jitter;
      return;
    }
  }
  std::ostringstream msg;
  msg << "covariance matrix is not positive definite even with jitter "
      << kJitterMax * mean_diag;
  if (!what.empty()) msg << "; offending hyperparameters: " << what;
  throw IllConditionedError(msg.str());
}

Eigen::MatrixXd GramMatrix::jittered() const {
  Eigen::MatrixXd a = values_;
  a.diagonal().array() += jitter_;
  return a;
}

Eigen::VectorXd GramMatrix::multiply(const Eigen::VectorXd& v) const {
  return values_ * v + jitter_ * v;
}

Eigen::VectorXd GramMatrix::solve(const Eigen::VectorXd& rhs) const { return llt_.solve(rhs); }

Eigen::MatrixXd GramMatrix::solve(const Eigen::MatrixXd& rhs) const { return llt_.solve(rhs); }

double GramMatrix::log_det() const {
  return 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

Eigen::MatrixXd single_cov_matrix(const Eigen::MatrixXd& x, const SingleKernelParams& p) {
  p.validate(x.cols());
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    k(j, j) = p.sigma;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double v = se_ard(x.row(i).transpose(), x.row(j).transpose(), p);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

Eigen::MatrixXd multi_cov_matrix(const Eigen::MatrixXd& x, const MultiKernelParams& p) {
  p.validate(x.cols());
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd k(2 * n, 2 * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::VectorXd xj = x.row(j).transpose();
    for (Eigen::Index i = j; i < n; ++i) {
      const Eigen::VectorXd xi = x.row(i).transpose();
      const double k11 = multi_cov(xi, xj, 1, 1, p);
      const double k22 = multi_cov(xi, xj, 2, 2, p);
      k(i, j) = k(j, i) = k11;
      k(n + i, n + j) = k(n + j, n + i) = k22;
      // K12(i, j) = <f1(x_i), f2(x_j)> and K21 = K12^T.
      const double k12_ij = multi_cov(xi, xj, 1, 2, p);
      k(i, n + j) = k(n + j, i) = k12_ij;
      if (i != j) {
        const double k12_ji = multi_cov(xj, xi, 1, 2, p);
        k(j, n + i) = k(n + i, j) = k12_ji;
      }
    }
  }
  return k;
}

namespace {

std::string describe(const SingleKernelParams& p) {
  std::ostringstream s;
  s << "sigma=" << p.sigma << " lengthscales=[" << p.lengthscales.transpose() << "]";
  return s.str();
}

std::string describe(const MultiKernelParams& p) {
  std::ostringstream s;
  s << "sigma=" << p.sigma << " omega=" << p.omega << " mu=" << p.mu << " lengthscales=["
    << p.lengthscales.transpose() << "]";
  return s.str();
}

}  // namespace

GramMatrix build_gram(const Eigen::MatrixXd& x, const SingleKernelParams& p) {
  if (x.rows() < 1) throw ValidationError("build_gram needs at least one input");
  return GramMatrix(single_cov_matrix(x, p), describe(p));
}

GramMatrix build_gram(const Eigen::MatrixXd& x, const MultiKernelParams& p) {
  if (x.rows() < 1) throw ValidationError("build_gram needs at least one input");
  return GramMatrix(multi_cov_matrix(x, p), describe(p));
}

Eigen::VectorXd single_cross_cov(const Eigen::MatrixXd& x, const Eigen::VectorXd& x_star,
                                 const SingleKernelParams& p) {
  Eigen::VectorXd k(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) k[i] = se_ard(x_star, x.row(i).transpose(), p);
  return k;
}

Eigen::VectorXd multi_cross_cov(const Eigen::MatrixXd& x, const Eigen::VectorXd& x_star, int r,
                                const MultiKernelParams& p) {
  const Eigen::Index n = x.rows();
  Eigen::VectorXd k(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd xi = x.row(i).transpose();
    k[i] = multi_cov(x_star, xi, r, 1, p);
    k[n + i] = multi_cov(x_star, xi, r, 2, p);
  }
  return k;
}

}  // namespace gpsurv
