#include <cmath>
#include <numbers>

#include <gtest/gtest.h>
#include <Eigen/Eigenvalues>

#include "gpsurv/error.hpp"
#include "gpsurv/kernels.hpp"
#include "gpsurv/random.hpp"

using namespace gpsurv;

namespace {

Eigen::MatrixXd random_x(Philox4x32& rng, Eigen::Index n, Eigen::Index d) {
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < d; ++k) x(i, k) = rng.uniform(-3.0, 3.0);
  return x;
}

MultiKernelParams multi(double sigma, double omega, double mu, double l) {
  MultiKernelParams p;
  p.sigma = sigma;
  p.omega = omega;
  p.mu = mu;
  p.lengthscales = Eigen::VectorXd::Constant(1, l);
  return p;
}

}  // namespace

TEST(SeArd, Examples) {
  SingleKernelParams p;
  p.sigma = 3.0;
  const Eigen::VectorXd a = Eigen::VectorXd::Constant(1, 0.5);
  EXPECT_DOUBLE_EQ(se_ard(a, a, p), 3.0);
  const Eigen::VectorXd b = Eigen::VectorXd::Constant(1, 0.5 + std::sqrt(2.0));
  EXPECT_NEAR(se_ard(a, b, p), 3.0 * std::exp(-1.0), 1e-15);
  const Eigen::VectorXd far = Eigen::VectorXd::Constant(1, 1e3);
  EXPECT_EQ(se_ard(a, far, p), 0.0);
}

TEST(SeArd, ArdScalesEachDimension) {
  SingleKernelParams p;
  p.sigma = 1.5;
  p.lengthscales = Eigen::Vector2d(0.5, 2.0);
  const Eigen::Vector2d a(0.0, 0.0), b(0.5, 2.0);
  EXPECT_NEAR(se_ard(a, b, p), 1.5 * std::exp(-1.0), 1e-15);
  p.lengthscales = Eigen::VectorXd::Ones(3);
  EXPECT_THROW(p.validate(2), ValidationError);
}

TEST(MultiCov, DiagonalVariance) {
  for (Eigen::Index d : {1, 2, 3}) {
    const MultiKernelParams p = multi(0.7, 1.3, 0.4, 0.8);
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(d, 0.2);
    const double want = std::pow(std::numbers::pi, 0.5 * d) * (0.49 + 1.69) * std::pow(0.8, d);
    EXPECT_NEAR(multi_cov(x, x, 1, 1, p), want, 1e-13 * want);
    EXPECT_NEAR(multi_cov(x, x, 2, 2, p), want, 1e-13 * want);
    EXPECT_NEAR(multi_prior_variance(p, d), want, 1e-13 * want);
  }
}

TEST(MultiCov, NoSharedPartNoCrossCovariance) {
  const MultiKernelParams p = multi(0.7, 0.0, 0.4, 0.8);
  Philox4x32 rng(4);
  for (int i = 0; i < 50; ++i) {
    const Eigen::VectorXd a = Eigen::VectorXd::Constant(1, rng.uniform(-3, 3));
    const Eigen::VectorXd b = Eigen::VectorXd::Constant(1, rng.uniform(-3, 3));
    EXPECT_EQ(multi_cov(a, b, 1, 2, p), 0.0);
    EXPECT_EQ(multi_cov(a, b, 2, 1, p), 0.0);
  }
}

TEST(MultiCov, CrossSymmetryAndMirror) {
  const MultiKernelParams p = multi(0.3, 1.1, 0.6, 0.9);
  Philox4x32 rng(5);
  for (int i = 0; i < 50; ++i) {
    const Eigen::Vector2d a(rng.uniform(-3, 3), rng.uniform(-3, 3));
    const Eigen::Vector2d b(rng.uniform(-3, 3), rng.uniform(-3, 3));
    EXPECT_DOUBLE_EQ(multi_cov(a, b, 1, 2, p), multi_cov(b, a, 2, 1, p));
    // Displacement d between outputs (1,2) equals displacement -d for (2,1).
    const Eigen::Vector2d d = b - a;
    const Eigen::Vector2d o(0.1, -0.2);
    EXPECT_NEAR(multi_cov(o, o + d, 1, 2, p), multi_cov(o + d, o, 2, 1, p), 1e-15);
  }
}

TEST(MultiCov, ReducesToSeArd) {
  // With no shared part and no shift each output is an SE process with
  // variance pi^{d/2} sigma^2 l^d and length scale sqrt(2) l.
  Philox4x32 rng(6);
  for (Eigen::Index d : {1, 2}) {
    const MultiKernelParams p = multi(0.8, 0.0, 0.0, 0.7);
    SingleKernelParams s;
    s.sigma = std::pow(std::numbers::pi, 0.5 * d) * 0.64 * std::pow(0.7, d);
    s.lengthscales = Eigen::VectorXd::Constant(d, std::sqrt(2.0) * 0.7);
    for (int i = 0; i < 30; ++i) {
      Eigen::VectorXd a(d), b(d);
      for (Eigen::Index k = 0; k < d; ++k) {
        a[k] = rng.uniform(-2, 2);
        b[k] = rng.uniform(-2, 2);
      }
      const double want = se_ard(a, b, s);
      EXPECT_NEAR(multi_cov(a, b, 1, 1, p), want, 1e-12 * std::max(want, 1e-300));
    }
  }
}

TEST(GramMatrix, SingleAndBlocks) {
  SingleKernelParams p;
  p.sigma = 2.5;
  const Eigen::MatrixXd one = Eigen::MatrixXd::Constant(1, 1, 0.3);
  const GramMatrix g1 = build_gram(one, p);
  EXPECT_EQ(g1.values()(0, 0), 2.5);

  Philox4x32 rng(7);
  const Eigen::MatrixXd x = random_x(rng, 10, 1);
  const Eigen::MatrixXd k = multi_cov_matrix(x, multi(0.5, 0.0, 0.3, 1.0));
  EXPECT_EQ(k.topRightCorner(10, 10).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(k.bottomLeftCorner(10, 10).cwiseAbs().maxCoeff(), 0.0);
}

TEST(GramMatrix, MatchesPairwiseCalls) {
  Philox4x32 rng(8);
  SingleKernelParams p;
  p.sigma = 1.7;
  p.lengthscales = Eigen::Vector2d(0.6, 1.9);
  const Eigen::MatrixXd x = random_x(rng, 30, 2);
  const Eigen::MatrixXd k = single_cov_matrix(x, p);
  for (Eigen::Index i = 0; i < 30; ++i)
    for (Eigen::Index j = 0; j < 30; ++j)
      EXPECT_EQ(k(i, j), se_ard(x.row(i).transpose(), x.row(j).transpose(), p));
}

TEST(GramMatrix, JitterLadderRecoversFromDuplicates) {
  SingleKernelParams p;
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(5, 1);  // rank one
  const GramMatrix g = build_gram(x, p);
  EXPECT_GT(g.jitter(), 0.0);
  EXPECT_LE(g.jitter(), GramMatrix::kJitterMax * 1.0000001);
  EXPECT_EQ(g.factor().info(), Eigen::Success);
}

TEST(GramMatrix, FailsBeyondLadder) {
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;  // indefinite
  EXPECT_THROW(GramMatrix(bad, "test"), IllConditionedError);
}

TEST(GramMatrix, SolveAndLogDet) {
  Philox4x32 rng(9);
  SingleKernelParams p;
  p.lengthscales = Eigen::VectorXd::Constant(1, 0.5);
  const Eigen::MatrixXd x = random_x(rng, 12, 1);
  const GramMatrix g = build_gram(x, p);
  const Eigen::MatrixXd kj = g.jittered();
  Eigen::VectorXd v(12);
  for (Eigen::Index i = 0; i < 12; ++i) v[i] = rng.normal();
  EXPECT_LT((kj * g.solve(v) - v).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_NEAR(g.log_det(), std::log(kj.determinant()), 1e-8);
  EXPECT_LT((g.multiply(v) - kj * v).cwiseAbs().maxCoeff(), 1e-12);
}

// Properties.

TEST(KernelProperty, SymmetricAndPsd) {
  Philox4x32 rng(10);
  for (int rep = 0; rep < 50; ++rep) {
    const Eigen::Index n = 4 + rep % 9;
    const Eigen::MatrixXd x = random_x(rng, n, 1 + rep % 2);
    Eigen::MatrixXd k;
    if (rep % 2 == 0) {
      SingleKernelParams p;
      p.sigma = std::exp(rng.uniform(-2, 2));
      p.lengthscales = Eigen::VectorXd::Constant(x.cols(), std::exp(rng.uniform(-1, 2)));
      k = single_cov_matrix(x, p);
    } else {
      k = multi_cov_matrix(x, multi(std::exp(rng.uniform(-2, 1)), std::exp(rng.uniform(-2, 1)),
                                    rng.uniform(-1, 1), std::exp(rng.uniform(-1, 1))));
    }
    EXPECT_EQ((k - k.transpose()).cwiseAbs().maxCoeff(), 0.0);
    const GramMatrix g(k);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.jittered());
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12 * k.diagonal().mean());
    EXPECT_TRUE((g.factor().matrixLLT().diagonal().array() > 0.0).all());
  }
}
