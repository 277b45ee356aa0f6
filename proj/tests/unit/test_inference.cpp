#include <cmath>
#include <numbers>

#include <gtest/gtest.h>
#include <Eigen/Dense>

#include "fixtures.hpp"
#include "gpsurv/error.hpp"
#include "gpsurv/inference.hpp"
#include "gpsurv/likelihoods.hpp"
#include "gpsurv/timescale.hpp"

using namespace gpsurv;
using gpsurv::testing::random_instance;

namespace {

MapOptions tight() {
  MapOptions o;
  o.grad_tol = 1e-12;
  o.max_iterations = 500;
  return o;
}

// Regression data on a 1-d grid; no censoring.
SurvivalDataset exact_grid(Eigen::Index n, std::uint64_t seed) {
  Philox4x32 rng(seed);
  SurvivalDataset d;
  d.x.resize(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    d.x(i, 0) = -3.0 + 6.0 * static_cast<double>(i) / static_cast<double>(n - 1);
    d.records.push_back(Record::exact(std::exp(1.0 + 0.5 * std::sin(d.x(i, 0)) + 0.2 * rng.normal())));
  }
  return d;
}

HyperParams aft_theta() {
  HyperParams th;
  th.kind = ModelKind::kGpAft;
  th.eta = 1.5;
  th.beta = 0.4;
  th.single.sigma = 0.8;
  th.single.lengthscales = Eigen::VectorXd::Constant(1, 0.9);
  th.transform.gamma = 1.0;
  return th;
}

}  // namespace

TEST(FitMap, SingleSubjectClosedForm) {
  SurvivalDataset d;
  d.x = Eigen::MatrixXd::Zero(1, 1);
  d.records = {Record::exact(3.0)};
  const HyperParams th = aft_theta();
  const double t = to_latent(3.0, th.transform);
  const FittedModel m = fit_map(d, th, tight());
  ASSERT_TRUE(m.converged);
  const double s = m.gram.jittered()(0, 0), b2 = th.beta * th.beta;
  EXPECT_NEAR(m.f_hat[0], th.eta + s * (t - th.eta) / (s + b2), 1e-12);
}

TEST(FitMap, UncensoredIsGpRegression) {
  const SurvivalDataset d = exact_grid(15, 1);
  const HyperParams th = aft_theta();
  const FittedModel m = fit_map(d, th, tight());
  ASSERT_TRUE(m.converged);
  const Observations obs = observations_for(d, th);
  const Eigen::MatrixXd k = m.gram.jittered();
  const Eigen::VectorXd r = obs.lower.array() - th.eta;
  const Eigen::MatrixXd a = k + th.beta * th.beta * Eigen::MatrixXd::Identity(15, 15);
  const Eigen::VectorXd want = (k * a.ldlt().solve(r)).array() + th.eta;
  EXPECT_LT((m.f_hat - want).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((m.w_diag.array() - 1.0 / (th.beta * th.beta)).abs().maxCoeff(), 1e-12);
}

TEST(FitMap, TraceIsMonotone) {
  for (ModelKind kind : {ModelKind::kGpAft, ModelKind::kGpAftInterval, ModelKind::kGpCompeting,
                         ModelKind::kGpHazard, ModelKind::kGpHazardInterval}) {
    const auto in = random_instance(kind, 11, 12, 1);
    MapOptions o;
    o.record_trace = true;
    const FittedModel m = fit_map(in.data, in.theta, o);
    EXPECT_TRUE(m.converged) << to_string(kind);
    ASSERT_FALSE(m.trace.empty());
    for (std::size_t i = 1; i < m.trace.size(); ++i) EXPECT_LE(m.trace[i], m.trace[i - 1] + 1e-12);
    EXPECT_NEAR(m.trace.back(), m.nll_value, 1e-12);
  }
}

TEST(FitMap, RejectsIncompatibleData) {
  auto in = random_instance(ModelKind::kGpAftInterval, 3, 6, 1);
  in.theta.kind = ModelKind::kGpAft;
  EXPECT_THROW(fit_map(in.data, in.theta), UnsupportedError);
}

TEST(FitMap, StartingPointDoesNotMatter) {
  const auto in = random_instance(ModelKind::kGpAft, 4, 10, 1);
  const FittedModel a = fit_map(in.data, in.theta, tight());
  MapOptions o = tight();
  o.initial_f = in.f.array() + 3.0;
  const FittedModel b = fit_map(in.data, in.theta, o);
  EXPECT_LT((a.f_hat - b.f_hat).cwiseAbs().maxCoeff(), 1e-7);
}

TEST(Laplace, MatchesDenseOracle) {
  for (ModelKind kind : {ModelKind::kGpAft, ModelKind::kGpCompeting, ModelKind::kGpHazard}) {
    auto in = random_instance(kind, 21, 8, 1);
    if (is_competing(kind)) in.theta.multi.lengthscales.setConstant(0.3);
    else in.theta.single.lengthscales.setConstant(0.3);
    const FittedModel m = fit_map(in.data, in.theta, tight());
    ASSERT_TRUE(m.converged);
    const Eigen::MatrixXd k = m.gram.jittered();
    const Eigen::MatrixXd prec = Eigen::MatrixXd(m.w_diag.asDiagonal()) + k.inverse();
    const double logdet = std::log(prec.determinant());
    const double n = static_cast<double>(in.data.size());
    const double want = m.nll_value - 0.5 * std::log(2 * std::numbers::pi) + logdet / (2 * n);
    EXPECT_NEAR(laplace_value(m), want, 1e-8 * std::abs(want)) << to_string(kind);
    EXPECT_NEAR(m.log_det_posterior_precision(), logdet, 1e-8 * std::abs(logdet));
    EXPECT_NEAR(laplace_nll_hyp(in.theta, in.data), laplace_value(fit_map(in.data, in.theta)), 1e-6);
  }
}

TEST(Laplace, FailureIsSentinel) {
  auto in = random_instance(ModelKind::kGpAft, 5, 6, 1);
  MapOptions o;
  o.max_iterations = 1;
  o.grad_tol = 1e-300;
  const LaplaceEval e = laplace_evaluate(in.theta, in.data, o);
  EXPECT_FALSE(e.ok);
  EXPECT_EQ(e.value, kLaplaceFailure);
  EXPECT_FALSE(e.failure.empty());
}

TEST(HyperPacking, RoundTrip) {
  for (ModelKind kind : {ModelKind::kGpAft, ModelKind::kGpCompeting, ModelKind::kGpHazardInterval}) {
    const auto in = random_instance(kind, 8, 12, 2);
    const HyperParams templ = make_template(kind, in.data, true);
    const HyperBounds b = default_bounds(in.data, templ);
    const HyperPacking pk(templ, b);
    const HyperParams start = heuristic_start(in.data, templ, b);
    double excess = -1.0;
    const HyperParams back = pk.unpack(pk.pack(start), &excess);
    EXPECT_EQ(excess, 0.0);
    EXPECT_LT((pk.pack(back) - pk.pack(start)).cwiseAbs().maxCoeff(), 1e-12) << to_string(kind);
    // Far outside the box: clamped, with the excess reported.
    const HyperParams clamped = pk.unpack(Eigen::VectorXd::Constant(pk.size(), 1e3), &excess);
    EXPECT_GT(excess, 0.0);
    EXPECT_NO_THROW(clamped.validate(in.data.dim()));
  }
}

TEST(HyperPacking, PinnedOmegaIsNotSearched) {
  const auto in = random_instance(ModelKind::kGpCompeting, 9, 10, 1);
  const HyperParams templ = make_template(ModelKind::kGpCompeting, in.data);
  const HyperParams pinned = force_independent(templ);
  const HyperBounds b = default_bounds(in.data, templ);
  EXPECT_EQ(HyperPacking(pinned, b).size() + 1, HyperPacking(templ, b).size());
  EXPECT_EQ(HyperPacking(pinned, b).unpack(Eigen::VectorXd::Zero(HyperPacking(pinned, b).size())).multi.omega, 0.0);
  EXPECT_THROW(force_independent(make_template(ModelKind::kGpAft, in.data)), UnsupportedError);
}

TEST(FitHyperparameters, DeterministicAndNoWorseThanStart) {
  const SurvivalDataset d = exact_grid(20, 2);
  const HyperParams templ = make_template(ModelKind::kGpAft, d);
  const HyperBounds b = default_bounds(d, templ);
  HyperFitOptions o;
  o.restarts = 3;
  o.seed = 17;
  o.max_evals = 250;
  const HyperFit a = fit_hyperparameters(d, templ, b, o);
  const HyperFit c = fit_hyperparameters(d, templ, b, o);
  EXPECT_EQ(a.value, c.value);
  EXPECT_EQ(a.theta.describe(), c.theta.describe());
  ASSERT_EQ(a.restarts.size(), 3u);
  for (const RestartRecord& r : a.restarts) EXPECT_LE(a.value, r.value);
  EXPECT_NEAR(a.value, laplace_value(a.model), 1e-9);

  HyperFitOptions from = o;
  from.restarts = 1;
  from.start = a.theta;
  EXPECT_LE(fit_hyperparameters(d, templ, b, from).value, a.value + 1e-12);
}

TEST(ForceIndependent, ZeroCrossBlocks) {
  const auto in = random_instance(ModelKind::kGpCompeting, 12, 7, 2);
  const HyperParams th = force_independent(in.theta);
  EXPECT_TRUE(th.omega_pinned);
  const Eigen::MatrixXd k = build_gram(in.data.x, th).values();
  EXPECT_EQ(k.topRightCorner(7, 7).cwiseAbs().maxCoeff(), 0.0);
  // With a shared part the blocks couple the risks.
  EXPECT_GT(build_gram(in.data.x, in.theta).values().topRightCorner(7, 7).cwiseAbs().maxCoeff(), 0.0);
}

// Properties.

class MapProperty : public ::testing::TestWithParam<ModelKind> {};

TEST_P(MapProperty, StationaryAndConsistent) {
  for (std::uint64_t s = 0; s < 8; ++s) {
    const auto in = random_instance(GetParam(), 900 + s, 10, 1 + s % 2);
    const FittedModel m = fit_map(in.data, in.theta);
    ASSERT_TRUE(m.converged) << s;
    // Stationarity in the K a parametrization: a = d log p / df.
    const DataTerm dt = data_term(m.f_hat, observations_for(in.data, in.theta), in.theta);
    EXPECT_LE((m.alpha - dt.grad).cwiseAbs().maxCoeff() / in.data.size(), MapOptions{}.grad_tol);
    EXPECT_LE(m.final_grad_norm, MapOptions{}.grad_tol);
    const Eigen::VectorXd resid = m.f_hat.array() - in.theta.prior_mean();
    EXPECT_LT((m.gram.multiply(m.alpha) - resid).cwiseAbs().maxCoeff(), 1e-8 * (1 + resid.norm()));
    EXPECT_LE(m.nll_value, nll(in.f, in.data, in.theta, m.gram).value + 1e-12);
  }
}

TEST_P(MapProperty, PermutationInvariant) {
  const auto in = random_instance(GetParam(), 31, 8, 1);
  const std::vector<Eigen::Index> perm{5, 2, 7, 0, 1, 6, 3, 4};
  const SurvivalDataset p = in.data.subset(perm);
  const FittedModel a = fit_map(in.data, in.theta, tight());
  const FittedModel b = fit_map(p, in.theta, tight());
  const int outputs = is_competing(GetParam()) ? 2 : 1;
  for (int r = 0; r < outputs; ++r)
    for (Eigen::Index i = 0; i < 8; ++i)
      EXPECT_NEAR(b.f_hat[r * 8 + i], a.f_hat[r * 8 + perm[static_cast<std::size_t>(i)]], 1e-8);
  EXPECT_NEAR(laplace_value(a), laplace_value(b), 1e-9);
}

INSTANTIATE_TEST_SUITE_P(AllFamilies, MapProperty,
                         ::testing::Values(ModelKind::kGpAft, ModelKind::kGpAftInterval,
                                           ModelKind::kGpCompeting, ModelKind::kGpHazard,
                                           ModelKind::kGpHazardInterval),
                         [](const auto& info) {
                           std::string s(to_string(info.param));
                           std::replace(s.begin(), s.end(), '-', '_');
                           return s;
                         });
