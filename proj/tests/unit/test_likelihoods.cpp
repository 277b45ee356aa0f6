#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include <gtest/gtest.h>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "fixtures.hpp"
#include "gpsurv/error.hpp"
#include "gpsurv/likelihoods.hpp"
#include "gpsurv/special.hpp"

using namespace gpsurv;
using gpsurv::testing::random_instance;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kHalfLog2Pi = 0.5 * std::log(2 * std::numbers::pi);

using ContributionFn = std::function<Contribution(double)>;

// d1 against central differences of log_p; w against central differences of d1.
void expect_derivatives(const ContributionFn& c, double f, double rel = 1e-6) {
  const double h = 1e-5 * std::max(1.0, std::abs(f));
  const Contribution at = c(f);
  const double d1 = (c(f + h).log_p - c(f - h).log_p) / (2 * h);
  const double w = -(c(f + h).d1 - c(f - h).d1) / (2 * h);
  EXPECT_NEAR(at.d1, d1, rel * std::abs(d1) + 1e-9) << "f=" << f;
  EXPECT_NEAR(at.w, w, rel * std::abs(w) + 1e-9) << "f=" << f;
}

SurvivalDataset one_record(Record r, double x = 0.0) {
  SurvivalDataset d;
  d.x = Eigen::MatrixXd::Constant(1, 1, x);
  d.records = {r};
  return d;
}

HyperParams unit_theta(ModelKind kind) {
  HyperParams th;
  th.kind = kind;
  th.eta = 0.0;
  th.beta = 1.0;
  th.single.sigma = 1.0;
  th.transform.gamma = 1.0;
  th.nu = 1.0;
  return th;
}

}  // namespace

TEST(NllSingle, HandEvaluatedPoint) {
  // Latent time 0 (tau = ln 2 with gamma = 1), f = 0, K = [1], beta = 1.
  const SurvivalDataset d = one_record(Record::exact(std::numbers::ln2));
  const HyperParams th = unit_theta(ModelKind::kGpAft);
  const GramMatrix k = build_gram(d.x, th);
  const NllReport r = nll_single(Eigen::VectorXd::Zero(1), d, th, k);
  EXPECT_NEAR(r.value, kHalfLog2Pi, 1e-9);
  EXPECT_NEAR(r.grad[0], 0.0, 1e-15);
  EXPECT_NEAR(r.w_diag[0], 1.0, 1e-15);
}

TEST(NllSingle, RejectsIntervals) {
  SurvivalDataset d = one_record(Record::interval(1.0, 2.0));
  const HyperParams th = unit_theta(ModelKind::kGpAft);
  EXPECT_THROW(nll_single(Eigen::VectorXd::Zero(1), d, th, build_gram(d.x, th)), UnsupportedError);
}

TEST(GaussCensored, NonNegativeWAndTails) {
  EXPECT_NEAR(gauss_censored(2.0, 2.0, 0.5).log_p, std::log(0.5), 1e-15);
  for (double t = -400.0; t <= 400.0; t += 0.7) {
    const Contribution c = gauss_censored(t, 0.0, 1.3);
    EXPECT_GE(c.w, 0.0) << t;
    EXPECT_TRUE(std::isfinite(c.log_p) && std::isfinite(c.d1) && std::isfinite(c.w)) << t;
  }
}

TEST(GaussContributions, DerivativesAcrossBranches) {
  for (double beta : {0.05, 0.4, 2.0}) {
    for (double gap : {-60.0, -5.0, -0.3, 0.0, 0.8, 6.0, 27.0, 35.0, 80.0}) {
      const double t = 1.0;
      const double f = t - gap * beta * std::numbers::sqrt2;  // h = gap
      expect_derivatives([&](double g) { return gauss_event(t, g, beta); }, f);
      expect_derivatives([&](double g) { return gauss_censored(t, g, beta); }, f, 1e-5);
    }
  }
}

TEST(GaussInterval, SymmetricIntervalHasZeroGradient) {
  for (double a : {1e-3, 0.3, 2.0, 15.0}) {
    EXPECT_NEAR(gauss_interval(4.0 - a, 4.0 + a, 4.0, 0.6).d1, 0.0, 1e-10) << a;
  }
}

TEST(GaussInterval, NearPointIntervalMatchesDensity) {
  const double t = 2.0, f = 1.4, beta = 0.7, w = 1e-8;
  const Contribution c = gauss_interval(t, t + w, f, beta);
  const Contribution p = gauss_event(t + w / 2, f, beta);
  ASSERT_TRUE(std::isfinite(c.log_p));
  EXPECT_NEAR(c.log_p, p.log_p + std::log(w), 1e-7);
  EXPECT_NEAR(c.d1, p.d1, 1e-6);
  EXPECT_NEAR(c.w, p.w, 1e-6);
}

TEST(GaussInterval, UpperInfinityIsCensoring) {
  const Contribution a = gauss_interval(3.0, kInf, 2.2, 0.9);
  const Contribution b = gauss_censored(3.0, 2.2, 0.9);
  EXPECT_NEAR(a.log_p, b.log_p, 1e-14);
  EXPECT_NEAR(a.d1, b.d1, 1e-12);
  EXPECT_NEAR(a.w, b.w, 1e-12);
}

TEST(GaussInterval, DerivativesAcrossBranches) {
  for (double beta : {0.05, 0.5, 3.0}) {
    for (double lo : {-4.0, 0.0, 1.0, 3.0}) {
      for (double width : {1e-4, 0.2, 1.0, 4.0, 40.0}) {
        for (double f : {-30.0, -2.0, 0.5, 1.3, 9.0, 40.0}) {
          const Contribution c = gauss_interval(lo, lo + width, f, beta);
          if (!(c.log_p > -600.0)) continue;  // density underflows; nothing to compare
          expect_derivatives([&](double g) { return gauss_interval(lo, lo + width, g, beta); }, f, 1e-5);
        }
      }
    }
  }
}

TEST(GaussInterval, RejectsEmptyInterval) {
  EXPECT_THROW(gauss_interval(2.0, 2.0, 0.0, 1.0), DomainError);
  EXPECT_THROW(gauss_interval(3.0, 2.0, 0.0, 1.0), DomainError);
}

TEST(HazardLikelihood, HandEvaluatedPoint) {
  // nu = 1, event at tau = 1, f = 0: data term 1, prior term 0, plus the constant.
  const SurvivalDataset d = one_record(Record::exact(1.0));
  const HyperParams th = unit_theta(ModelKind::kGpHazard);
  const NllReport r = nll_gp_hazard(Eigen::VectorXd::Zero(1), d, th, build_gram(d.x, th));
  EXPECT_NEAR(r.value, 1.0 + kHalfLog2Pi, 1e-9);
  EXPECT_NEAR(r.grad[0], 0.0, 1e-9);  // d/df: -(1 - e^f) at f = 0
  EXPECT_DOUBLE_EQ(r.w_diag[0], 1.0);
}

TEST(HazardLikelihood, PositiveWAndDerivatives) {
  for (double nu : {0.3, 1.0, 4.5}) {
    for (double tau : {1e-3, 0.5, 2.0, 30.0}) {
      for (double f : {-8.0, -1.0, 0.0, 2.5}) {
        EXPECT_GT(hazard_event(tau, f, nu).w, 0.0);
        EXPECT_GT(hazard_censored(tau, f, nu).w, 0.0);
        expect_derivatives([&](double g) { return hazard_event(tau, g, nu); }, f);
        expect_derivatives([&](double g) { return hazard_censored(tau, g, nu); }, f);
      }
    }
  }
}

TEST(HazardLikelihood, RejectsNonPositiveShape) {
  const SurvivalDataset d = one_record(Record::exact(1.0));
  HyperParams th = unit_theta(ModelKind::kGpHazard);
  th.nu = 0.0;
  EXPECT_ANY_THROW(nll_gp_hazard(Eigen::VectorXd::Zero(1), d, th, build_gram(d.x, unit_theta(ModelKind::kGpHazard))));
}

TEST(HazardInterval, UpperInfinityIsCensoring) {
  const Contribution a = hazard_interval(1.7, kInf, 0.3, 2.0);
  const Contribution b = hazard_censored(1.7, 0.3, 2.0);
  EXPECT_NEAR(a.log_p, b.log_p, 1e-14);
  EXPECT_NEAR(a.d1, b.d1, 1e-13);
  EXPECT_NEAR(a.w, b.w, 1e-13);
}

TEST(HazardInterval, WidelySeparatedMatchesOracle) {
  using Big = boost::multiprecision::cpp_bin_float_50;
  // x = tau^nu e^f: x1 = 1, x2 = 10^4, far into the cutoff branch.
  const Contribution c = hazard_interval(1.0, 100.0, 0.0, 2.0);
  const Big want = log(exp(Big(-1)) - exp(Big(-10000)));
  EXPECT_NEAR(c.log_p, static_cast<double>(want), 1e-13);
  EXPECT_TRUE(std::isfinite(c.d1) && std::isfinite(c.w));
}

TEST(HazardInterval, DerivativesAcrossBranches) {
  for (double nu : {0.5, 1.0, 3.0}) {
    for (double lo : {0.05, 0.7, 2.0}) {
      for (double ratio : {1.000001, 1.01, 1.5, 3.0, 50.0}) {
        for (double f : {-6.0, -1.0, 0.0, 1.5}) {
          expect_derivatives([&](double g) { return hazard_interval(lo, lo * ratio, g, nu); }, f, 1e-5);
        }
      }
    }
  }
}

TEST(NllCompeting, EventAndOtherRiskSurvival) {
  // One subject with a risk-1 event contributes log p(t|f1) + log S(t|f2).
  SurvivalDataset d = one_record(Record::exact(2.0, 1));
  d.num_risks = 2;
  HyperParams th = unit_theta(ModelKind::kGpCompeting);
  th.beta = 0.8;
  const Observations obs = observations_for(d, th);
  const Eigen::Vector2d f(0.9, 1.3);
  const DataTerm dt = data_term(f, obs, th);
  const double t = obs.lower[0];
  EXPECT_NEAR(dt.log_lik, gauss_event(t, 0.9, 0.8).log_p + gauss_censored(t, 1.3, 0.8).log_p, 1e-14);
}

TEST(NllCompeting, SplitsWhenIndependent) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    auto in = random_instance(ModelKind::kGpCompeting, 300 + s, 8, 1);
    in.theta = force_independent(in.theta);
    in.theta.multi.lengthscales.setConstant(0.25);  // keep K well conditioned; K^-1 amplifies roundoff
    const Eigen::Index n = 8;
    const NllReport joint = nll_competing(in.f, in.data, in.theta, build_gram(in.data.x, in.theta));

    double sum = 0.0;
    for (int r = 1; r <= 2; ++r) {
      SurvivalDataset single = in.data;
      single.num_risks = 1;
      for (Record& rec : single.records) {
        if (rec.kind != RecordKind::kExact) continue;
        rec = rec.risk == r ? Record::exact(rec.time, 1) : Record::censored(rec.time);
      }
      HyperParams th = in.theta;
      th.kind = ModelKind::kGpAft;
      th.single.sigma = multi_prior_variance(in.theta.multi, 1);
      th.single.lengthscales = Eigen::VectorXd::Constant(1, std::sqrt(2.0) * in.theta.multi.lengthscales[0]);
      const Eigen::VectorXd fr = in.f.segment((r - 1) * n, n);
      const NllReport one = nll_single(fr, single, th, build_gram(single.x, th));
      sum += one.value;
      const Eigen::VectorXd jr = joint.grad.segment((r - 1) * n, n);
      EXPECT_LT((one.grad - jr).cwiseAbs().maxCoeff(), 1e-10 * (1.0 + jr.cwiseAbs().maxCoeff()));
    }
    EXPECT_NEAR(joint.value, sum + nll_constant(ModelKind::kGpCompeting), 1e-8);
  }
}

TEST(NllCompeting, RejectsBadRiskLabel) {
  SurvivalDataset d = one_record(Record::exact(2.0, 3));
  d.num_risks = 2;
  const HyperParams th = unit_theta(ModelKind::kGpCompeting);
  EXPECT_ANY_THROW(nll_competing(Eigen::VectorXd::Zero(2), d, th, build_gram(d.x, th)));
}

TEST(NllDispatch, MatchesWrappers) {
  auto in = random_instance(ModelKind::kGpHazardInterval, 5, 6, 1);
  const GramMatrix k = build_gram(in.data.x, in.theta);
  EXPECT_EQ(nll(in.f, in.data, in.theta, k).value, nll_gp_hazard_interval(in.f, in.data, in.theta, k).value);
}

TEST(NllConstants, PerFamily) {
  EXPECT_EQ(nll_constant(ModelKind::kGpAft), 0.0);
  EXPECT_NEAR(nll_constant(ModelKind::kGpCompeting), std::log(2 * std::numbers::pi), 1e-15);
  EXPECT_NEAR(nll_constant(ModelKind::kGpHazard), kHalfLog2Pi, 1e-15);
}

// Properties: random instances of every family.

class LikelihoodProperty : public ::testing::TestWithParam<ModelKind> {};

TEST_P(LikelihoodProperty, GradientMatchesFiniteDifferences) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto in = random_instance(GetParam(), 500 + s, is_competing(GetParam()) ? 8 : 12, 1 + s % 2);
    const auto rep = gpsurv::testing::check_gradient(in);
    EXPECT_EQ(rep.failed, 0) << "seed " << s << " worst " << rep.worst;
  }
}

TEST_P(LikelihoodProperty, WMatchesSecondDifferences) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto in = random_instance(GetParam(), 500 + s, is_competing(GetParam()) ? 8 : 12, 1 + s % 2);
    const auto rep = gpsurv::testing::check_w(in);
    EXPECT_EQ(rep.failed, 0) << "seed " << s << " worst " << rep.worst;
  }
}

TEST_P(LikelihoodProperty, SubjectOrderDoesNotMatter) {
  auto in = random_instance(GetParam(), 42, 8, 2);
  const GramMatrix k = build_gram(in.data.x, in.theta);
  const double v = nll(in.f, in.data, in.theta, k).value;
  std::vector<Eigen::Index> perm{3, 1, 7, 0, 5, 2, 6, 4};
  const SurvivalDataset p = in.data.subset(perm);
  const int outputs = is_competing(GetParam()) ? 2 : 1;
  Eigen::VectorXd fp(in.f.size());
  for (int r = 0; r < outputs; ++r)
    for (Eigen::Index i = 0; i < 8; ++i) fp[r * 8 + i] = in.f[r * 8 + perm[static_cast<std::size_t>(i)]];
  EXPECT_NEAR(nll(fp, p, in.theta, build_gram(p.x, in.theta)).value, v, 1e-9 * std::abs(v));
}

INSTANTIATE_TEST_SUITE_P(AllFamilies, LikelihoodProperty,
                         ::testing::Values(ModelKind::kGpAft, ModelKind::kGpAftInterval,
                                           ModelKind::kGpCompeting, ModelKind::kGpHazard,
                                           ModelKind::kGpHazardInterval),
                         [](const auto& info) {
                           std::string s(to_string(info.param));
                           std::replace(s.begin(), s.end(), '-', '_');
                           return s;
                         });
