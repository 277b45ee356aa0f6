#include "gpsurv/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Cholesky>

namespace gpsurv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sanitize(double v) { return std::isfinite(v) ? v : kInf; }

}  // namespace

MinimizeResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                           const Eigen::VectorXd& start, const NelderMeadOptions& opts) {
  const Eigen::Index n = start.size();
  MinimizeResult res;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++res.evaluations;
    return sanitize(objective(x));
  };

  std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(n + 1), start);
  std::vector<double> vals(static_cast<std::size_t>(n + 1));
  for (Eigen::Index k = 0; k < n; ++k) pts[static_cast<std::size_t>(k + 1)][k] += opts.initial_step;
  for (std::size_t k = 0; k < pts.size(); ++k) vals[k] = eval(pts[k]);

  std::vector<std::size_t> order(pts.size());
  while (true) {
    std::iota(order.begin(), order.end(), 0);
    // stable: equal values keep their earlier vertex first
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return vals[a] < vals[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[order.size() - 2];

    double spread = 0.0;
    for (const auto& p : pts) spread = std::max(spread, (p - pts[best]).lpNorm<Eigen::Infinity>());
    if (std::isfinite(vals[worst]) && vals[worst] - vals[best] <= opts.f_tol &&
        spread <= opts.x_tol) {
      res.converged = true;
      break;
    }
    if (res.evaluations >= opts.max_evals) break;
    ++res.iterations;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t k : order) {
      if (k != worst) centroid += pts[k];
    }
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd xr = centroid + (centroid - pts[worst]);
    const double fr = eval(xr);
    if (fr < vals[best]) {
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - pts[worst]);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[worst] = xe;
        vals[worst] = fe;
      } else {
        pts[worst] = xr;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = xr;
      vals[worst] = fr;
      continue;
    }
    const bool outside = fr < vals[worst];
    const Eigen::VectorXd xc = outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid))
                                       : Eigen::VectorXd(centroid + 0.5 * (pts[worst] - centroid));
    const double fc = eval(xc);
    if (fc < (outside ? fr : vals[worst])) {
      pts[worst] = xc;
      vals[worst] = fc;
      continue;
    }
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if (k == best) continue;
      pts[k] = pts[best] + 0.5 * (pts[k] - pts[best]);
      vals[k] = eval(pts[k]);
    }
  }

  const auto it = std::min_element(vals.begin(), vals.end());
  res.x = pts[static_cast<std::size_t>(it - vals.begin())];
  res.value = *it;
  return res;
}

MinimizeResult damped_newton(const std::function<SecondOrder(const Eigen::VectorXd&)>& objective,
                             const Eigen::VectorXd& start, const NewtonOptions& opts) {
  MinimizeResult res;
  Eigen::VectorXd x = start;
  SecondOrder cur = objective(x);
  ++res.evaluations;
  double lambda = opts.initial_damping;
  const Eigen::Index n = x.size();

  for (int it = 0; it < opts.max_iterations; ++it) {
    if (cur.grad.lpNorm<Eigen::Infinity>() <= opts.grad_tol) {
      res.converged = true;
      break;
    }
    ++res.iterations;
    bool accepted = false;
    for (int tries = 0; tries < 60 && !accepted; ++tries) {
      const double scale = std::max(1.0, cur.hess.diagonal().cwiseAbs().maxCoeff());
      Eigen::MatrixXd a = cur.hess + lambda * scale * Eigen::MatrixXd::Identity(n, n);
      Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
      Eigen::VectorXd step = ldlt.solve(-cur.grad);
      if (ldlt.info() != Eigen::Success || !step.allFinite() || step.dot(cur.grad) >= 0.0) {
        lambda *= 10.0;
        continue;
      }
      const Eigen::VectorXd trial = x + step;
      SecondOrder next = objective(trial);
      ++res.evaluations;
      if (std::isfinite(next.value) && next.value <= cur.value) {
        x = trial;
        cur = std::move(next);
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
      } else {
        lambda *= 10.0;
      }
    }
    if (!accepted) break;  // no descent possible at machine precision
  }
  if (!res.converged) res.converged = cur.grad.lpNorm<Eigen::Infinity>() <= opts.grad_tol;
  res.x = x;
  res.value = cur.value;
  return res;
}

}  // namespace gpsurv
