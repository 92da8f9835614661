// SPDX-License-Identifier: Apache-2.0
#include "hvacdr/nn/scg.hpp"

#include <cmath>

#include "hvacdr/error.hpp"

namespace hvacdr::nn {

ScgResult minimize_scg(const Objective& f, Eigen::VectorXd w, const ScgOptions& o) {
  const Eigen::Index n = w.size();
  const int restart = o.restart_every > 0 ? o.restart_every : static_cast<int>(n);
  Eigen::VectorXd g(n), g_sigma(n), g_new(n);

  auto check = [](double v, int epoch) {
    if (!std::isfinite(v)) throw training_diverged("non-finite training loss", epoch);
  };

  double E = f(w, g);
  check(E, 0);
  Eigen::VectorXd r = -g;
  Eigen::VectorXd p = r;
  double lambda = o.lambda_init;
  double lambda_bar = 0.0;
  bool success = true;
  double delta = 0.0;
  int since_restart = 0;

  ScgResult res;
  int epoch = 0;
  for (; epoch < o.max_epochs; ++epoch) {
    if (r.norm() < o.grad_tol) {
      res.converged = true;
      break;
    }
    const double p2 = p.squaredNorm();
    if (p2 == 0.0) {
      res.converged = true;
      break;
    }
    if (success) {
      const double sigma_k = o.sigma / std::sqrt(p2);
      Eigen::VectorXd ws = w + sigma_k * p;
      check(f(ws, g_sigma), epoch + 1);
      delta = p.dot(g_sigma - g) / sigma_k;
    }
    delta += (lambda - lambda_bar) * p2;
    if (delta <= 0.0) {
      lambda_bar = 2.0 * (lambda - delta / p2);
      delta = -delta + lambda * p2;
      lambda = lambda_bar;
    }
    const double mu = p.dot(r);
    const double alpha = mu / delta;
    Eigen::VectorXd w_new = w + alpha * p;
    const double E_new = f(w_new, g_new);
    check(E_new, epoch + 1);
    const double Delta = 2.0 * delta * (E - E_new) / (mu * mu);
    if (Delta >= 0.0 && std::isfinite(Delta)) {
      w = std::move(w_new);
      E = E_new;
      g = g_new;
      Eigen::VectorXd r_new = -g;
      lambda_bar = 0.0;
      success = true;
      if (++since_restart >= restart) {
        p = r_new;
        since_restart = 0;
      } else {
        const double beta = (r_new.squaredNorm() - r_new.dot(r)) / mu;
        p = r_new + beta * p;
      }
      r = std::move(r_new);
      if (Delta >= 0.75) lambda = 0.25 * lambda;
    } else {
      lambda_bar = lambda;
      success = false;
    }
    if (Delta < 0.25 || !std::isfinite(Delta)) lambda = lambda + delta * (1.0 - Delta) / p2;
    if (!std::isfinite(lambda) || lambda > 1e20) lambda = 1e20;
  }
  res.w = std::move(w);
  res.loss = E;
  res.epochs = epoch;
  res.grad_norm = r.norm();
  if (res.grad_norm < o.grad_tol) res.converged = true;
  return res;
}

}  // namespace hvacdr::nn
