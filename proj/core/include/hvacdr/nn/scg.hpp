// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>

#include <Eigen/Core>

namespace hvacdr::nn {

struct ScgOptions {
  int max_epochs = 2000;
  double grad_tol = 1e-6;
  double sigma = 5e-5;
  double lambda_init = 5e-7;
  int restart_every = 0;  // 0 means the number of weights
};

struct ScgResult {
  Eigen::VectorXd w;
  double loss = 0.0;
  int epochs = 0;
  double grad_norm = 0.0;
  bool converged = false;  // gradient tolerance reached
};

// Returns E(w) and writes dE/dw into grad.
using Objective = std::function<double(const Eigen::VectorXd& w, Eigen::VectorXd& grad)>;

// Moller's scaled conjugate gradient. Throws training_diverged on a
// non-finite loss.
ScgResult minimize_scg(const Objective& f, Eigen::VectorXd w0, const ScgOptions& options = {});

}  // namespace hvacdr::nn
