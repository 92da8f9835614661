// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hvacdr/nn/network.hpp"
#include "hvacdr/nn/scg.hpp"
#include "hvacdr/thermal/dataset.hpp"

namespace hvacdr::nn {

struct Architecture {
  std::vector<int> units;
  std::vector<Activation> activations;

  int hidden_layers() const { return static_cast<int>(units.size()); }
  std::string label() const;  // e.g. "10relu-5sigmoid"
  void validate() const;
};

struct Nmse {
  double value = 0.0;
  bool defined = true;  // false when the target series is constant
};

// 1 - ||y - y'|| / ||y - mean(y)||.
Nmse nmse(std::span<const double> actual, std::span<const double> predicted);

struct TrainOptions {
  ScgOptions scg;
  int restarts = 3;  // independent initializations, best training loss kept
  double train_fraction = 0.8;
  double p_rated = 30.0;
  double output_margin = 0.2;  // output bounds widened by this share of the data range
};

struct TrainReport {
  double nmse_train = 0.0;  // open loop, training rows
  double nmse_test = 0.0;   // closed loop, held-out days
  bool nmse_undefined = false;
  int epochs = 0;
  double final_gradient_norm = 0.0;
  double loss = 0.0;
};

struct TrainResult {
  NetworkSpec net;
  TrainReport report;
};

// Normalization bounds for a layout from raw training inputs (one column per
// sample) and raw targets. Power taps use [0, p_rated], the hour uses
// [1, 24], feedback taps of the target zone share the output bounds.
void fit_bounds(const InputLayout& layout, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                const TrainOptions& options, std::vector<Bounds>& in_bounds, Bounds& out_bounds);

// Trains a network on raw inputs X (inputs x samples) and raw targets y.
TrainResult fit_network(const InputLayout& layout, const std::vector<Bounds>& in_bounds,
                        const Bounds& out_bounds, const Eigen::MatrixXd& X,
                        const Eigen::VectorXd& y, const Architecture& arch, std::uint64_t seed,
                        const TrainOptions& options = {});

// Chronological whole-day split: first round(frac*n) days train, rest test.
int train_day_count(int n_days, double train_fraction);

Timeline day_timeline(const thermal::Dataset& data, int day);

// Open-loop rows (actual delayed temperatures) for the given days.
void build_rows(const thermal::Dataset& data, const InputLayout& layout, int first_day,
                int last_day, Eigen::MatrixXd& X, Eigen::VectorXd& y);

// Zone network for layout.zone. Open-loop training on the first 80% of days,
// closed-loop test NMSE on the remaining days.
TrainResult train(const thermal::Dataset& data, const InputLayout& layout, const Architecture& arch,
                  std::uint64_t seed, const TrainOptions& options = {});

// Closed-loop test NMSE of an existing zone network over days [first, last).
Nmse closed_loop_nmse(const NetworkSpec& net, const thermal::Dataset& data, int first_day,
                      int last_day);

// Feeds predictions back into the feedback taps for hours first..last. The
// timeline must hold powers and environment for the day and temperatures for
// every hour before `first`. Predictions are written into the timeline.
thermal::Hourly rollout_closed_loop(const NetworkSpec& net, Timeline& timeline, int first = 1,
                                    int last = thermal::kHours);

}  // namespace hvacdr::nn
