// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "hvacdr/milp/model.hpp"
#include "hvacdr/nn/network.hpp"

namespace hvacdr::ear {

// Incremental piecewise-linear activation: blocks s = 1..N_S between
// breakpoints r_{s-1} and r_s with slope l_s, value F_min at r_0.
struct PwlSpec {
  nn::Activation activation = nn::Activation::relu;
  std::vector<double> breakpoints;  // r_0..r_{N_S}
  std::vector<double> gradients;    // l_1..l_{N_S}
  double f_min = 0.0;
  double max_error = 0.0;  // max |PWL - activation| over the window

  int blocks() const { return static_cast<int>(gradients.size()); }
  double r0() const { return breakpoints.front(); }
  double r_end() const { return breakpoints.back(); }
  // Clamps v into the window first.
  double eval(double v) const;
  // Largest slope magnitude, used when propagating errors.
  double max_slope() const;
  void validate() const;
};

// Sigmoid: greedy max-error refinement with chord slopes. ReLU: the exact
// two-block spec (N_S must be 2 and r_0 < 0 < r_end). Linear: one block.
PwlSpec build_pwl(nn::Activation activation, int n_s, double r0, double r_end);

// Max |PWL - activation| from a uniform scan of `points` samples plus each
// block's analytic worst point.
double scan_error(const PwlSpec& pwl, int points = 10000);

// Restricts the spec to [lo, hi]: blocks outside are dropped and the outer
// breakpoints move onto the interval ends. Values inside [lo, hi] are kept.
PwlSpec clip_pwl(const PwlSpec& pwl, double lo, double hi);

struct EncodeOptions {
  int sigmoid_blocks = 5;
  double sigmoid_r0 = -8.0;
  double sigmoid_r_end = 8.0;
  // Drop blocks outside the interval-arithmetic pre-activation range.
  bool clip_blocks = true;
  int branch_priority = 0;
  // Extra valid rows for two-block ReLU neurons: for every subset of the
  // neuron's variable inputs, the inequality of the tightest single-neuron
  // formulation. Skipped above `cut_max_inputs` variable inputs.
  bool relu_cuts = false;
  int cut_max_inputs = 5;
};

// Value fed to one network input: a model column in raw units or a constant.
// A column may carry a known raw range, which tightens interval arithmetic.
struct InputSource {
  int var = -1;
  double value = 0.0;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  static InputSource column(int j) { return {j, 0.0}; }
  static InputSource column(int j, double lo, double hi) { return {j, 0.0, lo, hi}; }
  static InputSource constant(double v) { return {-1, v}; }
  bool is_column() const { return var >= 0; }
};

struct NeuronEncoding {
  int layer = 0;   // 1-based hidden layer
  int neuron = 0;  // 1-based within the layer
  nn::Bounds pre;  // interval-arithmetic pre-activation range
  PwlSpec pwl;     // spec actually encoded (after clipping or widening)
  int n_var = -1;  // first layer only
  int m_var = -1;
  std::vector<int> q, w;
};

struct BlockEncoding {
  int zone = 0;
  int hour = 0;
  std::vector<int> x_vars;  // -1 where the input is a constant
  int y_var = -1;
  int t_var = -1;
  nn::Bounds t_range;  // interval-arithmetic output range, degC; also the bounds of t_var
  std::vector<NeuronEncoding> neurons;
  int binaries = 0;
  std::vector<std::string> warnings;
};

// Normalized input ranges for interval arithmetic: point intervals for
// constants (clamped as the forward pass does), the normalized column range
// (at most [-1, 1]) for columns.
std::vector<nn::Bounds> input_intervals(const nn::NetworkSpec& net, std::span<const InputSource> inputs);

// Pre-activation interval per hidden layer and neuron.
std::vector<std::vector<nn::Bounds>> interval_bounds(const nn::NetworkSpec& net, const std::vector<nn::Bounds>& x,
                                                     const EncodeOptions& options = {});

// Adds the network for one (zone, hour) to the model: input normalization
// rows, first-layer rows, block-sum and fill-order rows, deeper-layer rows,
// the output row and the output de-normalization row.
BlockEncoding encode_network(milp::MilpModel& model, const nn::NetworkSpec& net, int zone, int hour,
                             std::span<const InputSource> inputs, const EncodeOptions& options = {});

int binary_count(const milp::MilpModel& model);

// Worst-case |MILP output - exact forward| in degC for any input, propagated
// layer by layer from each neuron's PWL error and slope.
double certified_error_bound(const nn::NetworkSpec& net, const EncodeOptions& options = {});
double certified_error_bound(const nn::NetworkSpec& net, const BlockEncoding& block);

}  // namespace hvacdr::ear
