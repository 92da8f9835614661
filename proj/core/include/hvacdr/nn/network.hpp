// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hvacdr/nn/layout.hpp"

namespace hvacdr::nn {

enum class Activation { sigmoid, relu, linear };

const char* activation_name(Activation a);
Activation activation_from_name(const std::string& name);
double activate(Activation a, double v);

struct Bounds {
  double lo = -1.0;
  double hi = 1.0;
  bool operator==(const Bounds&) const = default;
};

struct Normalized {
  double value = 0.0;
  bool clamped = false;
};

// 2(x - lo)/(hi - lo) - 1, clamped to [-1, 1].
Normalized normalize(double x, const Bounds& b);
double denormalize(double y, const Bounds& b);

struct Layer {
  Eigen::MatrixXd weights;  // units x fan_in
  Eigen::VectorXd bias;
  Activation activation = Activation::relu;
};

struct NetworkSpec {
  InputLayout layout;
  std::vector<Layer> layers;  // hidden layers
  Eigen::RowVectorXd out_weights;
  double out_bias = 0.0;
  std::vector<Bounds> in_bounds;
  Bounds out_bounds;

  int input_size() const { return layout.size(); }
  int neuron_count() const;
  int parameter_count() const;
  // Throws config_error on shape or bound problems.
  void validate() const;
};

// Output in normalized units for already normalized inputs.
double forward_normalized(const NetworkSpec& net, const Eigen::Ref<const Eigen::VectorXd>& x);
// Raw inputs in, degC out. Sets *clamped when any input left its bounds.
double forward(const NetworkSpec& net, std::span<const double> raw, bool* clamped = nullptr);
Eigen::VectorXd normalize_inputs(const NetworkSpec& net, std::span<const double> raw,
                                 bool* clamped = nullptr);

std::string to_json(const NetworkSpec& net);
NetworkSpec network_from_json(const std::string& text);
// Hash of the canonical JSON, used as registry key.
std::string content_hash(const NetworkSpec& net);

}  // namespace hvacdr::nn
