// SPDX-License-Identifier: Apache-2.0
// Small hand-built objects shared by the unit tests.
#pragma once

#include <random>
#include <vector>

#include "hvacdr/nn/network.hpp"
#include "hvacdr/thermal/building.hpp"
#include "hvacdr/thermal/weather.hpp"

namespace fixtures {

using namespace hvacdr;

// Random zone network over a NARX layout with input bounds [0, 30] for power
// and [0, 40] elsewhere.
inline nn::NetworkSpec random_net(nn::Activation act, const std::vector<int>& units, std::uint64_t seed,
                                  const nn::InputLayout& layout = nn::InputLayout::narx(2, 1, 2, 1),
                                  double out_scale = 0.3) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N(0.0, 1.0);
  nn::NetworkSpec net;
  net.layout = layout;
  int fan = layout.size();
  for (int u : units) {
    nn::Layer l;
    l.weights = Eigen::MatrixXd::NullaryExpr(u, fan, [&] { return N(rng); });
    l.bias = Eigen::VectorXd::NullaryExpr(u, [&] { return N(rng); });
    l.activation = act;
    net.layers.push_back(l);
    fan = u;
  }
  net.out_weights = Eigen::RowVectorXd::NullaryExpr(fan, [&] { return out_scale * N(rng); });
  net.out_bias = 0.05;
  for (const auto& s : layout.slots) {
    if (s.signal == nn::Signal::hour) net.in_bounds.push_back({1.0, 24.0});
    else if (s.signal == nn::Signal::power) net.in_bounds.push_back({0.0, 30.0});
    else net.in_bounds.push_back({0.0, 40.0});
  }
  net.out_bounds = {15.0, 30.0};
  return net;
}

// Network whose output falls strictly with every power tap: one ReLU unit fed
// by power only, kept active over the whole input box.
inline nn::NetworkSpec monotone_net() {
  nn::NetworkSpec net;
  net.layout = nn::InputLayout::narx(2, 1, 1, 1);
  const int n = net.layout.size();
  nn::Layer l;
  l.weights = Eigen::MatrixXd::Zero(1, n);
  for (int i : net.layout.indices(nn::InputRole::controllable)) l.weights(0, i) = 0.4;
  l.bias = Eigen::VectorXd::Constant(1, 1.0);
  l.activation = nn::Activation::relu;
  net.layers.push_back(l);
  net.out_weights = Eigen::RowVectorXd::Constant(1, -0.5);
  net.out_bias = 0.5;
  for (const auto& s : net.layout.slots)
    net.in_bounds.push_back(s.signal == nn::Signal::power ? nn::Bounds{0.0, 30.0} : nn::Bounds{0.0, 40.0});
  net.out_bounds = {18.0, 28.0};
  return net;
}

inline thermal::ScenarioDay flat_day(double price = 0.05, double ambient = 26.0) {
  thermal::ScenarioDay d;
  d.prices.fill(price);
  d.ambient.fill(ambient);
  d.insolation.fill(2.0);
  d.internal_load.fill(3.0);
  d.date_tag = "2012-07-01";
  return d;
}

}  // namespace fixtures
