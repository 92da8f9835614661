// SPDX-License-Identifier: Apache-2.0
#include "hvacdr/nn/network.hpp"

#include <cmath>

#include "hvacdr/error.hpp"
#include "hvacdr/util/format.hpp"
#include "json.hpp"

namespace hvacdr::nn {

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::sigmoid: return "sigmoid";
    case Activation::relu: return "relu";
    case Activation::linear: return "linear";
  }
  return "?";
}

Activation activation_from_name(const std::string& name) {
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "relu") return Activation::relu;
  if (name == "linear") return Activation::linear;
  throw config_error("unknown activation '" + name + "'");
}

double activate(Activation a, double v) {
  switch (a) {
    case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-v));
    case Activation::relu: return v > 0.0 ? v : 0.0;
    case Activation::linear: return v;
  }
  return v;
}

Normalized normalize(double x, const Bounds& b) {
  if (!(b.hi > b.lo)) throw config_error("degenerate normalization bounds");
  double v = 2.0 * (x - b.lo) / (b.hi - b.lo) - 1.0;
  if (v < -1.0) return {-1.0, true};
  if (v > 1.0) return {1.0, true};
  return {v, false};
}

double denormalize(double y, const Bounds& b) { return (y + 1.0) * (b.hi - b.lo) / 2.0 + b.lo; }

int NetworkSpec::neuron_count() const {
  int n = 0;
  for (const auto& l : layers) n += static_cast<int>(l.bias.size());
  return n;
}

int NetworkSpec::parameter_count() const {
  int n = 1 + static_cast<int>(out_weights.size());
  for (const auto& l : layers) n += static_cast<int>(l.weights.size() + l.bias.size());
  return n;
}

void NetworkSpec::validate() const {
  layout.validate();
  if (static_cast<int>(in_bounds.size()) != input_size())
    throw config_error("input bounds do not match the layout");
  for (const auto& b : in_bounds)
    if (!(b.hi > b.lo)) throw config_error("input bounds must satisfy max > min");
  if (!(out_bounds.hi > out_bounds.lo)) throw config_error("output bounds must satisfy max > min");
  if (layers.empty()) throw config_error("network needs at least one hidden layer");
  long fan_in = input_size();
  for (const auto& l : layers) {
    if (l.weights.cols() != fan_in || l.weights.rows() != l.bias.size() || l.bias.size() == 0)
      throw config_error("hidden layer shapes do not chain");
    if (l.activation == Activation::linear) throw config_error("hidden layers must be nonlinear");
    fan_in = l.weights.rows();
  }
  if (out_weights.size() != fan_in) throw config_error("output weights do not match last layer");
}

double forward_normalized(const NetworkSpec& net, const Eigen::Ref<const Eigen::VectorXd>& x) {
  Eigen::VectorXd h = x;
  for (const auto& l : net.layers) {
    Eigen::VectorXd n = l.weights * h + l.bias;
    for (Eigen::Index i = 0; i < n.size(); ++i) n(i) = activate(l.activation, n(i));
    h = std::move(n);
  }
  return net.out_weights.dot(h) + net.out_bias;
}

Eigen::VectorXd normalize_inputs(const NetworkSpec& net, std::span<const double> raw,
                                 bool* clamped) {
  if (static_cast<int>(raw.size()) != net.input_size())
    throw input_error("expected " + std::to_string(net.input_size()) + " inputs, got " +
                      std::to_string(raw.size()));
  Eigen::VectorXd x(raw.size());
  bool any = false;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!std::isfinite(raw[i])) throw input_error("non-finite network input");
    auto n = normalize(raw[i], net.in_bounds[i]);
    x(i) = n.value;
    any = any || n.clamped;
  }
  if (clamped) *clamped = any;
  return x;
}

double forward(const NetworkSpec& net, std::span<const double> raw, bool* clamped) {
  return denormalize(forward_normalized(net, normalize_inputs(net, raw, clamped)), net.out_bounds);
}

namespace {

using ojson = nlohmann::ordered_json;

ojson bounds_json(const Bounds& b) { return ojson::array({b.lo, b.hi}); }

Bounds bounds_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) throw config_error("bounds must be [min, max]");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

std::string to_json(const NetworkSpec& net) {
  ojson j;
  j["format"] = 1;
  ojson lay;
  lay["kind"] = net.layout.kind;
  lay["taus"] = net.layout.taus;
  lay["zone"] = net.layout.zone;
  lay["temp_zones"] = net.layout.temp_zones;
  auto slots = ojson::array();
  for (const auto& s : net.layout.slots)
    slots.push_back({{"signal", signal_name(s.signal)}, {"zone", s.zone}, {"delay", s.delay}});
  lay["slots"] = slots;
  j["layout"] = lay;
  auto layers = ojson::array();
  for (const auto& l : net.layers) {
    ojson lj;
    lj["activation"] = activation_name(l.activation);
    lj["rows"] = l.weights.rows();
    lj["cols"] = l.weights.cols();
    auto w = ojson::array();
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) w.push_back(l.weights(r, c));
    lj["weights"] = w;
    auto b = ojson::array();
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) b.push_back(l.bias(r));
    lj["bias"] = b;
    layers.push_back(lj);
  }
  j["layers"] = layers;
  auto ow = ojson::array();
  for (Eigen::Index i = 0; i < net.out_weights.size(); ++i) ow.push_back(net.out_weights(i));
  j["output"] = {{"activation", "linear"}, {"weights", ow}, {"bias", net.out_bias}};
  auto ib = ojson::array();
  for (const auto& b : net.in_bounds) ib.push_back(bounds_json(b));
  j["in_bounds"] = ib;
  j["out_bounds"] = bounds_json(net.out_bounds);
  return j.dump(1) + "\n";
}

NetworkSpec network_from_json(const std::string& text) {
  NetworkSpec net;
  try {
    auto j = nlohmann::json::parse(text);
    if (j.at("format").get<int>() != 1) throw config_error("unsupported network format version");
    const auto& lay = j.at("layout");
    net.layout.kind = lay.at("kind").get<std::string>();
    net.layout.taus = lay.at("taus").get<std::vector<int>>();
    net.layout.zone = lay.at("zone").get<int>();
    net.layout.temp_zones = lay.at("temp_zones").get<std::vector<int>>();
    for (const auto& s : lay.at("slots"))
      net.layout.slots.push_back({signal_from_name(s.at("signal").get<std::string>()),
                                  s.at("zone").get<int>(), s.at("delay").get<int>()});
    for (const auto& lj : j.at("layers")) {
      Layer l;
      l.activation = activation_from_name(lj.at("activation").get<std::string>());
      const auto rows = lj.at("rows").get<Eigen::Index>();
      const auto cols = lj.at("cols").get<Eigen::Index>();
      const auto& w = lj.at("weights");
      if (static_cast<Eigen::Index>(w.size()) != rows * cols)
        throw config_error("weight array size mismatch");
      l.weights.resize(rows, cols);
      for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) l.weights(r, c) = w[r * cols + c].get<double>();
      const auto b = lj.at("bias").get<std::vector<double>>();
      l.bias = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
      net.layers.push_back(std::move(l));
    }
    const auto& out = j.at("output");
    const auto ow = out.at("weights").get<std::vector<double>>();
    net.out_weights =
        Eigen::Map<const Eigen::RowVectorXd>(ow.data(), static_cast<Eigen::Index>(ow.size()));
    net.out_bias = out.at("bias").get<double>();
    for (const auto& b : j.at("in_bounds")) net.in_bounds.push_back(bounds_from(b));
    net.out_bounds = bounds_from(j.at("out_bounds"));
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("bad network JSON: ") + e.what());
  }
  net.validate();
  return net;
}

std::string content_hash(const NetworkSpec& net) { return util::hex64(util::fnv1a(to_json(net))); }

}  // namespace hvacdr::nn
