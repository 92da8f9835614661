// SPDX-License-Identifier: Apache-2.0
#include "hvacdr/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "hvacdr/error.hpp"

namespace hvacdr::nn {

std::string Architecture::label() const {
  std::string s;
  for (std::size_t g = 0; g < units.size(); ++g) {
    if (g) s += '-';
    s += std::to_string(units[g]);
    s += activation_name(activations.at(g));
  }
  return s;
}

void Architecture::validate() const {
  if (units.empty()) throw config_error("architecture needs at least one hidden layer");
  if (units.size() != activations.size())
    throw config_error("architecture needs one activation per layer");
  for (int u : units)
    if (u < 1) throw config_error("hidden layers need at least one neuron");
  for (auto a : activations)
    if (a == Activation::linear) throw config_error("hidden activations must be sigmoid or relu");
}

Nmse nmse(std::span<const double> actual, std::span<const double> predicted) {
  if (actual.size() != predicted.size() || actual.empty())
    throw input_error("NMSE needs two non-empty series of equal length");
  double mean = 0.0;
  for (double v : actual) mean += v;
  mean /= static_cast<double>(actual.size());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    num += (actual[i] - predicted[i]) * (actual[i] - predicted[i]);
    den += (actual[i] - mean) * (actual[i] - mean);
  }
  if (den == 0.0) return {std::numeric_limits<double>::quiet_NaN(), false};
  return {1.0 - std::sqrt(num) / std::sqrt(den), true};
}

namespace {

Bounds widen_if_degenerate(Bounds b) {
  if (b.hi > b.lo) return b;
  const double pad = std::max(0.5, 1e-3 * std::abs(b.lo));
  return {b.lo - pad, b.hi + pad};
}

// Flattened parameter vector: per layer W (column-major) then b, then the
// output weights and bias.
struct Shapes {
  std::vector<int> fan_in, units;
  std::vector<Activation> acts;
  int n_params = 0;
};

Shapes shapes_of(int inputs, const Architecture& arch) {
  Shapes s;
  int fan = inputs;
  for (int g = 0; g < arch.hidden_layers(); ++g) {
    s.fan_in.push_back(fan);
    s.units.push_back(arch.units[g]);
    s.acts.push_back(arch.activations[g]);
    s.n_params += arch.units[g] * fan + arch.units[g];
    fan = arch.units[g];
  }
  s.n_params += fan + 1;
  return s;
}

class MlpLoss {
 public:
  MlpLoss(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Shapes& s)
      : X_(X), y_(y), s_(s), Z_(s.units.size()), A_(s.units.size()) {}

  double operator()(const Eigen::VectorXd& w, Eigen::VectorXd& grad) {
    const Eigen::Index N = X_.cols();
    const int G = static_cast<int>(s_.units.size());
    int off = 0;
    std::vector<int> w_off(G), b_off(G);
    for (int g = 0; g < G; ++g) {
      w_off[g] = off;
      off += s_.units[g] * s_.fan_in[g];
      b_off[g] = off;
      off += s_.units[g];
    }
    const int ow_off = off;
    const int last = G ? s_.units[G - 1] : 0;
    const int ob_off = ow_off + last;

    for (int g = 0; g < G; ++g) {
      Eigen::Map<const Eigen::MatrixXd> W(w.data() + w_off[g], s_.units[g], s_.fan_in[g]);
      Eigen::Map<const Eigen::VectorXd> b(w.data() + b_off[g], s_.units[g]);
      const Eigen::MatrixXd& in = g == 0 ? X_ : A_[g - 1];
      Z_[g].noalias() = W * in;
      Z_[g].colwise() += b;
      if (s_.acts[g] == Activation::relu)
        A_[g] = Z_[g].cwiseMax(0.0);
      else
        A_[g] = (1.0 + (-Z_[g].array()).exp()).inverse().matrix();
    }
    Eigen::Map<const Eigen::RowVectorXd> ow(w.data() + ow_off, last);
    Eigen::RowVectorXd out = ow * A_[G - 1];
    out.array() += w(ob_off);
    Eigen::RowVectorXd e = out - y_.transpose();
    const double loss = e.squaredNorm() / static_cast<double>(N);

    grad.setZero(w.size());
    Eigen::RowVectorXd dout = (2.0 / static_cast<double>(N)) * e;
    grad.segment(ow_off, last) = (A_[G - 1] * dout.transpose());
    grad(ob_off) = dout.sum();
    Eigen::MatrixXd delta = ow.transpose() * dout;
    for (int g = G - 1; g >= 0; --g) {
      if (s_.acts[g] == Activation::relu)
        delta.array() *= (Z_[g].array() > 0.0).cast<double>();
      else
        delta.array() *= A_[g].array() * (1.0 - A_[g].array());
      const Eigen::MatrixXd& in = g == 0 ? X_ : A_[g - 1];
      Eigen::Map<Eigen::MatrixXd> gW(grad.data() + w_off[g], s_.units[g], s_.fan_in[g]);
      gW.noalias() = delta * in.transpose();
      grad.segment(b_off[g], s_.units[g]) = delta.rowwise().sum();
      if (g > 0) {
        Eigen::Map<const Eigen::MatrixXd> W(w.data() + w_off[g], s_.units[g], s_.fan_in[g]);
        Eigen::MatrixXd next = W.transpose() * delta;
        delta = std::move(next);
      }
    }
    return loss;
  }

 private:
  const Eigen::MatrixXd& X_;
  const Eigen::VectorXd& y_;
  const Shapes& s_;
  std::vector<Eigen::MatrixXd> Z_, A_;
};

Eigen::VectorXd init_weights(const Shapes& s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Eigen::VectorXd w(s.n_params);
  int off = 0;
  auto fill = [&](int count, int fan_in) {
    std::uniform_real_distribution<double> u(-1.0 / std::sqrt(double(fan_in)),
                                             1.0 / std::sqrt(double(fan_in)));
    for (int i = 0; i < count; ++i) w(off++) = u(rng);
  };
  for (std::size_t g = 0; g < s.units.size(); ++g) {
    fill(s.units[g] * s.fan_in[g], s.fan_in[g]);
    fill(s.units[g], s.fan_in[g]);
  }
  const int last = s.units.back();
  fill(last, last);
  fill(1, last);
  return w;
}

void unpack(const Eigen::VectorXd& w, const Shapes& s, NetworkSpec& net) {
  int off = 0;
  net.layers.clear();
  for (std::size_t g = 0; g < s.units.size(); ++g) {
    Layer l;
    l.activation = s.acts[g];
    l.weights = Eigen::Map<const Eigen::MatrixXd>(w.data() + off, s.units[g], s.fan_in[g]);
    off += s.units[g] * s.fan_in[g];
    l.bias = w.segment(off, s.units[g]);
    off += s.units[g];
    net.layers.push_back(std::move(l));
  }
  const int last = s.units.back();
  net.out_weights = w.segment(off, last).transpose();
  net.out_bias = w(off + last);
}

}  // namespace

void fit_bounds(const InputLayout& layout, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                const TrainOptions& o, std::vector<Bounds>& in_bounds, Bounds& out_bounds) {
  if (X.cols() == 0 || X.rows() != layout.size() || y.size() != X.cols())
    throw input_error("training matrix does not match the layout");
  out_bounds = widen_if_degenerate({y.minCoeff(), y.maxCoeff()});
  const double pad = o.output_margin * (out_bounds.hi - out_bounds.lo);
  out_bounds = {out_bounds.lo - pad, out_bounds.hi + pad};
  in_bounds.assign(layout.size(), {});
  for (int i = 0; i < layout.size(); ++i) {
    const auto& s = layout.slots[i];
    if (s.signal == Signal::hour) {
      in_bounds[i] = {1.0, double(thermal::kHours)};
    } else if (s.signal == Signal::power) {
      in_bounds[i] = {0.0, o.p_rated};
    } else if (s.signal == Signal::temp && layout.kind == "narx" && s.zone == layout.zone) {
      in_bounds[i] = out_bounds;
    } else {
      Bounds b = widen_if_degenerate({X.row(i).minCoeff(), X.row(i).maxCoeff()});
      if (s.signal == Signal::temp) {
        const double p = o.output_margin * (b.hi - b.lo);
        b = {b.lo - p, b.hi + p};
      }
      in_bounds[i] = b;
    }
  }
}

TrainResult fit_network(const InputLayout& layout, const std::vector<Bounds>& in_bounds,
                        const Bounds& out_bounds, const Eigen::MatrixXd& X,
                        const Eigen::VectorXd& y, const Architecture& arch, std::uint64_t seed,
                        const TrainOptions& o) {
  arch.validate();
  layout.validate();
  if (X.rows() != layout.size() || X.cols() != y.size() || X.cols() == 0)
    throw input_error("training matrix does not match the layout");

  NetworkSpec net;
  net.layout = layout;
  net.in_bounds = in_bounds;
  net.out_bounds = out_bounds;

  Eigen::MatrixXd Xn(X.rows(), X.cols());
  for (Eigen::Index r = 0; r < X.rows(); ++r)
    for (Eigen::Index c = 0; c < X.cols(); ++c) Xn(r, c) = normalize(X(r, c), in_bounds[r]).value;
  Eigen::VectorXd yn(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i)
    yn(i) = 2.0 * (y(i) - out_bounds.lo) / (out_bounds.hi - out_bounds.lo) - 1.0;

  const Shapes s = shapes_of(layout.size(), arch);
  MlpLoss loss(Xn, yn, s);
  Objective obj = [&loss](const Eigen::VectorXd& w, Eigen::VectorXd& g) { return loss(w, g); };

  ScgResult best;
  bool have = false;
  for (int r = 0; r < std::max(1, o.restarts); ++r) {
    ScgResult res = minimize_scg(obj, init_weights(s, seed * 7919u + r), o.scg);
    if (!have || res.loss < best.loss) {
      best = std::move(res);
      have = true;
    }
  }
  unpack(best.w, s, net);
  net.validate();

  TrainResult out;
  out.net = std::move(net);
  out.report.epochs = best.epochs;
  out.report.final_gradient_norm = best.grad_norm;
  out.report.loss = best.loss;
  std::vector<double> pred(y.size()), act(y.data(), y.data() + y.size());
  for (Eigen::Index c = 0; c < X.cols(); ++c)
    pred[c] = denormalize(forward_normalized(out.net, Xn.col(c)), out_bounds);
  auto n = nmse(act, pred);
  out.report.nmse_train = n.value;
  out.report.nmse_undefined = !n.defined;
  return out;
}

int train_day_count(int n_days, double frac) {
  if (n_days < 2) throw input_error("need at least two days to split");
  int n = static_cast<int>(std::lround(frac * n_days));
  return std::clamp(n, 1, n_days - 1);
}

Timeline day_timeline(const thermal::Dataset& data, int day) {
  const auto& today = data.days.at(day);
  const auto& prior = day == 0 ? data.prior : data.days.at(day - 1);
  if (prior.records.size() != thermal::kHours)
    throw input_error("missing prior-day records for day " + std::to_string(day));
  Timeline tl(prior.scenario, today.scenario);
  tl.set_records(0, prior.records);
  tl.set_records(1, today.records);
  return tl;
}

void build_rows(const thermal::Dataset& data, const InputLayout& layout, int first_day,
                int last_day, Eigen::MatrixXd& X, Eigen::VectorXd& y) {
  if (layout.kind != "narx") throw config_error("zone training needs a NARX layout");
  if (layout.max_delay() > thermal::kHours) throw config_error("delays exceed one day");
  const int n = (last_day - first_day) * thermal::kHours;
  X.resize(layout.size(), n);
  y.resize(n);
  std::vector<double> buf(layout.size());
  int c = 0;
  for (int d = first_day; d < last_day; ++d) {
    Timeline tl = day_timeline(data, d);
    for (int h = 1; h <= thermal::kHours; ++h, ++c) {
      tl.inputs(layout, h, buf);
      for (int i = 0; i < layout.size(); ++i) X(i, c) = buf[i];
      y(c) = tl.temp(layout.zone, h);
    }
  }
}

thermal::Hourly rollout_closed_loop(const NetworkSpec& net, Timeline& tl, int first, int last) {
  if (net.layout.kind != "narx") throw config_error("closed-loop rollout needs a zone network");
  if (first < 1 || last > thermal::kHours || first > last) throw input_error("bad rollout window");
  if (first - net.layout.max_delay() < Timeline::kFirst)
    throw input_error("history does not cover the delayed taps");
  std::vector<double> buf(net.input_size());
  const int zone = net.layout.zone;
  for (int h = first; h <= last; ++h) {
    tl.inputs(net.layout, h, buf);
    tl.set_temp(zone, h, forward(net, buf));
  }
  thermal::Hourly out{};
  for (int h = 1; h <= thermal::kHours; ++h) out[h - 1] = tl.temp(zone, h);
  return out;
}

Nmse closed_loop_nmse(const NetworkSpec& net, const thermal::Dataset& data, int first_day,
                      int last_day) {
  std::vector<double> act, pred;
  for (int d = first_day; d < last_day; ++d) {
    Timeline tl = day_timeline(data, d);
    auto truth = data.days[d].temps(net.layout.zone);
    auto roll = rollout_closed_loop(net, tl);
    act.insert(act.end(), truth.begin(), truth.end());
    pred.insert(pred.end(), roll.begin(), roll.end());
  }
  return nmse(act, pred);
}

TrainResult train(const thermal::Dataset& data, const InputLayout& layout, const Architecture& arch,
                  std::uint64_t seed, const TrainOptions& o) {
  const int n_days = static_cast<int>(data.days.size());
  const int n_train = train_day_count(n_days, o.train_fraction);
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  build_rows(data, layout, 0, n_train, X, y);
  std::vector<Bounds> in_b;
  Bounds out_b;
  fit_bounds(layout, X, y, o, in_b, out_b);
  TrainResult res = fit_network(layout, in_b, out_b, X, y, arch, seed, o);
  auto test = closed_loop_nmse(res.net, data, n_train, n_days);
  res.report.nmse_test = test.value;
  res.report.nmse_undefined = res.report.nmse_undefined || !test.defined;
  return res;
}

}  // namespace hvacdr::nn
