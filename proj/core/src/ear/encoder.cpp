// SPDX-License-Identifier: Apache-2.0
#include "hvacdr/ear/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "hvacdr/error.hpp"
#include "hvacdr/util/format.hpp"

namespace hvacdr::ear {

using milp::MilpModel;
using milp::Sense;
using milp::Term;
using nn::Activation;

namespace {

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// Worst |sigmoid - chord| on [a, b]; the chord error peaks where the
// sigmoid slope equals the chord slope.
double chord_error(double a, double b, double* arg = nullptr) {
  const double fa = sigmoid(a), fb = sigmoid(b);
  if (b <= a) {
    if (arg) *arg = a;
    return 0.0;
  }
  const double l = (fb - fa) / (b - a);
  double worst = 0.0, where = 0.5 * (a + b);
  const double disc = 1.0 - 4.0 * l;
  if (disc >= 0.0) {
    for (double s : {(1.0 - std::sqrt(disc)) / 2.0, (1.0 + std::sqrt(disc)) / 2.0}) {
      if (s <= 0.0 || s >= 1.0) continue;
      const double v = std::log(s / (1.0 - s));
      if (v <= a || v >= b) continue;
      const double e = std::abs(sigmoid(v) - (fa + l * (v - a)));
      if (e > worst) {
        worst = e;
        where = v;
      }
    }
  }
  if (arg) *arg = where;
  return worst;
}

double exact(Activation a, double v) { return nn::activate(a, v); }

double lipschitz(Activation a) { return a == Activation::sigmoid ? 0.25 : 1.0; }

std::string tag(int zone, int hour) { return "z" + std::to_string(zone) + "_t" + std::to_string(hour); }

}  // namespace

double PwlSpec::eval(double v) const {
  v = std::clamp(v, r0(), r_end());
  double out = f_min;
  for (int s = 0; s < blocks(); ++s) {
    const double width = breakpoints[s + 1] - breakpoints[s];
    out += gradients[s] * std::clamp(v - breakpoints[s], 0.0, width);
  }
  return out;
}

double PwlSpec::max_slope() const {
  double m = 0.0;
  for (double g : gradients) m = std::max(m, std::abs(g));
  return m;
}

void PwlSpec::validate() const {
  if (blocks() < 1 || breakpoints.size() != gradients.size() + 1)
    throw config_error("piecewise spec needs N_S+1 breakpoints and N_S gradients");
  for (std::size_t s = 1; s < breakpoints.size(); ++s)
    if (!(breakpoints[s] >= breakpoints[s - 1])) throw config_error("breakpoints must be increasing");
  if (activation == Activation::sigmoid) {
    for (double g : gradients)
      if (!(g > 0.0)) throw config_error("sigmoid gradients must be positive");
    std::size_t peak = std::max_element(gradients.begin(), gradients.end()) - gradients.begin();
    for (std::size_t s = 1; s <= peak; ++s)
      if (gradients[s] < gradients[s - 1] - 1e-12) throw config_error("sigmoid gradients are not unimodal");
    for (std::size_t s = peak + 1; s < gradients.size(); ++s)
      if (gradients[s] > gradients[s - 1] + 1e-12) throw config_error("sigmoid gradients are not unimodal");
  }
}

double scan_error(const PwlSpec& pwl, int points) {
  if (pwl.activation == Activation::relu || pwl.activation == Activation::linear) {
    double worst = 0.0;
    for (int k = 0; k <= std::max(points, 1); ++k) {
      const double v = pwl.r0() + (pwl.r_end() - pwl.r0()) * k / std::max(points, 1);
      worst = std::max(worst, std::abs(pwl.eval(v) - exact(pwl.activation, v)));
    }
    return worst;
  }
  double worst = 0.0;
  const double span = pwl.r_end() - pwl.r0();
  for (int k = 0; k <= points; ++k) {
    const double v = pwl.r0() + span * k / points;
    worst = std::max(worst, std::abs(pwl.eval(v) - sigmoid(v)));
  }
  // Inside a block the error is extremal where the sigmoid slope equals the
  // block gradient (clipped blocks keep their original gradient, so this is
  // not the chord of the clipped ends) or at the block ends.
  for (int s = 0; s < pwl.blocks(); ++s) {
    const double a = pwl.breakpoints[s], b = pwl.breakpoints[s + 1];
    for (double v : {a, b}) worst = std::max(worst, std::abs(pwl.eval(v) - sigmoid(v)));
    const double disc = 1.0 - 4.0 * pwl.gradients[s];
    if (disc < 0.0) continue;
    for (double f : {(1.0 - std::sqrt(disc)) / 2.0, (1.0 + std::sqrt(disc)) / 2.0}) {
      if (f <= 0.0 || f >= 1.0) continue;
      const double v = std::log(f / (1.0 - f));
      if (v > a && v < b) worst = std::max(worst, std::abs(pwl.eval(v) - sigmoid(v)));
    }
  }
  return worst;
}

PwlSpec build_pwl(Activation activation, int n_s, double r0, double r_end) {
  if (!(r0 < r_end)) throw config_error("piecewise window needs r_0 < r_end");
  PwlSpec p;
  p.activation = activation;
  if (activation == Activation::linear) {
    p.breakpoints = {r0, r_end};
    p.gradients = {1.0};
    p.f_min = r0;
    return p;
  }
  if (n_s < 2) throw config_error("piecewise linearization needs N_S >= 2");
  if (activation == Activation::relu) {
    if (n_s != 2) throw config_error("ReLU is encoded exactly with N_S = 2");
    if (!(r0 < 0.0 && r_end > 0.0)) throw config_error("ReLU window must straddle zero");
    p.breakpoints = {r0, 0.0, r_end};
    p.gradients = {0.0, 1.0};
    p.f_min = 0.0;
    return p;
  }
  std::vector<double> r{r0, r_end};
  while (static_cast<int>(r.size()) < n_s + 1) {
    std::size_t worst_seg = 0;
    double worst = -1.0;
    for (std::size_t s = 0; s + 1 < r.size(); ++s) {
      const double e = chord_error(r[s], r[s + 1]);
      if (e > worst) {
        worst = e;
        worst_seg = s;
      }
    }
    // Split where the two halves have equal chord error.
    double a = r[worst_seg], b = r[worst_seg + 1];
    double lo = a, hi = b;
    for (int it = 0; it < 200; ++it) {
      const double t = 0.5 * (lo + hi);
      if (chord_error(a, t) < chord_error(t, b))
        lo = t;
      else
        hi = t;
    }
    r.insert(r.begin() + static_cast<long>(worst_seg) + 1, 0.5 * (lo + hi));
  }
  p.breakpoints = r;
  for (std::size_t s = 0; s + 1 < r.size(); ++s)
    p.gradients.push_back((sigmoid(r[s + 1]) - sigmoid(r[s])) / (r[s + 1] - r[s]));
  p.f_min = sigmoid(r0);
  p.max_error = scan_error(p);
  p.validate();
  return p;
}

PwlSpec clip_pwl(const PwlSpec& pwl, double lo, double hi) {
  lo = std::clamp(lo, pwl.r0(), pwl.r_end());
  hi = std::clamp(hi, pwl.r0(), pwl.r_end());
  if (hi < lo) std::swap(lo, hi);
  const int n = pwl.blocks();
  int first = n - 1, last = 0;
  for (int s = 0; s < n; ++s)
    if (pwl.breakpoints[s + 1] > lo) {
      first = s;
      break;
    }
  for (int s = n - 1; s >= 0; --s)
    if (pwl.breakpoints[s] < hi) {
      last = s;
      break;
    }
  if (last < first) last = first;
  PwlSpec out;
  out.activation = pwl.activation;
  out.breakpoints.push_back(lo);
  for (int s = first; s < last; ++s) out.breakpoints.push_back(pwl.breakpoints[s + 1]);
  out.breakpoints.push_back(hi);
  for (int s = first; s <= last; ++s) out.gradients.push_back(pwl.gradients[s]);
  out.f_min = pwl.eval(lo);
  out.max_error = pwl.activation == Activation::sigmoid ? scan_error(out) : 0.0;
  return out;
}

namespace {

struct NeuronPlan {
  nn::Bounds pre;
  nn::Bounds post;
  PwlSpec pwl;
  bool widened = false;
};

// Interval arithmetic through the network, choosing the encoded spec of
// every neuron on the way. Output ranges of a layer come from the encoded
// PWL so the next layer's ranges match what the MILP can represent.
std::vector<std::vector<NeuronPlan>> plan(const nn::NetworkSpec& net, const std::vector<nn::Bounds>& x,
                                          const EncodeOptions& o) {
  if (static_cast<int>(x.size()) != net.input_size()) throw input_error("input interval count mismatch");
  std::vector<std::vector<NeuronPlan>> out;
  std::vector<nn::Bounds> h = x;
  std::map<Activation, PwlSpec> base;
  for (const auto& layer : net.layers) {
    std::vector<NeuronPlan> lp(layer.bias.size());
    std::vector<nn::Bounds> next(layer.bias.size());
    for (Eigen::Index j = 0; j < layer.bias.size(); ++j) {
      double lo = layer.bias(j), hi = layer.bias(j);
      for (Eigen::Index i = 0; i < layer.weights.cols(); ++i) {
        const double w = layer.weights(j, i);
        lo += w >= 0 ? w * h[i].lo : w * h[i].hi;
        hi += w >= 0 ? w * h[i].hi : w * h[i].lo;
      }
      // Small pad so rounding in fixed-input solves never cuts the point off.
      const double pad = 1e-7 * (1.0 + std::abs(lo) + std::abs(hi));
      lo -= pad;
      hi += pad;
      auto& np = lp[j];
      np.pre = {lo, hi};
      const Activation act = layer.activation;
      if (act == Activation::sigmoid) {
        if (!base.count(act)) base[act] = build_pwl(act, o.sigmoid_blocks, o.sigmoid_r0, o.sigmoid_r_end);
        PwlSpec spec = base[act];
        if (lo < spec.r0() || hi > spec.r_end()) {
          spec = build_pwl(act, o.sigmoid_blocks, std::min(lo, spec.r0()), std::max(hi, spec.r_end()));
          np.widened = true;
        }
        np.pwl = o.clip_blocks ? clip_pwl(spec, lo, hi) : spec;
      } else if (act == Activation::relu) {
        const double r0 = std::min(lo, -1.0), r_end = std::max(hi, 1.0);
        PwlSpec spec = build_pwl(act, 2, r0, r_end);
        np.pwl = o.clip_blocks ? clip_pwl(spec, lo, hi) : spec;
      } else {
        np.pwl = build_pwl(act, 1, lo, std::max(hi, lo + 1e-9));
      }
      np.post = {np.pwl.eval(lo), np.pwl.eval(hi)};
      next[j] = np.post;
    }
    out.push_back(std::move(lp));
    h = std::move(next);
  }
  return out;
}

}  // namespace

std::vector<nn::Bounds> input_intervals(const nn::NetworkSpec& net, std::span<const InputSource> inputs) {
  if (static_cast<int>(inputs.size()) != net.input_size())
    throw input_error("expected " + std::to_string(net.input_size()) + " input sources, got " +
                      std::to_string(inputs.size()));
  std::vector<nn::Bounds> x(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].is_column()) {
      if (inputs[i].lo > inputs[i].hi) throw input_error("empty range for column input " + std::to_string(i + 1));
      x[i] = {std::isfinite(inputs[i].lo) ? nn::normalize(inputs[i].lo, net.in_bounds[i]).value : -1.0,
              std::isfinite(inputs[i].hi) ? nn::normalize(inputs[i].hi, net.in_bounds[i]).value : 1.0};
    } else {
      if (!std::isfinite(inputs[i].value)) throw input_error("non-finite constant network input");
      const double v = nn::normalize(inputs[i].value, net.in_bounds[i]).value;
      x[i] = {v, v};
    }
  }
  return x;
}

std::vector<std::vector<nn::Bounds>> interval_bounds(const nn::NetworkSpec& net, const std::vector<nn::Bounds>& x,
                                                     const EncodeOptions& options) {
  std::vector<std::vector<nn::Bounds>> out;
  for (const auto& layer : plan(net, x, options)) {
    out.emplace_back();
    for (const auto& np : layer) out.back().push_back(np.pre);
  }
  return out;
}

BlockEncoding encode_network(MilpModel& model, const nn::NetworkSpec& net, int zone, int hour,
                             std::span<const InputSource> inputs, const EncodeOptions& o) {
  net.validate();
  const auto xr = input_intervals(net, inputs);
  const auto plans = plan(net, xr, o);
  const std::string zt = tag(zone, hour);

  BlockEncoding enc;
  enc.zone = zone;
  enc.hour = hour;
  enc.x_vars.assign(inputs.size(), -1);

  // Pre-processor rows for inputs that are model columns.
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (!inputs[i].is_column()) continue;
    const auto& b = net.in_bounds[i];
    const double span = b.hi - b.lo;
    const int xv = model.add_variable("x_" + zt + "_i" + std::to_string(i + 1), -1.0, 1.0);
    model.add_constraint("pre10_" + zt + "_i" + std::to_string(i + 1), {{inputs[i].var, -2.0 / span}, {xv, 1.0}},
                         Sense::eq, -2.0 * b.lo / span - 1.0);
    enc.x_vars[i] = xv;
  }

  std::vector<int> prev_m;
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    const auto& layer = net.layers[k];
    std::vector<int> cur_m;
    for (Eigen::Index j = 0; j < layer.bias.size(); ++j) {
      const auto& np = plans[k][j];
      NeuronEncoding ne;
      ne.layer = static_cast<int>(k) + 1;
      ne.neuron = static_cast<int>(j) + 1;
      ne.pre = np.pre;
      ne.pwl = np.pwl;
      if (np.widened)
        enc.warnings.push_back("neuron " + std::to_string(ne.layer) + "." + std::to_string(ne.neuron) + " at " + zt +
                               " needed a wider sigmoid window [" + util::format_double(ne.pwl.r0()) + ", " +
                               util::format_double(ne.pwl.r_end()) + "]");
      const std::string nt = zt + "_l" + std::to_string(ne.layer) + "_j" + std::to_string(ne.neuron);
      const auto& r = ne.pwl.breakpoints;
      const int ns = ne.pwl.blocks();

      for (int s = 0; s < ns; ++s)
        ne.q.push_back(model.add_variable("q_" + nt + "_s" + std::to_string(s + 1), 0.0, r[s + 1] - r[s]));
      for (int s = 0; s + 1 < ns; ++s)
        ne.w.push_back(model.add_binary("w_" + nt + "_s" + std::to_string(s + 1), 0.0, o.branch_priority));
      ne.m_var = model.add_variable("m_" + nt, ne.pwl.eval(r.front()), ne.pwl.eval(r.back()));

      if (k == 0) {
        ne.n_var = model.add_variable("n_" + nt, r.front(), r.back());
        std::vector<Term> terms{{ne.n_var, 1.0}};
        double rhs = layer.bias(j);
        for (std::size_t i = 0; i < inputs.size(); ++i) {
          const double w = layer.weights(j, static_cast<Eigen::Index>(i));
          if (enc.x_vars[i] >= 0)
            terms.push_back({enc.x_vars[i], -w});
          else
            rhs += w * xr[i].lo;
        }
        model.add_constraint("in16_" + nt, std::move(terms), Sense::eq, rhs);
        std::vector<Term> sum{{ne.n_var, 1.0}};
        for (int q : ne.q) sum.push_back({q, -1.0});
        model.add_constraint("sum5b_" + nt, std::move(sum), Sense::eq, r.front());
      } else {
        std::vector<Term> terms;
        for (std::size_t i = 0; i < prev_m.size(); ++i)
          terms.push_back({prev_m[i], -layer.weights(j, static_cast<Eigen::Index>(i))});
        for (int q : ne.q) terms.push_back({q, 1.0});
        model.add_constraint("deep17_" + nt, std::move(terms), Sense::eq, layer.bias(j) - r.front());
      }

      std::vector<Term> val{{ne.m_var, 1.0}};
      for (int s = 0; s < ns; ++s) val.push_back({ne.q[s], -ne.pwl.gradients[s]});
      model.add_constraint("sum5a_" + nt, std::move(val), Sense::eq, ne.pwl.f_min);

      if (ns >= 2) {
        auto width = [&](int s) { return r[s + 1] - r[s]; };
        model.add_constraint("ord6a_" + nt, {{ne.q[0], -1.0}, {ne.w[0], width(0)}}, Sense::le, 0.0);
        for (int s = 1; s + 1 < ns; ++s) {
          const std::string st = nt + "_s" + std::to_string(s + 1);
          model.add_constraint("ord7a_" + st, {{ne.q[s], -1.0}, {ne.w[s], width(s)}}, Sense::le, 0.0);
          model.add_constraint("ord7b_" + st, {{ne.q[s], 1.0}, {ne.w[s - 1], -width(s)}}, Sense::le, 0.0);
        }
        model.add_constraint("ord8b_" + nt, {{ne.q[ns - 1], 1.0}, {ne.w[ns - 2], -width(ns - 1)}}, Sense::le, 0.0);
      }
      if (o.relu_cuts && layer.activation == Activation::relu && ns == 2) {
        // Variable inputs with their ranges; constants fold into the offset.
        struct In {
          int var;
          double w, lo, hi;
        };
        std::vector<In> ins;
        double offset = layer.bias(j);
        if (k == 0) {
          for (std::size_t i = 0; i < inputs.size(); ++i) {
            const double w = layer.weights(j, static_cast<Eigen::Index>(i));
            if (w == 0.0) continue;
            if (enc.x_vars[i] >= 0)
              ins.push_back({enc.x_vars[i], w, xr[i].lo, xr[i].hi});
            else
              offset += w * xr[i].lo;
          }
        } else {
          for (std::size_t i = 0; i < prev_m.size(); ++i) {
            const double w = layer.weights(j, static_cast<Eigen::Index>(i));
            if (w != 0.0) ins.push_back({prev_m[i], w, plans[k - 1][i].post.lo, plans[k - 1][i].post.hi});
          }
        }
        const int nv = static_cast<int>(ins.size());
        if (nv >= 2 && nv <= o.cut_max_inputs) {
          // m <= sum_{i in I} w_i (x_i - L_i (1 - z)) + (offset + sum_{i not in I} w_i U_i) z,
          // L_i / U_i the bound minimizing / maximizing w_i x_i. The empty and
          // full subsets repeat existing rows.
          for (int mask = 1; mask + 1 < (1 << nv); ++mask) {
            std::vector<Term> terms{{ne.m_var, 1.0}};
            double zc = offset, rhs = 0.0;
            for (int i = 0; i < nv; ++i) {
              const auto& in = ins[i];
              const double L = in.w >= 0 ? in.lo : in.hi;
              const double U = in.w >= 0 ? in.hi : in.lo;
              if (mask >> i & 1) {
                terms.push_back({in.var, -in.w});
                zc += in.w * L;
                rhs -= in.w * L;
              } else {
                zc += in.w * U;
              }
            }
            terms.push_back({ne.w[0], -zc});
            model.add_constraint("ideal_" + nt + "_c" + std::to_string(mask), std::move(terms), Sense::le, rhs);
          }
        }
      }
      enc.binaries += static_cast<int>(ne.w.size());
      cur_m.push_back(ne.m_var);
      enc.neurons.push_back(std::move(ne));
    }
    prev_m = std::move(cur_m);
  }

  // Output range from the last layer's encoded ranges.
  double y_lo = net.out_bias, y_hi = net.out_bias;
  for (std::size_t l = 0; l < plans.back().size(); ++l) {
    const double w = net.out_weights(static_cast<Eigen::Index>(l));
    const auto& b = plans.back()[l].post;
    y_lo += w >= 0 ? w * b.lo : w * b.hi;
    y_hi += w >= 0 ? w * b.hi : w * b.lo;
  }
  const double y_pad = 1e-7 * (1.0 + std::abs(y_lo) + std::abs(y_hi));
  y_lo = std::clamp(y_lo - y_pad, -1.0, 1.0);
  y_hi = std::clamp(y_hi + y_pad, -1.0, 1.0);
  enc.y_var = model.add_variable("y_" + zt, -1.0, 1.0);
  std::vector<Term> out{{enc.y_var, 1.0}};
  for (std::size_t l = 0; l < prev_m.size(); ++l) out.push_back({prev_m[l], -net.out_weights(static_cast<Eigen::Index>(l))});
  model.add_constraint("out9_" + zt, std::move(out), Sense::eq, net.out_bias);

  const double half = (net.out_bounds.hi - net.out_bounds.lo) / 2.0;
  enc.t_range = {nn::denormalize(y_lo, net.out_bounds), nn::denormalize(y_hi, net.out_bounds)};
  enc.t_var = model.add_variable("T_" + zt, enc.t_range.lo, enc.t_range.hi);
  model.add_constraint("post11_" + zt, {{enc.t_var, 1.0}, {enc.y_var, -half}}, Sense::eq, half + net.out_bounds.lo);
  return enc;
}

int binary_count(const MilpModel& model) { return model.binary_count(); }

namespace {

double propagate(const nn::NetworkSpec& net, const std::vector<std::vector<double>>& eps) {
  std::vector<double> e;
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    const auto& layer = net.layers[k];
    std::vector<double> next(layer.bias.size());
    for (Eigen::Index j = 0; j < layer.bias.size(); ++j) {
      double in = 0.0;
      for (std::size_t i = 0; i < e.size(); ++i) in += std::abs(layer.weights(j, static_cast<Eigen::Index>(i))) * e[i];
      next[j] = lipschitz(layer.activation) * in + eps[k][j];
    }
    e = std::move(next);
  }
  double ey = 0.0;
  for (std::size_t l = 0; l < e.size(); ++l) ey += std::abs(net.out_weights(static_cast<Eigen::Index>(l))) * e[l];
  return ey * (net.out_bounds.hi - net.out_bounds.lo) / 2.0;
}

}  // namespace

double certified_error_bound(const nn::NetworkSpec& net, const EncodeOptions& o) {
  std::vector<std::vector<double>> eps;
  double sig = -1.0;
  for (const auto& layer : net.layers) {
    if (layer.activation == Activation::sigmoid && sig < 0.0)
      sig = build_pwl(Activation::sigmoid, o.sigmoid_blocks, o.sigmoid_r0, o.sigmoid_r_end).max_error;
    eps.emplace_back(layer.bias.size(), layer.activation == Activation::sigmoid ? sig : 0.0);
  }
  return propagate(net, eps);
}

double certified_error_bound(const nn::NetworkSpec& net, const BlockEncoding& block) {
  std::vector<std::vector<double>> eps;
  for (const auto& layer : net.layers) eps.emplace_back(layer.bias.size(), 0.0);
  for (const auto& ne : block.neurons) eps.at(ne.layer - 1).at(ne.neuron - 1) = ne.pwl.max_error;
  return propagate(net, eps);
}

}  // namespace hvacdr::ear
