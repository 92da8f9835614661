// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include <cmath>

#include "fixtures.hpp"
#include "hvacdr/ear/encoder.hpp"
#include "hvacdr/error.hpp"
#include "hvacdr/milp/bnb.hpp"

using namespace hvacdr;
using namespace hvacdr::ear;

namespace {

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

std::vector<InputSource> constants(const nn::NetworkSpec& net, double v) {
  return std::vector<InputSource>(net.input_size(), InputSource::constant(v));
}

}  // namespace

TEST_SUITE("ear") {
  TEST_CASE("ReLU spec is exact") {
    auto p = build_pwl(nn::Activation::relu, 2, -3.0, 4.0);
    CHECK(p.blocks() == 2);
    for (double v = -5.0; v <= 6.0; v += 0.01) CHECK(p.eval(v) == doctest::Approx(std::max(0.0, std::min(v, 4.0))));
    CHECK(p.max_error == 0.0);
    CHECK_THROWS_AS(build_pwl(nn::Activation::relu, 3, -3.0, 4.0), config_error);
  }

  TEST_CASE("sigmoid chords interpolate at breakpoints") {
    auto p = build_pwl(nn::Activation::sigmoid, 5, -8.0, 8.0);
    REQUIRE(p.blocks() == 5);
    for (double r : p.breakpoints) CHECK(p.eval(r) == doctest::Approx(sigmoid(r)).epsilon(1e-12));
    CHECK(p.max_error > 0.0);
    CHECK(scan_error(p) <= p.max_error + 1e-12);
    auto q = build_pwl(nn::Activation::sigmoid, 10, -8.0, 8.0);
    CHECK(q.max_error < p.max_error);
  }

  TEST_CASE("clipping keeps values inside the interval") {
    auto p = build_pwl(nn::Activation::sigmoid, 5, -8.0, 8.0);
    auto c = clip_pwl(p, -1.0, 2.5);
    CHECK(c.r0() == -1.0);
    CHECK(c.r_end() == 2.5);
    CHECK(c.blocks() <= p.blocks());
    for (double v = -1.0; v <= 2.5; v += 0.05) CHECK(c.eval(v) == doctest::Approx(p.eval(v)).epsilon(1e-12));
  }

  TEST_CASE("binary counts per block") {
    EncodeOptions o;
    o.clip_blocks = false;
    auto relu = fixtures::random_net(nn::Activation::relu, {5}, 1);
    milp::MilpModel m1;
    std::vector<InputSource> src;
    for (int i = 0; i < relu.input_size(); ++i) src.push_back(InputSource::column(m1.add_variable("x" + std::to_string(i), 0, 1)));
    CHECK(encode_network(m1, relu, 1, 1, src, o).binaries == 5);
    CHECK(binary_count(m1) == 5);
    auto sig = fixtures::random_net(nn::Activation::sigmoid, {5}, 2);
    milp::MilpModel m2;
    src.clear();
    for (int i = 0; i < sig.input_size(); ++i) src.push_back(InputSource::column(m2.add_variable("x" + std::to_string(i), 0, 1)));
    CHECK(encode_network(m2, sig, 1, 1, src, o).binaries == 20);
  }

  TEST_CASE("ReLU off branch forces zero") {
    auto net = fixtures::random_net(nn::Activation::relu, {1}, 3);
    net.layers[0].weights.setConstant(0.1);
    net.layers[0].bias(0) = -5.0;
    milp::MilpModel m;
    EncodeOptions o;
    o.clip_blocks = false;
    auto src = constants(net, 10.0);
    auto enc = encode_network(m, net, 1, 1, src, o);
    auto r = milp::solve_mip(m);
    REQUIRE(r.has_solution());
    CHECK(r.x[enc.neurons[0].m_var] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(r.x[enc.t_var] == doctest::Approx(nn::forward(net, std::vector<double>(net.input_size(), 10.0))).epsilon(1e-9));
  }

  TEST_CASE("interval bounds contain sampled pre-activations") {
    auto net = fixtures::random_net(nn::Activation::relu, {6, 4}, 4);
    std::vector<nn::Bounds> box(net.input_size(), {-1.0, 1.0});
    auto iv = interval_bounds(net, box);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int k = 0; k < 200; ++k) {
      Eigen::VectorXd h(net.input_size());
      for (int i = 0; i < h.size(); ++i) h(i) = U(rng);
      for (std::size_t l = 0; l < net.layers.size(); ++l) {
        Eigen::VectorXd pre = net.layers[l].weights * h + net.layers[l].bias;
        for (int n = 0; n < pre.size(); ++n) {
          CHECK(pre(n) >= iv[l][n].lo - 1e-9);
          CHECK(pre(n) <= iv[l][n].hi + 1e-9);
        }
        h = pre.cwiseMax(0.0);
      }
    }
  }

  TEST_CASE("certified bound covers sigmoid encodings") {
    auto net = fixtures::random_net(nn::Activation::sigmoid, {4}, 5);
    const double bound = certified_error_bound(net);
    CHECK(bound > 0.0);
    for (double v : {0.0, 7.0, 21.0, 33.0}) {
      milp::MilpModel m;
      auto src = constants(net, v);
      auto enc = encode_network(m, net, 1, 1, src);
      auto r = milp::solve_mip(m, milp::BnbConfig{.rel_gap = 0.0});
      REQUIRE(r.has_solution());
      CHECK(std::abs(r.x[enc.t_var] - nn::forward(net, std::vector<double>(net.input_size(), v))) <= bound + 1e-9);
    }
  }
}
