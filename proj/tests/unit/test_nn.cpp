// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include <cmath>

#include <Eigen/Dense>

#include "fixtures.hpp"
#include "hvacdr/error.hpp"
#include "hvacdr/nn/scg.hpp"
#include "hvacdr/nn/train.hpp"
#include "hvacdr/thermal/dataset.hpp"

using namespace hvacdr;
using namespace hvacdr::nn;

TEST_SUITE("nn") {
  TEST_CASE("normalization endpoints and inverse") {
    Bounds b{10.0, 30.0};
    CHECK(normalize(10.0, b).value == -1.0);
    CHECK(normalize(20.0, b).value == 0.0);
    CHECK(normalize(30.0, b).value == 1.0);
    CHECK(normalize(35.0, b).clamped);
    for (double x = 10.0; x <= 30.0; x += 0.37) CHECK(denormalize(normalize(x, b).value, b) == doctest::Approx(x));
  }

  TEST_CASE("zero network outputs the band midpoint") {
    auto net = fixtures::random_net(Activation::relu, {4}, 1);
    net.layers[0].weights.setZero();
    net.layers[0].bias.setZero();
    net.out_weights.setZero();
    net.out_bias = 0.0;
    std::vector<double> x(net.input_size(), 5.0);
    CHECK(forward(net, x) == doctest::Approx(0.5 * (net.out_bounds.lo + net.out_bounds.hi)));
  }

  TEST_CASE("inactive ReLU contributes nothing") {
    auto net = fixtures::random_net(Activation::relu, {2}, 2);
    net.layers[0].weights.row(1).setZero();
    net.layers[0].bias(1) = -1.0;
    std::vector<double> x(net.input_size(), 7.0);
    const double before = forward(net, x);
    net.out_weights(1) = 123.0;
    CHECK(forward(net, x) == before);
  }

  TEST_CASE("layout slots") {
    auto l = InputLayout::narx(2, 1, 3, 4);
    CHECK(l.size() == 1 + 2 + 3 + 3);
    CHECK(l.indices(InputRole::controllable).size() == 2);
    CHECK(l.indices(InputRole::feedback).size() == 3);
    CHECK(l.max_delay() == 3);
    CHECK(l.same_shape(InputLayout::narx(2, 1, 3, 2)));
    CHECK_FALSE(l.same_shape(InputLayout::narx(2, 2, 3, 2)));
    auto s = InputLayout::slamp(1, 0, 2, 1, {1, 2});
    CHECK(s.size() == 1 + 2 + 3 + 2 * 2 + 1);
    CHECK_THROWS_AS(InputLayout::slamp(5, 0, 0, 0, {1}), config_error);
    CHECK_THROWS_AS(InputLayout::narx(0, 1, 1, 1), config_error);
  }

  TEST_CASE("NMSE definition and degenerate target") {
    std::vector<double> y{1, 2, 3, 4}, p{1, 2, 3, 4};
    CHECK(nmse(y, p).value == 1.0);
    std::vector<double> q{2.5, 2.5, 2.5, 2.5};
    CHECK(nmse(y, q).value == doctest::Approx(0.0));
    std::vector<double> c{3, 3, 3, 3};
    CHECK_FALSE(nmse(c, p).defined);
  }

  TEST_CASE("network JSON reload is lossless") {
    auto net = fixtures::random_net(Activation::sigmoid, {5, 3}, 7);
    auto text = to_json(net);
    auto back = network_from_json(text);
    CHECK(to_json(back) == text);
    CHECK(content_hash(back) == content_hash(net));
    CHECK((back.layers[1].weights.array() == net.layers[1].weights.array()).all());
    std::vector<double> x(net.input_size(), 3.3);
    CHECK(forward(back, x) == forward(net, x));
    CHECK_THROWS_AS(network_from_json("{}"), error);
  }

  TEST_CASE("SCG minimizes a quadratic") {
    Eigen::MatrixXd A(2, 2);
    A << 3, 1, 1, 2;
    Eigen::VectorXd b(2);
    b << 1, -1;
    auto f = [&](const Eigen::VectorXd& w, Eigen::VectorXd& g) {
      g = A * w - b;
      return 0.5 * w.dot(A * w) - b.dot(w);
    };
    auto r = minimize_scg(f, Eigen::VectorXd::Zero(2));
    Eigen::VectorXd exact = A.ldlt().solve(b);
    CHECK((r.w - exact).norm() < 1e-5);
    auto bad = [](const Eigen::VectorXd&, Eigen::VectorXd& g) {
      g = Eigen::VectorXd::Ones(1);
      return std::nan("");
    };
    CHECK_THROWS_AS(minimize_scg(bad, Eigen::VectorXd::Zero(1)), training_diverged);
  }

  TEST_CASE("closed loop without feedback taps equals open loop") {
    auto net = fixtures::random_net(Activation::relu, {4}, 3, InputLayout::narx(2, 1, 0, 1));
    auto prior = fixtures::flat_day(0.04, 24.0), today = fixtures::flat_day(0.06, 29.0);
    Timeline tl(prior, today);
    for (int t = -23; t <= 24; ++t) tl.set_power(t, (t + 30) % 11);
    Timeline copy = tl;
    auto traj = rollout_closed_loop(net, copy);
    for (int t = 1; t <= 24; ++t) CHECK(traj[t - 1] == forward(net, tl.inputs(net.layout, t)));
    Timeline again = tl;
    CHECK(rollout_closed_loop(net, again) == traj);
  }

  TEST_CASE("short training run is deterministic") {
    auto m = thermal::BuildingModel::small_office();
    thermal::HvacModel h;
    auto data = thermal::generate_dataset(m, h, thermal::synthesize_scenarios(2, 10), thermal::default_bands(), 3);
    TrainOptions o;
    o.restarts = 1;
    o.scg.max_epochs = 60;
    Architecture arch{{4}, {Activation::relu}};
    auto a = train(data, InputLayout::narx(2, 1, 2, 1), arch, 5, o);
    auto b = train(data, InputLayout::narx(2, 1, 2, 1), arch, 5, o);
    CHECK(to_json(a.net) == to_json(b.net));
    CHECK(a.report.nmse_test == b.report.nmse_test);
    CHECK(train_day_count(10, 0.8) == 8);
  }
}
