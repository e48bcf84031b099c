#include <doctest.h>

#include "../support.hpp"
#include "relumip/trainer.hpp"

using namespace relumip;
using relumip::testing::random_net;

namespace {

LabeledDataset noise_data(int n_in, int n_out, int count, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  LabeledDataset d;
  for (int s = 0; s < count; ++s) {
    std::vector<double> x(n_in), y(n_out);
    for (double& v : x) v = u(rng);
    for (double& v : y) v = u(rng);
    d.inputs.push_back(x);
    d.targets.push_back(y);
  }
  return d;
}

ReluNetwork with_param(const ReluNetwork& net, std::size_t layer, bool bias, std::size_t idx, double delta) {
  auto layers = net.layers();
  (bias ? layers[layer].bias : layers[layer].weights)[idx] += delta;
  return ReluNetwork(std::move(layers));
}

double min_abs_preactivation(const ReluNetwork& net, const LabeledDataset& d) {
  double m = kInf;
  for (const auto& x : d.inputs) {
    Trace t = forward_trace(net, x);
    for (int k = 1; k < net.depth(); ++k)
      for (double v : t[k]) m = std::min(m, std::abs(v));
  }
  return m;
}

}  // namespace

TEST_SUITE("trainer") {
  TEST_CASE("loss examples") {
    std::vector<int> dims{1, 2, 1};
    LabeledDataset zeros{{{1.0}, {2.0}}, {{0.0}, {0.0}}};
    CHECK(loss(ReluNetwork::zeros(dims), zeros, 0.7) == 0.0);
    LabeledDataset one{{{1.0}}, {{1.0}}};
    CHECK(loss(ReluNetwork::zeros(dims), one, 0.0) == 1.0);
    // Single weight w = 2 fitting y = 2x exactly: only the regularizer remains.
    ReluNetwork lin({DenseLayer{1, 1, {2.0}, {0.0}}});
    LabeledDataset fit{{{1.5}}, {{3.0}}};
    CHECK(loss(lin, fit, 1.0) == 4.0);
    CHECK_THROWS_AS(loss(lin, LabeledDataset{}, 0.0), std::invalid_argument);
  }

  TEST_CASE("gradients match central differences away from kinks") {
    int tested = 0;
    for (std::uint64_t seed = 1; tested < 5 && seed < 50; ++seed) {
      ReluNetwork net = random_net({2, 5, 1}, seed);
      LabeledDataset d = noise_data(2, 1, 8, seed + 100);
      if (min_abs_preactivation(net, d) < 1e-3) continue;
      ++tested;
      const double lambda = 0.05, h = 1e-5;
      Gradient g = gradients(net, d, lambda);
      for (std::size_t k = 0; k < net.layers().size(); ++k) {
        for (int bias = 0; bias < 2; ++bias) {
          const auto& params = bias ? net.layers()[k].bias : net.layers()[k].weights;
          const auto& grad = bias ? g.bias[k] : g.weights[k];
          REQUIRE(grad.size() == params.size());
          for (std::size_t i = 0; i < params.size(); ++i) {
            const double fd = (loss(with_param(net, k, bias, i, h), d, lambda) -
                               loss(with_param(net, k, bias, i, -h), d, lambda)) / (2 * h);
            const double rel = std::abs(grad[i] - fd) / std::max({std::abs(grad[i]), std::abs(fd), 1e-4});
            CHECK(rel <= 1e-5);
          }
        }
      }
    }
    CHECK(tested == 5);
  }

  TEST_CASE("perfect fit has zero gradient and pure regularizer gradient is 2 lambda w") {
    ReluNetwork lin({DenseLayer{1, 1, {2.0}, {0.0}}});
    LabeledDataset fit{{{1.5}, {-1.0}}, {{3.0}, {-2.0}}};
    Gradient g0 = gradients(lin, fit, 0.0);
    CHECK(g0.weights[0][0] == 0.0);
    CHECK(g0.bias[0][0] == 0.0);
    Gradient g1 = gradients(lin, fit, 0.25);
    CHECK(g1.weights[0][0] == doctest::Approx(2 * 0.25 * 2.0));
  }

  TEST_CASE("sgd step is exactly theta - eta grad") {
    ReluNetwork net = random_net({2, 4, 1}, 3);
    LabeledDataset d = noise_data(2, 1, 5, 4);
    Gradient g = gradients(net, d, 0.01);
    const double eta = 0.125;
    ReluNetwork next = sgd_step(net, g, eta);
    for (std::size_t k = 0; k < net.layers().size(); ++k) {
      for (std::size_t i = 0; i < net.layers()[k].weights.size(); ++i)
        CHECK(next.layers()[k].weights[i] == net.layers()[k].weights[i] - eta * g.weights[k][i]);
      for (std::size_t i = 0; i < net.layers()[k].bias.size(); ++i)
        CHECK(next.layers()[k].bias[i] == net.layers()[k].bias[i] - eta * g.bias[k][i]);
    }
  }

  TEST_CASE("small steps do not increase the loss") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      ReluNetwork net = random_net({3, 6, 2}, seed);
      LabeledDataset d = noise_data(3, 2, 10, seed * 7);
      const double before = loss(net, d, 0.01);
      const double after = loss(sgd_step(net, gradients(net, d, 0.01), 1e-6), d, 0.01);
      CHECK(after <= before);
    }
  }

  TEST_CASE("fits a line") {
    LabeledDataset d;
    for (int i = 0; i <= 40; ++i) {
      const double x = -1.0 + i / 20.0;
      d.inputs.push_back({x});
      d.targets.push_back({2 * x + 1});
    }
    std::vector<int> dims{1, 4, 1};
    TrainConfig cfg;
    cfg.epochs = 200;
    cfg.batch_size = 8;
    cfg.learning_rate = 0.05;
    cfg.seed = 1;
    ReluNetwork net = sgd_train(he_initialize(dims, 2), d, cfg);
    CHECK(loss(net, d, 0.0) <= 1e-3);
    CHECK(sgd_train(he_initialize(dims, 2), d, cfg) == net);
  }

  TEST_CASE("best epoch is never worse than the initial parameters") {
    LabeledDataset d = noise_data(2, 1, 30, 9);
    std::vector<int> dims{2, 6, 1};
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.learning_rate = 10.0;  // diverges
    cfg.standardize = false;
    ReluNetwork init = he_initialize(dims, 1);
    ReluNetwork out = sgd_train(init, d, cfg);
    CHECK(loss(out, d, 0.0) <= loss(init, d, 0.0));
  }

  TEST_CASE("config validation") {
    TrainConfig c;
    c.learning_rate = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = {};
    c.batch_size = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = {};
    c.l2_lambda = -1.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    LabeledDataset d = noise_data(3, 1, 4, 1);
    std::vector<int> dims{2, 3, 1};
    CHECK_THROWS_AS(sgd_train(he_initialize(dims, 1), d, TrainConfig{}), std::invalid_argument);
  }
}
