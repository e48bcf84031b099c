#include <doctest.h>

#include <sstream>

#include "../support.hpp"
#include "relumip/net.hpp"

using namespace relumip;
using relumip::testing::abs_net;
using relumip::testing::random_net;

TEST_SUITE("net") {
  TEST_CASE("absolute value network") {
    const ReluNetwork net = abs_net();
    std::vector<double> x{0.5};
    CHECK(forward(net, x)[0] == 0.5);
    x = {-2.0};
    CHECK(forward(net, x)[0] == 2.0);
    Trace t = forward_trace(net, x);
    REQUIRE(t.size() == 3);
    CHECK(t[0] == std::vector<double>{-2.0});
    CHECK(t[1] == std::vector<double>{-2.0, 2.0});
    CHECK(t[2] == std::vector<double>{2.0});
    x = {0.0};
    CHECK(forward_trace(net, x)[1] == std::vector<double>{0.0, 0.0});
  }

  TEST_CASE("constant network") {
    std::vector<int> dims{2, 3, 1};
    ReluNetwork z = ReluNetwork::zeros(dims);
    auto layers = z.layers();
    layers.back().bias[0] = 3.0;
    ReluNetwork net(layers);
    for (double a : {-5.0, 0.0, 7.0}) {
      std::vector<double> x{a, -a};
      CHECK(forward(net, x)[0] == 3.0);
    }
  }

  TEST_CASE("dimension and value validation") {
    const ReluNetwork net = abs_net();
    std::vector<double> bad{1.0, 2.0};
    CHECK_THROWS_AS(forward(net, bad), std::invalid_argument);
    CHECK_THROWS_AS(ReluNetwork({DenseLayer{1, 2, {1.0}, {0.0, 0.0}}}), std::invalid_argument);
    CHECK_THROWS_AS(ReluNetwork({DenseLayer{1, 1, {NAN}, {0.0}}}), std::invalid_argument);
    CHECK_THROWS_AS(ReluNetwork({DenseLayer{1, 2, {1.0, 1.0}, {0.0, 0.0}}, DenseLayer{3, 1, {1, 1, 1}, {0.0}}}),
                    std::invalid_argument);
  }

  TEST_CASE("trace is consistent with forward") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      ReluNetwork net = random_net({3, 6, 5, 2}, seed);
      Rng rng(seed);
      std::vector<double> x = testing::uniform_point(Box(3, {-2.0, 2.0}), rng);
      Trace t = forward_trace(net, x);
      CHECK(t.back() == forward(net, x));
      for (int k = 1; k < net.depth(); ++k)
        for (double v : t[k]) {
          // x = max(0,t) and s = max(0,-t) are complementary and nonnegative.
          const double xv = std::max(0.0, v), sv = std::max(0.0, -v);
          CHECK(xv * sv == 0.0);
          CHECK(xv - sv == v);
        }
    }
  }

  TEST_CASE("piecewise linear on a fixed activation pattern") {
    ReluNetwork net = random_net({2, 8, 8, 1}, 11);
    Rng rng(3);
    int checked = 0;
    for (int trial = 0; trial < 200 && checked < 20; ++trial) {
      auto a = testing::uniform_point(Box(2, {-1.0, 1.0}), rng);
      std::vector<double> d = testing::uniform_point(Box(2, {-1e-3, 1e-3}), rng);
      std::vector<double> b{a[0] + d[0], a[1] + d[1]}, m{a[0] + 0.5 * d[0], a[1] + 0.5 * d[1]};
      auto pattern = [&](const std::vector<double>& x) {
        std::vector<bool> p;
        Trace t = forward_trace(net, x);
        for (int k = 1; k < net.depth(); ++k)
          for (double v : t[k]) p.push_back(v > 0.0);
        return p;
      };
      if (pattern(a) != pattern(b) || pattern(a) != pattern(m)) continue;
      ++checked;
      const double fa = forward(net, a)[0], fb = forward(net, b)[0], fm = forward(net, m)[0];
      CHECK(fm == doctest::Approx(0.5 * (fa + fb)).epsilon(1e-12));
    }
    CHECK(checked >= 10);
  }

  TEST_CASE("he initialization") {
    std::vector<int> dims{3, 20, 20, 10, 1};
    ReluNetwork a = he_initialize(dims, 7), b = he_initialize(dims, 7);
    CHECK(a == b);
    CHECK(save_network(a) == save_network(b));
    for (const auto& l : a.layers())
      for (double v : l.bias) CHECK(v == 0.0);
    CHECK_FALSE(he_initialize(dims, 8) == a);

    // Variance preservation through the ReLU layers.
    Rng rng(99);
    std::normal_distribution<double> n01(0.0, 1.0);
    double sum = 0.0, sq = 0.0;
    const int N = 10000;
    for (int s = 0; s < N; ++s) {
      std::vector<double> x{n01(rng), n01(rng), n01(rng)};
      double y = forward(a, x)[0];
      sum += y;
      sq += y * y;
    }
    const double var = sq / N - (sum / N) * (sum / N);
    CHECK(var >= 0.3);
    CHECK(var <= 3.0);
  }

  TEST_CASE("mape") {
    const ReluNetwork net = abs_net();
    LabeledDataset d{{{1.0}, {-2.0}}, {{1.0}, {2.0}}};
    CHECK(mape(net, d) == 0.0);
    LabeledDataset one{{{1.0}}, {{2.0}}};
    CHECK(mape(net, one) == doctest::Approx(50.0));
    LabeledDataset zero{{{1.0}, {0.5}}, {{0.0}, {1.0}}};
    CHECK_THROWS_AS(mape(net, zero), std::invalid_argument);
    CHECK(mape(net, zero, true) == doctest::Approx(50.0));
    CHECK_THROWS_AS(mape(net, LabeledDataset{}), std::invalid_argument);
  }

  TEST_CASE("serialization round trip") {
    const ReluNetwork net = abs_net();
    CHECK(load_network(save_network(net)) == net);
    ReluNetwork r = random_net({3, 7, 4, 2}, 5);
    CHECK(load_network(save_network(r)) == r);
    CHECK_THROWS_AS(load_network(R"({"layer_dims":[2,1],"layers":[{"W":[[1]],"b":[0]}]})"), std::invalid_argument);
    CHECK_THROWS_AS(load_network(R"({"layer_dims":[1,1],"layers":[{"W":[[NaN]],"b":[0]}]})"), std::invalid_argument);
    CHECK_THROWS_AS(load_network("not json"), std::invalid_argument);
  }

  TEST_CASE("csv datasets") {
    LabeledDataset d{{{1.0, 2.0}, {3.0, -4.5}}, {{0.25}, {1e-3}}};
    std::stringstream ss;
    save_dataset_csv(d, ss);
    LabeledDataset back = load_dataset_csv(ss, 2);
    CHECK(back.inputs == d.inputs);
    CHECK(back.targets == d.targets);
    std::stringstream bad("a,b\n1,2\n3\n");
    CHECK_THROWS(load_dataset_csv(bad, 1));
  }
}
