#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "otlpp/mlp.hpp"

using namespace otlpp;

namespace {

double loss(const MLP& net, const std::vector<double>& x, std::size_t a, double y) {
  double q = forward(net, x)[a];
  return (y - q) * (y - q);
}

}  // namespace

TEST(Init, WeightsWithinFanInBound) {
  MLP net = init_mlp({12, 64, 64, 11}, 3);
  const double bound12 = 0.28868;
  for (double w : net.layers[0].w) EXPECT_LE(std::abs(w), bound12);
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    double bound = 1.0 / std::sqrt(static_cast<double>(net.layers[k].in));
    for (double w : net.layers[k].w) EXPECT_LE(std::abs(w), bound);
    for (double b : net.layers[k].b) EXPECT_EQ(b, 0.0);
    EXPECT_EQ(net.layers[k].w.size(), net.dims[k] * net.dims[k + 1]);
  }
}

TEST(Init, FanInOneSpansUnitInterval) {
  MLP net = init_mlp({1, 500}, 9);
  double lo = 0, hi = 0;
  for (double w : net.layers[0].w) {
    EXPECT_LE(std::abs(w), 1.0);
    lo = std::min(lo, w);
    hi = std::max(hi, w);
  }
  EXPECT_LT(lo, -0.9);
  EXPECT_GT(hi, 0.9);
}

TEST(Init, Deterministic) {
  EXPECT_EQ(init_mlp({12, 8, 11}, 5), init_mlp({12, 8, 11}, 5));
  EXPECT_NE(init_mlp({12, 8, 11}, 5), init_mlp({12, 8, 11}, 6));
}

TEST(Init, RejectsBadDims) {
  EXPECT_THROW(init_mlp(std::initializer_list<std::size_t>{}, 1), ConfigError);
  EXPECT_THROW(init_mlp({12}, 1), ConfigError);
  EXPECT_THROW(init_mlp({12, 0, 11}, 1), ConfigError);
}

TEST(Forward, ZeroNetGivesZeros) {
  MLP net = init_mlp({12, 5, 11}, 1);
  for (auto& l : net.layers) {
    std::fill(l.w.begin(), l.w.end(), 0.0);
    std::fill(l.b.begin(), l.b.end(), 0.0);
  }
  std::vector<double> x(12, 0.7);
  auto q = forward(net, x);
  ASSERT_EQ(q.size(), 11u);
  for (double v : q) EXPECT_EQ(v, 0.0);
}

TEST(Forward, HandComputedOneTwoOne) {
  MLP net = init_mlp({1, 2, 1}, 1);
  net.layers[0].w = {1.0, -1.0};
  net.layers[0].b = {0.0, 0.5};
  net.layers[1].w = {2.0, 3.0};
  net.layers[1].b = {0.1};
  // h = relu(0.3), relu(0.2) -> 2*0.3 + 3*0.2 + 0.1
  EXPECT_NEAR(forward(net, std::vector<double>{0.3})[0], 1.3, 1e-15);
  // h = relu(-1) = 0, relu(1.5) -> 3*1.5 + 0.1
  EXPECT_NEAR(forward(net, std::vector<double>{-1.0})[0], 4.6, 1e-15);
}

TEST(Forward, DimensionMismatchIsUsageError) {
  MLP net = init_mlp({12, 4, 11}, 1);
  EXPECT_THROW(forward(net, std::vector<double>(5, 0.0)), UsageError);
}

TEST(Backward, ZeroErrorGivesZeroGradient) {
  MLP net = init_mlp({12, 16, 11}, 2);
  std::vector<double> x(12, 0.3);
  double q = forward(net, x)[4];
  Gradient g = backward(net, x, 4, q);
  for (const auto& v : g.w)
    for (double e : v) EXPECT_EQ(e, 0.0);
  for (const auto& v : g.b)
    for (double e : v) EXPECT_EQ(e, 0.0);
}

TEST(Backward, OnlySelectedOutputRowIsNonZero) {
  MLP net = init_mlp({12, 16, 11}, 2);
  std::vector<double> x(12, 0.3);
  Gradient g = backward(net, x, 6, 5.0);
  const auto& last = g.w.back();
  for (std::size_t o = 0; o < 11; ++o) {
    if (o == 6) continue;
    for (std::size_t i = 0; i < 16; ++i) EXPECT_EQ(last[o * 16 + i], 0.0);
    EXPECT_EQ(g.b.back()[o], 0.0);
  }
  EXPECT_NE(g.b.back()[6], 0.0);
}

TEST(Backward, MatchesCentralDifferencesOnTwentyNets) {
  Rng rng(77);
  std::uniform_int_distribution<std::size_t> width(3, 10), depth(1, 3), act(0, 10);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int n = 0; n < 20; ++n) {
    std::vector<std::size_t> dims{12};
    for (std::size_t d = depth(rng); d > 0; --d) dims.push_back(width(rng));
    dims.push_back(11);
    MLP net = init_mlp(std::span<const std::size_t>(dims), rng());
    for (auto& l : net.layers)
      for (double& b : l.b) b = 0.1 * u(rng);
    std::vector<double> x(12);
    for (double& v : x) v = u(rng);
    std::size_t a = act(rng);
    double y = 3.0 * u(rng);
    Gradient g = backward(net, x, a, y);
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
      auto check = [&](std::vector<double>& params, const std::vector<double>& grads) {
        for (std::size_t i = 0; i < params.size(); ++i) {
          double numeric = oracle::central_difference([&] { return loss(net, x, a, y); }, params[i], 1e-5);
          double analytic = grads[i];
          double denom = std::max(std::abs(analytic) + std::abs(numeric), 1e-7);
          worst = std::max(worst, std::abs(analytic - numeric) / denom);
        }
      };
      check(net.layers[k].w, g.w[k]);
      check(net.layers[k].b, g.b[k]);
    }
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(Adam, ZeroGradientLeavesParameters) {
  MLP net = init_mlp({12, 8, 11}, 4);
  MLP before = net;
  AdamState s = AdamState::for_net(net);
  adam_step(net, s, Gradient::zeros_like(net));
  EXPECT_EQ(net, before);
}

TEST(Adam, FirstStepIsLearningRate) {
  MLP net = init_mlp({1, 1}, 1);
  net.layers[0].w = {0.0};
  AdamState s = AdamState::for_net(net, 0.1);
  Gradient g = Gradient::zeros_like(net);
  g.w[0][0] = 1.0;
  adam_step(net, s, g);
  // m_hat = 1, v_hat = 1 -> -alpha * 1 / (1 + eps)
  EXPECT_NEAR(net.layers[0].w[0], -0.1, 1e-8);
  EXPECT_EQ(s.t, 1u);
}

TEST(Adam, ConvergesOnQuadratic) {
  // Q(x=0) = b, so (3 - Q)^2 is f(w) = (w - 3)^2 in the bias.
  MLP net = init_mlp({1, 1}, 1);
  net.layers[0].b = {0.0};
  AdamState s = AdamState::for_net(net, 0.1);
  std::vector<double> x{0.0};
  for (int i = 0; i < 100; ++i) adam_step(net, s, backward(net, x, 0, 3.0));
  EXPECT_LT(std::abs(net.layers[0].b[0] - 3.0), 0.5);
}

TEST(Adam, NonFiniteGradientRejectedWithoutChanges) {
  MLP net = init_mlp({12, 8, 11}, 4);
  MLP before = net;
  AdamState s = AdamState::for_net(net);
  Gradient g = Gradient::zeros_like(net);
  g.w[1][3] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(adam_step(net, s, g), NumericalError);
  EXPECT_EQ(net, before);
  EXPECT_EQ(s.t, 0u);
  g.w[1][3] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(adam_step(net, s, g), NumericalError);
}

TEST(Adam, FrozenLayersUntouched) {
  MLP net = init_mlp({12, 8, 11}, 4);
  MLP before = net;
  AdamState s = AdamState::for_net(net, 0.01);
  std::vector<double> x(12, 0.5);
  adam_step(net, s, backward(net, x, 2, 10.0), {true, false});
  EXPECT_EQ(net.layers[0], before.layers[0]);
  EXPECT_NE(net.layers[1], before.layers[1]);
}

TEST(Snapshot, RoundTripIsBitExact) {
  MLP net = init_mlp({12, 64, 64, 11}, 13);
  for (auto& l : net.layers)
    for (double& b : l.b) b = 1.0 / 3.0;
  std::stringstream ss;
  write_qnet(ss, net);
  MLP back = read_qnet(ss);
  EXPECT_EQ(back, net);
  Rng rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> x(12);
    for (double& v : x) v = u(rng);
    EXPECT_EQ(forward(back, x), forward(net, x));
  }
}

TEST(Snapshot, MalformedFileReportsLine) {
  std::stringstream ss("QNETv1\n2 1\n0.5 abc\n0\n");
  try {
    read_qnet(ss);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  std::stringstream bad_header("QNETv2\n");
  EXPECT_THROW(read_qnet(bad_header), ParseError);
}
