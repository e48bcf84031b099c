#include "relumip/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "relumip/random.hpp"

namespace relumip {

void TrainConfig::validate() const {
  if (epochs < 0) throw std::invalid_argument("epochs must be nonnegative");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be at least 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
  if (!(l2_lambda >= 0.0)) throw std::invalid_argument("l2_lambda must be nonnegative");
}

namespace {

void check_data(const ReluNetwork& net, const LabeledDataset& data, std::span<const std::size_t> idx) {
  if (data.empty()) throw std::invalid_argument("empty batch");
  if (data.inputs.size() != data.targets.size()) throw std::invalid_argument("dataset: inputs and targets differ in length");
  if (static_cast<int>(data.inputs[0].size()) != net.input_size() ||
      static_cast<int>(data.targets[0].size()) != net.output_size())
    throw std::invalid_argument("dataset dimensions do not match network");
  for (std::size_t i : idx)
    if (i >= data.size()) throw std::invalid_argument("batch index out of range");
}

std::vector<std::size_t> all_indices(const LabeledDataset& data) {
  std::vector<std::size_t> v(data.size());
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

double squared_norm(const ReluNetwork& net) {
  double s = 0.0;
  for (const auto& l : net.layers()) {
    for (double w : l.weights) s += w * w;
    for (double b : l.bias) s += b * b;
  }
  return s;
}

}  // namespace

double loss(const ReluNetwork& net, const LabeledDataset& batch, double l2_lambda, std::span<const std::size_t> indices) {
  check_data(net, batch, indices);
  std::vector<std::size_t> owned;
  if (indices.empty()) {
    owned = all_indices(batch);
    indices = owned;
  }
  double err = 0.0;
  for (std::size_t i : indices) {
    auto y = forward(net, batch.inputs[i]);
    for (std::size_t o = 0; o < y.size(); ++o) {
      double d = batch.targets[i][o] - y[o];
      err += d * d;
    }
  }
  return err / static_cast<double>(indices.size()) + l2_lambda * squared_norm(net);
}

Gradient gradients(const ReluNetwork& net, const LabeledDataset& batch, double l2_lambda,
                   std::span<const std::size_t> indices) {
  check_data(net, batch, indices);
  std::vector<std::size_t> owned;
  if (indices.empty()) {
    owned = all_indices(batch);
    indices = owned;
  }
  const int K = net.depth();
  Gradient g;
  for (const auto& l : net.layers()) {
    g.weights.emplace_back(l.weights.size(), 0.0);
    g.bias.emplace_back(l.bias.size(), 0.0);
  }
  const double scale = 2.0 / static_cast<double>(indices.size());
  std::vector<double> delta, prev_delta;
  for (std::size_t i : indices) {
    Trace t = forward_trace(net, batch.inputs[i]);
    // delta holds dLoss/dt^k for the current layer k
    delta.resize(net.output_size());
    for (int o = 0; o < net.output_size(); ++o) delta[o] = scale * (t[K][o] - batch.targets[i][o]);
    for (int k = K; k >= 1; --k) {
      const DenseLayer& l = net.layer(k);
      const auto& pre_prev = t[k - 1];
      auto act = [&](int c) { return k - 1 == 0 ? pre_prev[c] : std::max(pre_prev[c], 0.0); };
      auto& gw = g.weights[k - 1];
      auto& gb = g.bias[k - 1];
      for (int r = 0; r < l.outputs; ++r) {
        gb[r] += delta[r];
        double* row = gw.data() + static_cast<std::size_t>(r) * l.inputs;
        for (int c = 0; c < l.inputs; ++c) row[c] += delta[r] * act(c);
      }
      if (k == 1) break;
      prev_delta.assign(l.inputs, 0.0);
      for (int r = 0; r < l.outputs; ++r)
        for (int c = 0; c < l.inputs; ++c) prev_delta[c] += l.weight(r, c) * delta[r];
      for (int c = 0; c < l.inputs; ++c)
        if (!(pre_prev[c] > 0.0)) prev_delta[c] = 0.0;
      delta.swap(prev_delta);
    }
  }
  if (l2_lambda != 0.0) {
    for (int k = 1; k <= K; ++k) {
      const auto& l = net.layer(k);
      for (std::size_t p = 0; p < l.weights.size(); ++p) g.weights[k - 1][p] += 2.0 * l2_lambda * l.weights[p];
      for (std::size_t p = 0; p < l.bias.size(); ++p) g.bias[k - 1][p] += 2.0 * l2_lambda * l.bias[p];
    }
  }
  return g;
}

ReluNetwork sgd_step(const ReluNetwork& net, const Gradient& grad, double learning_rate) {
  std::vector<DenseLayer> layers = net.layers();
  if (grad.weights.size() != layers.size() || grad.bias.size() != layers.size())
    throw std::invalid_argument("gradient shape does not match network");
  for (std::size_t k = 0; k < layers.size(); ++k) {
    if (grad.weights[k].size() != layers[k].weights.size() || grad.bias[k].size() != layers[k].bias.size())
      throw std::invalid_argument("gradient shape does not match network");
    for (std::size_t p = 0; p < layers[k].weights.size(); ++p) layers[k].weights[p] -= learning_rate * grad.weights[k][p];
    for (std::size_t p = 0; p < layers[k].bias.size(); ++p) layers[k].bias[p] -= learning_rate * grad.bias[k][p];
  }
  return ReluNetwork(std::move(layers));
}

namespace {

struct Scaling {
  std::vector<double> mean, stdev;
};

Scaling column_scaling(const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size(), d = rows[0].size();
  Scaling s{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  for (const auto& r : rows)
    for (std::size_t c = 0; c < d; ++c) s.mean[c] += r[c];
  for (double& m : s.mean) m /= static_cast<double>(n);
  for (const auto& r : rows)
    for (std::size_t c = 0; c < d; ++c) s.stdev[c] += (r[c] - s.mean[c]) * (r[c] - s.mean[c]);
  for (double& v : s.stdev) {
    v = std::sqrt(v / static_cast<double>(n));
    if (!(v > 1e-12)) v = 1.0;
  }
  return s;
}

std::vector<std::vector<double>> apply_scaling(const std::vector<std::vector<double>>& rows, const Scaling& s) {
  auto out = rows;
  for (auto& r : out)
    for (std::size_t c = 0; c < r.size(); ++c) r[c] = (r[c] - s.mean[c]) / s.stdev[c];
  return out;
}

// Folds x' = (x - mx)/sx into layer 1 and y = sy*y' + my into layer K.
ReluNetwork unscale(const ReluNetwork& net, const Scaling& in, const Scaling& out) {
  std::vector<DenseLayer> layers = net.layers();
  DenseLayer& first = layers.front();
  for (int r = 0; r < first.outputs; ++r) {
    for (int c = 0; c < first.inputs; ++c) {
      double w = first.weight(r, c) / in.stdev[c];
      first.weight(r, c) = w;
      first.bias[r] -= w * in.mean[c];
    }
  }
  DenseLayer& last = layers.back();
  for (int r = 0; r < last.outputs; ++r) {
    for (int c = 0; c < last.inputs; ++c) last.weight(r, c) *= out.stdev[r];
    last.bias[r] = last.bias[r] * out.stdev[r] + out.mean[r];
  }
  return ReluNetwork(std::move(layers));
}

}  // namespace

ReluNetwork sgd_train(const ReluNetwork& init, const LabeledDataset& data, const TrainConfig& config) {
  config.validate();
  data.validate();
  check_data(init, data, {});

  LabeledDataset work = data;
  Scaling in_s, out_s;
  if (config.standardize) {
    in_s = column_scaling(data.inputs);
    out_s = column_scaling(data.targets);
    work.inputs = apply_scaling(data.inputs, in_s);
    work.targets = apply_scaling(data.targets, out_s);
  }

  Rng rng(derive_seed(config.seed, "shuffle"));
  std::vector<std::size_t> order = all_indices(work);
  ReluNetwork net = init;
  ReluNetwork best = init;
  double best_loss = loss(init, work, config.l2_lambda);
  const std::size_t bs = static_cast<std::size_t>(config.batch_size);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += bs) {
      std::size_t stop = std::min(order.size(), start + bs);
      std::span<const std::size_t> batch(order.data() + start, stop - start);
      try {
        net = sgd_step(net, gradients(net, work, config.l2_lambda, batch), config.learning_rate);
      } catch (const std::invalid_argument&) {
        return config.standardize ? unscale(best, in_s, out_s) : best;  // diverged to non-finite parameters
      }
    }
    double l = loss(net, work, config.l2_lambda);
    if (!std::isfinite(l)) break;
    if (l < best_loss) {
      best_loss = l;
      best = net;
    }
  }
  return config.standardize ? unscale(best, in_s, out_s) : best;
}

}  // namespace relumip
