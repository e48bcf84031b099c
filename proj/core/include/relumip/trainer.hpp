#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "relumip/net.hpp"

namespace relumip {

struct TrainConfig {
  int epochs = 200;
  int batch_size = 16;
  double learning_rate = 0.01;
  double l2_lambda = 0.0;
  std::uint64_t seed = 0;
  bool standardize = true;

  void validate() const;
};

/// Gradient of the loss w.r.t. every weight and bias, laid out like the network.
struct Gradient {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> bias;
};

/// (1/N) sum ||y - f(x)||^2 + lambda ||theta||^2 over the given sample indices
/// (all samples when `indices` is empty).
double loss(const ReluNetwork& net, const LabeledDataset& batch, double l2_lambda,
            std::span<const std::size_t> indices = {});

Gradient gradients(const ReluNetwork& net, const LabeledDataset& batch, double l2_lambda,
                   std::span<const std::size_t> indices = {});

/// theta <- theta - eta * grad.
ReluNetwork sgd_step(const ReluNetwork& net, const Gradient& grad, double learning_rate);

/// Minibatch SGD from the parameters of `init`.
///
/// With `standardize` set, training runs on standardized inputs and targets and
/// `init` is interpreted as a network in that standardized space; the returned
/// network always maps raw units. The result is the parameter set with the lowest
/// full-dataset loss observed at any epoch end (including before the first epoch).
ReluNetwork sgd_train(const ReluNetwork& init, const LabeledDataset& data, const TrainConfig& config);

}  // namespace relumip
