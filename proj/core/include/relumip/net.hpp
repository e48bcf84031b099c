#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace relumip {

/// Dense affine layer. Row i of the weight matrix holds the weights into node i.
struct DenseLayer {
  int inputs = 0;
  int outputs = 0;
  std::vector<double> weights;  // row-major, outputs x inputs
  std::vector<double> bias;     // outputs

  double weight(int row, int col) const { return weights[static_cast<std::size_t>(row) * inputs + col]; }
  double& weight(int row, int col) { return weights[static_cast<std::size_t>(row) * inputs + col]; }
  std::span<const double> row(int r) const {
    return {weights.data() + static_cast<std::size_t>(r) * inputs, static_cast<std::size_t>(inputs)};
  }
  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Fully connected network with ReLU hidden layers and an affine output layer.
///
/// Layer 0 is the input layer; layer K (= depth()) is the output layer. The
/// parameters of layer k (k = 1..K) map x^{k-1} to the pre-activation of
/// layer k. Instances are immutable once constructed.
class ReluNetwork {
 public:
  ReluNetwork() = default;

  /// Validates dimensions and finiteness; throws std::invalid_argument.
  explicit ReluNetwork(std::vector<DenseLayer> layers);

  /// Network with all parameters zero.
  static ReluNetwork zeros(std::span<const int> layer_dims);

  int depth() const { return static_cast<int>(layers_.size()); }
  int input_size() const { return layers_.front().inputs; }
  int output_size() const { return layers_.back().outputs; }
  int layer_size(int k) const { return k == 0 ? layers_.front().inputs : layers_[k - 1].outputs; }
  std::vector<int> layer_dims() const;
  int hidden_node_count() const;

  /// Parameters mapping layer k-1 into layer k, for k = 1..depth().
  const DenseLayer& layer(int k) const { return layers_[k - 1]; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  std::size_t parameter_count() const;

  friend bool operator==(const ReluNetwork&, const ReluNetwork&) = default;

 private:
  std::vector<DenseLayer> layers_;
};

/// Inputs and targets of a regression sample set.
struct LabeledDataset {
  std::vector<std::vector<double>> inputs;
  std::vector<std::vector<double>> targets;

  std::size_t size() const { return inputs.size(); }
  bool empty() const { return inputs.empty(); }
  void validate() const;
};

/// Per-layer pre-activation values t^k of one forward pass.
///
/// t^0 is the input, t^k (0 < k < K) is W^k x^{k-1} + b^k before the ReLU,
/// and t^K is the network output.
using Trace = std::vector<std::vector<double>>;

std::vector<double> forward(const ReluNetwork& net, std::span<const double> x0);
Trace forward_trace(const ReluNetwork& net, std::span<const double> x0);

/// He initialization: weights ~ N(0, 2/n_{k-1}), zero biases.
ReluNetwork he_initialize(std::span<const int> layer_dims, std::uint64_t seed);

/// Mean absolute percentage error over all samples and outputs.
///
/// Targets equal to zero make the metric undefined: they are skipped when
/// `skip_zero_targets` is set and rejected otherwise.
double mape(const ReluNetwork& net, const LabeledDataset& data, bool skip_zero_targets = false);

std::string save_network(const ReluNetwork& net);
ReluNetwork load_network(const std::string& text);
void save_network_file(const ReluNetwork& net, const std::string& path);
ReluNetwork load_network_file(const std::string& path);

/// CSV with a header row; the first `input_columns` columns are inputs.
LabeledDataset load_dataset_csv(std::istream& in, int input_columns);
LabeledDataset load_dataset_csv_file(const std::string& path, int input_columns);
void save_dataset_csv(const LabeledDataset& data, std::ostream& out);

}  // namespace relumip
