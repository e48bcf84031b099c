#include "relumip/net.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "relumip/random.hpp"

namespace relumip {

namespace {

bool all_finite(std::span<const double> v) {
  for (double d : v)
    if (!std::isfinite(d)) return false;
  return true;
}

void check_input(const ReluNetwork& net, std::span<const double> x0) {
  if (net.depth() == 0) throw std::invalid_argument("forward: empty network");
  if (static_cast<int>(x0.size()) != net.input_size())
    throw std::invalid_argument("forward: input has " + std::to_string(x0.size()) + " entries, network expects " +
                                std::to_string(net.input_size()));
}

void affine(const DenseLayer& layer, std::span<const double> in, std::vector<double>& out) {
  out.assign(layer.bias.begin(), layer.bias.end());
  for (int r = 0; r < layer.outputs; ++r) {
    const double* w = layer.weights.data() + static_cast<std::size_t>(r) * layer.inputs;
    double acc = out[r];
    for (int c = 0; c < layer.inputs; ++c) acc += w[c] * in[c];
    out[r] = acc;
  }
}

}  // namespace

ReluNetwork::ReluNetwork(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw std::invalid_argument("network needs at least one layer");
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const auto& l = layers_[k];
    if (l.inputs < 1 || l.outputs < 1) throw std::invalid_argument("layer " + std::to_string(k + 1) + " has no nodes");
    if (k > 0 && l.inputs != layers_[k - 1].outputs)
      throw std::invalid_argument("layer " + std::to_string(k + 1) + " input size does not match previous layer");
    if (l.weights.size() != static_cast<std::size_t>(l.inputs) * l.outputs || l.bias.size() != static_cast<std::size_t>(l.outputs))
      throw std::invalid_argument("layer " + std::to_string(k + 1) + " parameter shape mismatch");
    if (!all_finite(l.weights) || !all_finite(l.bias))
      throw std::invalid_argument("layer " + std::to_string(k + 1) + " has non-finite parameters");
  }
}

ReluNetwork ReluNetwork::zeros(std::span<const int> layer_dims) {
  if (layer_dims.size() < 2) throw std::invalid_argument("layer_dims needs at least two entries");
  std::vector<DenseLayer> layers;
  for (std::size_t k = 1; k < layer_dims.size(); ++k) {
    DenseLayer l;
    l.inputs = layer_dims[k - 1];
    l.outputs = layer_dims[k];
    if (l.inputs < 1 || l.outputs < 1) throw std::invalid_argument("layer sizes must be positive");
    l.weights.assign(static_cast<std::size_t>(l.inputs) * l.outputs, 0.0);
    l.bias.assign(l.outputs, 0.0);
    layers.push_back(std::move(l));
  }
  return ReluNetwork(std::move(layers));
}

std::vector<int> ReluNetwork::layer_dims() const {
  std::vector<int> dims{input_size()};
  for (const auto& l : layers_) dims.push_back(l.outputs);
  return dims;
}

int ReluNetwork::hidden_node_count() const {
  int n = 0;
  for (int k = 1; k < depth(); ++k) n += layer_size(k);
  return n;
}

std::size_t ReluNetwork::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weights.size() + l.bias.size();
  return n;
}

void LabeledDataset::validate() const {
  if (inputs.size() != targets.size()) throw std::invalid_argument("dataset: inputs and targets differ in length");
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].size() != inputs[0].size() || targets[i].size() != targets[0].size())
      throw std::invalid_argument("dataset: ragged row " + std::to_string(i));
    if (!all_finite(inputs[i]) || !all_finite(targets[i]))
      throw std::invalid_argument("dataset: non-finite entry in row " + std::to_string(i));
  }
}

std::vector<double> forward(const ReluNetwork& net, std::span<const double> x0) {
  check_input(net, x0);
  std::vector<double> cur(x0.begin(), x0.end()), next;
  for (int k = 1; k <= net.depth(); ++k) {
    affine(net.layer(k), cur, next);
    if (k < net.depth())
      for (double& v : next) v = v > 0.0 ? v : 0.0;
    cur.swap(next);
  }
  return cur;
}

Trace forward_trace(const ReluNetwork& net, std::span<const double> x0) {
  check_input(net, x0);
  Trace t;
  t.reserve(net.depth() + 1);
  t.emplace_back(x0.begin(), x0.end());
  std::vector<double> post(x0.begin(), x0.end()), pre;
  for (int k = 1; k <= net.depth(); ++k) {
    affine(net.layer(k), post, pre);
    t.push_back(pre);
    post = pre;
    if (k < net.depth())
      for (double& v : post) v = v > 0.0 ? v : 0.0;
  }
  return t;
}

ReluNetwork he_initialize(std::span<const int> layer_dims, std::uint64_t seed) {
  ReluNetwork shape = ReluNetwork::zeros(layer_dims);
  Rng rng(seed);
  std::vector<DenseLayer> layers = shape.layers();
  for (auto& l : layers) {
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / l.inputs));
    for (double& w : l.weights) w = dist(rng);
  }
  return ReluNetwork(std::move(layers));
}

double mape(const ReluNetwork& net, const LabeledDataset& data, bool skip_zero_targets) {
  if (data.empty()) throw std::invalid_argument("mape: empty dataset");
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto pred = forward(net, data.inputs[i]);
    if (pred.size() != data.targets[i].size()) throw std::invalid_argument("mape: target size mismatch");
    for (std::size_t o = 0; o < pred.size(); ++o) {
      double y = data.targets[i][o];
      if (y == 0.0) {
        if (skip_zero_targets) continue;
        throw std::invalid_argument("mape: zero target in sample " + std::to_string(i));
      }
      total += std::abs(y - pred[o]) / std::abs(y);
      ++count;
    }
  }
  if (count == 0) throw std::invalid_argument("mape: no usable targets");
  return 100.0 * total / static_cast<double>(count);
}

std::string save_network(const ReluNetwork& net) {
  nlohmann::json doc;
  doc["layer_dims"] = net.layer_dims();
  auto& layers = doc["layers"] = nlohmann::json::array();
  for (const auto& l : net.layers()) {
    nlohmann::json W = nlohmann::json::array();
    for (int r = 0; r < l.outputs; ++r) {
      auto row = l.row(r);
      W.push_back(std::vector<double>(row.begin(), row.end()));
    }
    layers.push_back({{"W", std::move(W)}, {"b", l.bias}});
  }
  // nlohmann emits the shortest representation that round-trips (<= 17 digits).
  return doc.dump(1);
}

namespace {

double finite_number(const nlohmann::json& v, const char* what) {
  if (!v.is_number()) throw std::invalid_argument(std::string("network: non-numeric ") + what);
  double d = v.get<double>();
  if (!std::isfinite(d)) throw std::invalid_argument(std::string("network: non-finite ") + what);
  return d;
}

}  // namespace

ReluNetwork load_network(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("network: malformed document: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("layer_dims") || !doc.contains("layers"))
    throw std::invalid_argument("network: expected object with layer_dims and layers");
  std::vector<int> dims;
  for (const auto& d : doc["layer_dims"]) {
    if (!d.is_number_integer()) throw std::invalid_argument("network: layer_dims must be integers");
    dims.push_back(d.get<int>());
  }
  const auto& jl = doc["layers"];
  if (!jl.is_array() || dims.size() != jl.size() + 1)
    throw std::invalid_argument("network: layer count does not match layer_dims");
  std::vector<DenseLayer> layers;
  for (std::size_t k = 0; k < jl.size(); ++k) {
    DenseLayer l;
    l.inputs = dims[k];
    l.outputs = dims[k + 1];
    if (l.inputs < 1 || l.outputs < 1) throw std::invalid_argument("network: non-positive layer size");
    const auto& W = jl[k].at("W");
    const auto& b = jl[k].at("b");
    if (!W.is_array() || static_cast<int>(W.size()) != l.outputs)
      throw std::invalid_argument("network: layer " + std::to_string(k + 1) + " has wrong number of weight rows");
    for (const auto& row : W) {
      if (!row.is_array() || static_cast<int>(row.size()) != l.inputs)
        throw std::invalid_argument("network: layer " + std::to_string(k + 1) + " weight row length != n_{k-1}");
      for (const auto& v : row) l.weights.push_back(finite_number(v, "weight"));
    }
    if (!b.is_array() || static_cast<int>(b.size()) != l.outputs)
      throw std::invalid_argument("network: layer " + std::to_string(k + 1) + " bias length mismatch");
    for (const auto& v : b) l.bias.push_back(finite_number(v, "bias"));
    layers.push_back(std::move(l));
  }
  return ReluNetwork(std::move(layers));
}

void save_network_file(const ReluNetwork& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << save_network(net) << '\n';
}

ReluNetwork load_network_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_network(ss.str());
}

LabeledDataset load_dataset_csv(std::istream& in, int input_columns) {
  LabeledDataset data;
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("dataset: missing header row");
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        throw std::invalid_argument("dataset: bad number '" + cell + "' on line " + std::to_string(line_no));
      }
    }
    if (static_cast<int>(row.size()) <= input_columns)
      throw std::invalid_argument("dataset: line " + std::to_string(line_no) + " has no target columns");
    data.inputs.emplace_back(row.begin(), row.begin() + input_columns);
    data.targets.emplace_back(row.begin() + input_columns, row.end());
  }
  data.validate();
  return data;
}

LabeledDataset load_dataset_csv_file(const std::string& path, int input_columns) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return load_dataset_csv(in, input_columns);
}

void save_dataset_csv(const LabeledDataset& data, std::ostream& out) {
  data.validate();
  if (data.empty()) return;
  const std::size_t ni = data.inputs[0].size(), no = data.targets[0].size();
  for (std::size_t i = 0; i < ni; ++i) out << (i ? "," : "") << "x" << i;
  for (std::size_t o = 0; o < no; ++o) out << ",y" << o;
  out << '\n';
  out.precision(17);
  for (std::size_t r = 0; r < data.size(); ++r) {
    for (std::size_t i = 0; i < ni; ++i) out << (i ? "," : "") << data.inputs[r][i];
    for (std::size_t o = 0; o < no; ++o) out << ',' << data.targets[r][o];
    out << '\n';
  }
}

}  // namespace relumip
