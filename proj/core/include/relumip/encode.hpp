#pragma once

#include <compare>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "relumip/milp.hpp"
#include "relumip/net.hpp"

namespace relumip {

struct Interval {
  double lo = -kInf;
  double hi = kInf;

  double width() const { return hi - lo; }
  bool contains(double v, double tol = 0.0) const { return v >= lo - tol && v <= hi + tol; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

using Box = std::vector<Interval>;

/// Pre-activation bounds [L_j^k, U_j^k] for every node, layers 0..K.
struct BoundSet {
  std::vector<std::vector<double>> lower;
  std::vector<std::vector<double>> upper;

  /// All bounds (-inf, inf) with the shape of `net`.
  static BoundSet unbounded(const ReluNetwork& net);

  int depth() const { return static_cast<int>(lower.size()) - 1; }
  Interval at(int k, int j) const { return {lower[k][j], upper[k][j]}; }
  void set(int k, int j, Interval iv) {
    lower[k][j] = iv.lo;
    upper[k][j] = iv.hi;
  }
  Box layer_box(int k) const;
  void set_layer(int k, const Box& box);

  /// Throws unless the shape matches `net`, entries are not NaN and L <= U.
  void validate(const ReluNetwork& net) const;
  bool hidden_finite() const;

  friend bool operator==(const BoundSet&, const BoundSet&) = default;
};

/// JSON `{"layers":[{"L":[...],"U":[...]}, ...]}`; null encodes an infinite bound.
std::string save_bounds(const BoundSet& bounds);
BoundSet load_bounds(const std::string& text);
void save_bounds_file(const BoundSet& bounds, const std::string& path);
BoundSet load_bounds_file(const std::string& path);

struct NodeId {
  int layer = 0;
  int index = 0;
  friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

/// Partial ReLU relaxation (continuous z) and layer relaxation (dropped nodes).
struct RelaxSpec {
  std::set<NodeId> relu_relaxed;
  std::set<NodeId> removed;

  bool is_relaxed(int k, int j) const { return relu_relaxed.count({k, j}) > 0; }
  bool is_removed(int k, int j) const { return removed.count({k, j}) > 0; }
  void relax_layers(const ReluNetwork& net, int from, int to);   // hidden layers in [from, to]
  void remove_layers(const ReluNetwork& net, int from, int to);  // layers in [from, to]
};

/// Model columns of one embedded network; -1 marks an absent variable.
struct NetworkEmbedding {
  std::string prefix;
  std::vector<std::vector<int>> x, s, z;

  const std::vector<int>& inputs() const { return x.front(); }
  const std::vector<int>& outputs() const { return x.back(); }

  /// Terms of W^k x^{k-1} (k >= 1), or of x^0_j for k = 0; the constant b_j^k is returned separately.
  std::vector<Term> pre_activation(const ReluNetwork& net, int k, int j, double& constant) const;
};

struct EmbedOptions {
  std::string prefix = "net0";
  /// Existing columns used as x^0 (their bounds are intersected with B^0).
  std::vector<int> input_vars;
  /// Existing columns used as x^K (their bounds are intersected with B^K).
  std::vector<int> output_vars;
  /// Extra output restriction E, intersected with B^K.
  std::optional<Box> output_box;
};

/// Adds the big-M encoding of `net` to `model`.
///
/// Hidden nodes get x, s, z with x in [max(0,L), max(0,U)] and s in
/// [max(0,-U), max(0,-L)]. Nodes with L >= 0 have z fixed to 1 and those with
/// U <= 0 have z fixed to 0; only nodes with L < 0 < U get the rows
/// x - U z <= 0 and s - L z <= -L. Every hidden z is registered as binary unless
/// the node is in `relax.relu_relaxed`, where z is continuous in [0,1].
NetworkEmbedding embed_network(MilpModel& model, const ReluNetwork& net, const BoundSet& bounds,
                               const RelaxSpec& relax = {}, const EmbedOptions& options = {});

/// Upper envelope of the ReLU over [L, U]: U (pre - L) / (U - L). Requires L < 0 < U.
double relu_relaxation_upper(double pre, double L, double U);

struct NamedTerm {
  std::string var;
  double coeff = 1.0;
};

struct ExtraVariable {
  std::string name;
  double lower = 0.0;
  double upper = kInf;
  bool binary = false;
};

struct ExtraConstraint {
  std::vector<NamedTerm> terms;
  Relation relation = Relation::less_equal;
  double rhs = 0.0;
  std::string name;
};

struct NetworkSpec {
  ReluNetwork net;
  BoundSet bounds;
  RelaxSpec relax;
  std::vector<std::string> input_vars;   // empty: the network owns its inputs
  std::vector<std::string> output_vars;  // empty: the network owns its outputs
  std::optional<Box> output_box;
};

struct ProblemSpec {
  std::vector<ExtraVariable> variables;
  std::vector<NetworkSpec> networks;  // embedded in order with prefixes net0, net1, ...
  std::vector<ExtraConstraint> constraints;
  Sense sense = Sense::minimize;
  std::vector<NamedTerm> objective;
  double objective_offset = 0.0;
};

struct BuiltProblem {
  MilpModel model;
  std::vector<NetworkEmbedding> embeddings;
};

/// Extra variables first, then networks, then extra constraints and the
/// objective. Names may refer to extra variables or to network columns such as
/// `net0_x_2_0`; unknown names and duplicate names are errors.
BuiltProblem build_problem(const ProblemSpec& spec);

}  // namespace relumip
