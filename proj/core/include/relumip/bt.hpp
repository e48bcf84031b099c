#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "relumip/encode.hpp"
#include "relumip/milp.hpp"
#include "relumip/net.hpp"

namespace relumip {

enum class BtKind { lrr, rr, lr, semi_rr, no_r };

struct BtScheme {
  BtKind kind = BtKind::lrr;
  std::optional<double> subproblem_time_limit;
  int rounds = 1;

  /// Accepts `lrr`, `rr`, `lr`, `semi-rr`, `no-r` with an optional `(T)` suffix
  /// giving the subproblem time limit in seconds. Throws std::invalid_argument.
  static BtScheme parse(std::string_view text);
  std::string to_string() const;

  bool milp_based() const { return kind == BtKind::lr || kind == BtKind::semi_rr || kind == BtKind::no_r; }
  /// Schemes whose subproblems see the output box E (backward propagation).
  bool uses_output_box() const { return kind == BtKind::rr || kind == BtKind::semi_rr || kind == BtKind::no_r; }
};

const char* to_string(BtKind kind);

struct BtParams {
  /// MILP settings for LR, SEMI-RR and NO-R subproblems. The time limit is
  /// taken from the scheme.
  SolveParams milp{.time_limit_seconds = std::nullopt,
                   .gap_tolerance = 0.0,
                   .absolute_gap = 1e-12,
                   .integrality_tolerance = 1e-9,
                   .node_limit = 0,
                   .lp = {}};
  /// Solve the max and min subproblem of a node on two threads.
  bool parallel_min_max = false;
  /// Optimal bounds B* used for MRD; MRD is omitted when absent.
  std::optional<BoundSet> reference;
};

struct NodeTiming {
  int layer = 0;
  int index = 0;
  double seconds = 0.0;
  bool timed_out = false;
};

struct NeuronCounts {
  double dead = 0.0;      // U < 0
  double active = 0.0;    // L > 0
  double unstable = 0.0;  // remaining hidden nodes
};

struct BtReport {
  BtScheme scheme;
  BoundSet bounds;
  BoundSet initial;  // the LRR bounds B^- every scheme starts from
  std::vector<NodeTiming> timings;
  double total_time = 0.0;
  NeuronCounts neurons;  // fractions of hidden nodes
  double mad = 0.0;
  std::optional<double> mrd;
  int subproblem_timeouts = 0;
};

/// A bound subproblem proved the constraint set empty.
class InfeasibleBoundsError : public std::runtime_error {
 public:
  InfeasibleBoundsError(int layer, int index);
  int layer() const { return layer_; }
  int index() const { return index_; }

 private:
  int layer_, index_;
};

/// Interval-arithmetic bounds for all layers from input box D (B^K from FBP only).
BoundSet lrr_bounds(const ReluNetwork& net, const Box& input_box);

/// One interval-arithmetic bound for node (k, j), k >= 1, from the bounds of layer k-1.
Interval lrr_node(const ReluNetwork& net, const BoundSet& bounds, int k, int j);

/// Runs the scheme. D must be finite; E, when given, restricts the outputs and
/// is only visible to RR, SEMI-RR and NO-R.
BtReport tighten(const ReluNetwork& net, const Box& input_box, const std::optional<Box>& output_box,
                 const BtScheme& scheme, const BtParams& params = {});

NeuronCounts neuron_fractions(const BoundSet& bounds);

/// Sum over layers of the mean interval width.
double mad(const BoundSet& bounds);

/// 100 |MAD(b) - MAD(b*)| / |MAD(b-) - MAD(b*)|, 0 when the denominator is 0.
double mrd(const BoundSet& b, const BoundSet& b_star, const BoundSet& b_minus);

struct BbpAnalysis {
  double delta_threshold = 0.0;  // sum_{i != j} w_i (u_i - l_i)
  double delta_relative = 0.0;   // 1 - delta
  double delta_param = 1.0;      // w_j (u_j - l_j) / sum_i w_i (u_i - l_i)
};

/// Output-side tightening needed before backward propagation can move node j
/// of a single affine layer with nonnegative weights.
BbpAnalysis bbp_threshold(std::span<const double> weights, const Box& node_bounds, int j);

}  // namespace relumip
