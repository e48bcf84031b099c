#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "relumip/bt.hpp"
#include "relumip/encode.hpp"
#include "relumip/milp.hpp"
#include "relumip/net.hpp"
#include "relumip/trainer.hpp"

namespace relumip {

enum Phase : int { oil = 0, gas = 1, wat = 2 };
inline constexpr int kPhases = 3;

using PhaseRange = std::array<double, kPhases>;

struct ProductionEdge {
  int from = 0;
  int to = 0;
  PhaseRange q_lo{0.0, 0.0, 0.0};
  PhaseRange q_hi{0.0, 0.0, 0.0};
};

/// Wells feed manifolds through discrete edges; risers connect manifolds to
/// separators. Nodes are numbered wells first, then manifolds, then separators.
struct ProductionTopology {
  int wells = 0;
  int manifolds = 0;
  int separators = 0;
  std::vector<ProductionEdge> discrete;
  std::vector<ProductionEdge> risers;
  std::vector<double> gor;  // per well
  std::vector<double> wor;  // per well
  std::vector<double> p_lo, p_hi;  // per node
  std::vector<double> p_sep;       // per separator

  int node_count() const { return wells + manifolds + separators; }
  int manifold_node(int m) const { return wells + m; }
  int separator_node(int s) const { return wells + manifolds + s; }
  bool is_well(int node) const { return node >= 0 && node < wells; }
  bool is_manifold(int node) const { return node >= wells && node < wells + manifolds; }
  bool is_separator(int node) const { return node >= wells + manifolds && node < node_count(); }
  std::vector<int> well_edges(int well) const;

  /// Discrete edges go well -> manifold, risers manifold -> separator, every
  /// well has one or two discrete edges, every node is reachable and bounds
  /// are consistent. Throws std::invalid_argument.
  void validate() const;
};

/// 8 wells, 2 manifolds, 2 separators; each well can route to either manifold.
ProductionTopology paper_topology();
/// 2 wells with one discrete edge each, 1 manifold, 1 riser.
ProductionTopology tiny_topology();

/// Oil rate f(p) = a - b p; negative beyond the shut-in pressure a / b.
struct WellCurve {
  double a = 1.0;
  double b = 0.1;
  double operator()(double p) const { return a - b * p; }
};

/// Outlet pressure p - drop(q) with an affine plus softplus-shaped drop.
struct RiserCurve {
  double c0 = 0.0;
  PhaseRange c{0.0, 0.0, 0.0};
  double d = 0.0;
  double k = 1.0;
  double m = 0.0;
  double drop(double q_oil, double q_gas, double q_wat) const;
  double operator()(double q_oil, double q_gas, double q_wat, double p) const { return p - drop(q_oil, q_gas, q_wat); }
};

struct ProductionInstance {
  ProductionTopology topology;
  std::vector<WellCurve> wells;
  std::vector<RiserCurve> risers;
};

/// Curves with seeded random coefficients. Each well's shut-in pressure lies
/// inside its pressure range.
ProductionInstance synthetic_instance(const ProductionTopology& topology, std::uint64_t seed);

struct ProductionArchitecture {
  std::vector<int> well_layers;
  std::vector<int> riser_layers;
  int well_samples = 50;
  int riser_samples = 4000;
  TrainConfig well_train;
  TrainConfig riser_train;
};

ProductionArchitecture shallow_architecture();
ProductionArchitecture deep_architecture();
ProductionArchitecture tiny_architecture();

struct ProductionNets {
  std::vector<ReluNetwork> wells;
  std::vector<ReluNetwork> risers;
  std::vector<double> well_mape;
  std::vector<double> riser_mape;
};

/// Samples each curve over its input box and fits the architecture.
ProductionNets train_production_nets(const ProductionInstance& instance, const ProductionArchitecture& arch,
                                     std::uint64_t seed);
/// He-initialized nets of the given architecture, without training.
ProductionNets random_production_nets(const ProductionTopology& topology, const ProductionArchitecture& arch,
                                      std::uint64_t seed);

Box well_input_box(const ProductionTopology& t, int well);
/// Oil leaving a well is nonnegative and bounded by its edge limits.
Box well_output_box(const ProductionTopology& t, int well);
Box riser_input_box(const ProductionTopology& t, int riser);
/// The singleton separator pressure.
Box riser_output_box(const ProductionTopology& t, int riser);

struct ProductionBounds {
  std::vector<BoundSet> wells;
  std::vector<BoundSet> risers;
};

struct ProductionBt {
  ProductionBounds bounds;
  std::vector<BtReport> well_reports;
  std::vector<BtReport> riser_reports;
  double total_time = 0.0;
};

/// Tightens every well and riser network with its input and output boxes.
ProductionBt tighten_production(const ProductionTopology& t, const ProductionNets& nets, const BtScheme& scheme,
                                const BtParams& params = {});

struct ProductionModel {
  MilpModel model;
  std::vector<NetworkEmbedding> embeddings;  // wells first, then risers
  std::vector<int> y;                        // per discrete edge
  std::vector<std::array<int, kPhases>> q_discrete;
  std::vector<std::array<int, kPhases>> q_riser;
  std::vector<int> p;  // per node
};

/// Maximizes total riser oil subject to mass balance, riser pressure drops,
/// open-edge pressure equality, routing, flow boxes, pressure boxes, well
/// curves, GOR/WOR coupling and fixed separator pressures.
ProductionModel build_production_model(const ProductionTopology& t, const ProductionNets& nets,
                                       const ProductionBounds& bounds);

struct ProductionCheck {
  double max_balance_violation = 0.0;
  bool routing_ok = true;
  double max_riser_error = 0.0;  // |g(q, p) - p_sep| by forward evaluation
  double max_well_error = 0.0;   // |f(p) - sum q_oil| by forward evaluation
};

ProductionCheck check_production_solution(const ProductionTopology& t, const ProductionNets& nets,
                                          const ProductionModel& pm, const std::vector<double>& x);

struct ProductionSolution {
  MilpResult result;
  double bt_time = 0.0;
  double opt_time = 0.0;
  std::optional<ProductionCheck> check;
  ProductionBt bt;
};

ProductionSolution solve_production(const ProductionTopology& t, const ProductionNets& nets, const BtScheme& scheme,
                                    const SolveParams& params = {}, const BtParams& bt_params = {});

struct ProductionOracle {
  bool feasible = false;
  double objective = 0.0;
  std::vector<int> open;  // routing bit per discrete edge
  double manifold_pressure = 0.0;
};

/// Enumerates every routing and solves the remaining one-dimensional problem in
/// the manifold pressure by root finding. Single-manifold topologies only.
ProductionOracle production_oracle(const ProductionTopology& t, const ProductionNets& nets);

}  // namespace relumip
