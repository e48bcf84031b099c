#pragma once

#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "relumip/lp.hpp"

namespace relumip {

/// LinearModel plus a set of variables restricted to {0, 1}.
struct MilpModel {
  LinearModel base;
  std::vector<int> binaries;

  int add_binary(std::string name);
  void mark_binary(int var);
  bool is_binary(int var) const;
  /// Throws unless every binary has bounds inside [0, 1].
  void validate() const;
};

struct SolveParams {
  std::optional<double> time_limit_seconds;
  double gap_tolerance = 1e-6;
  /// Nodes whose bound is within this absolute distance of the incumbent are pruned.
  double absolute_gap = 1e-9;
  double integrality_tolerance = 1e-6;
  long node_limit = 0;  // 0 = unlimited
  LpOptions lp;
};

enum class MilpStatus { optimal, feasible, infeasible, bound_only, unbounded };

const char* to_string(MilpStatus status);

struct MilpResult {
  MilpStatus status = MilpStatus::infeasible;
  std::optional<std::vector<double>> incumbent;
  std::optional<double> objective_value;
  /// Valid dual bound in the model's sense (>= optimum when maximizing).
  double best_bound = 0.0;
  double gap = kInf;
  long node_count = 0;
  double wall_time = 0.0;

  bool has_incumbent() const { return incumbent.has_value(); }
};

/// Best-bound branch and bound with an initial depth-first dive.
///
/// The root relaxation is always solved, even when the time limit is already
/// exhausted, so the returned best bound is never weaker than the root LP.
MilpResult solve_milp(const MilpModel& model, const SolveParams& params = {});

void to_json(nlohmann::json& j, const MilpResult& r);

}  // namespace relumip
