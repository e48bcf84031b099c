#include "relumip/milp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace relumip {

int MilpModel::add_binary(std::string name) {
  int j = base.add_variable(std::move(name), 0.0, 1.0);
  binaries.push_back(j);
  return j;
}

void MilpModel::mark_binary(int var) {
  if (var < 0 || var >= base.num_variables()) throw std::out_of_range("mark_binary: unknown variable");
  if (!is_binary(var)) binaries.push_back(var);
}

bool MilpModel::is_binary(int var) const { return std::find(binaries.begin(), binaries.end(), var) != binaries.end(); }

void MilpModel::validate() const {
  for (int j : binaries) {
    if (j < 0 || j >= base.num_variables()) throw std::out_of_range("binary index out of range");
    const auto& v = base.variable(j);
    if (v.lower < 0.0 || v.upper > 1.0)
      throw std::invalid_argument("binary variable " + v.name + " has bounds outside [0,1]");
  }
}

const char* to_string(MilpStatus status) {
  switch (status) {
    case MilpStatus::optimal: return "optimal";
    case MilpStatus::feasible: return "feasible";
    case MilpStatus::infeasible: return "infeasible";
    case MilpStatus::bound_only: return "bound_only";
    case MilpStatus::unbounded: return "unbounded";
  }
  return "unknown";
}

void to_json(nlohmann::json& j, const MilpResult& r) {
  auto num = [](double v) -> nlohmann::json { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  j = nlohmann::json{{"status", to_string(r.status)},
                     {"objective_value", r.objective_value ? num(*r.objective_value) : nlohmann::json(nullptr)},
                     {"best_bound", num(r.best_bound)},
                     {"gap", num(r.gap)},
                     {"node_count", r.node_count},
                     {"wall_time", r.wall_time}};
}

namespace {

using Clock = std::chrono::steady_clock;

struct Node {
  std::vector<signed char> fix;  // per binary: -1 free, 0, 1
  double bound = -kInf;          // parent LP value (minimization space)
  int depth = 0;
  long id = 0;
  long parent = -1;
  LpBasis basis;
};

struct WorseNode {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.id < b.id;
  }
};

}  // namespace

MilpResult solve_milp(const MilpModel& model, const SolveParams& params) {
  model.validate();
  const auto start = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };
  const double sign = model.base.sense() == Sense::maximize ? -1.0 : 1.0;
  const int nb = static_cast<int>(model.binaries.size());

  LpSolver solver(model.base, params.lp);
  std::vector<double> root_lo(nb), root_hi(nb);
  for (int b = 0; b < nb; ++b) {
    const auto& v = model.base.variable(model.binaries[b]);
    root_lo[b] = std::ceil(v.lower - params.integrality_tolerance);
    root_hi[b] = std::floor(v.upper + params.integrality_tolerance);
  }

  MilpResult result;
  std::optional<std::vector<double>> incumbent;
  double inc_value = kInf;      // minimization space
  double pruned_bound = kInf;   // smallest LP bound among nodes discarded without full resolution
  bool root_done = false;

  std::vector<Node> stack;
  std::priority_queue<Node, std::vector<Node>, WorseNode> heap;
  long next_id = 0;
  {
    Node root;
    root.fix.assign(nb, -1);
    root.id = next_id++;
    stack.push_back(std::move(root));
  }

  auto apply_fixings = [&](const std::vector<signed char>& fix) {
    for (int b = 0; b < nb; ++b) {
      double lo = fix[b] < 0 ? root_lo[b] : fix[b];
      double hi = fix[b] < 0 ? root_hi[b] : fix[b];
      if (solver.lower(model.binaries[b]) != lo || solver.upper(model.binaries[b]) != hi)
        solver.set_bounds(model.binaries[b], lo, hi);
    }
  };

  auto prune_threshold = [&] {
    if (!incumbent) return kInf;
    return inc_value - std::max(params.absolute_gap, params.gap_tolerance * std::max(std::abs(inc_value), 1e-10));
  };

  auto open_bound = [&] {
    double b = kInf;
    for (const auto& n : stack) b = std::min(b, n.bound);
    if (!heap.empty()) b = std::min(b, heap.top().bound);
    return b;
  };

  bool stopped = false;
  long last_solved = -1;
  while (!stack.empty() || !heap.empty()) {
    if (root_done) {
      bool out_of_time = params.time_limit_seconds && elapsed() >= *params.time_limit_seconds;
      bool out_of_nodes = params.node_limit > 0 && result.node_count >= params.node_limit;
      if (out_of_time || out_of_nodes) {
        stopped = true;
        break;
      }
    }
    Node node;
    if (!stack.empty()) {
      node = std::move(stack.back());
      stack.pop_back();
    } else {
      node = heap.top();
      heap.pop();
    }
    if (node.bound >= prune_threshold()) {
      pruned_bound = std::min(pruned_bound, node.bound);
      continue;
    }

    apply_fixings(node.fix);
    if (!node.basis.empty() && node.parent != last_solved) solver.set_basis(node.basis);
    LpSolution lp = solver.solve();
    ++result.node_count;
    last_solved = node.id;

    if (!root_done) {
      root_done = true;
      if (lp.status == LpStatus::unbounded) {
        result.status = MilpStatus::unbounded;
        result.best_bound = sign * -kInf;
        result.wall_time = elapsed();
        return result;
      }
    }
    if (lp.status == LpStatus::infeasible) continue;
    if (lp.status != LpStatus::optimal) {
      pruned_bound = std::min(pruned_bound, node.bound);
      continue;
    }
    const double v = sign * lp.objective_value;
    if (v >= prune_threshold()) {
      pruned_bound = std::min(pruned_bound, v);
      continue;
    }

    int branch = -1;
    double most = params.integrality_tolerance;
    for (int b = 0; b < nb; ++b) {
      double x = lp.x[model.binaries[b]];
      double f = std::abs(x - std::round(x));
      if (f > most) {
        most = f;
        branch = b;
      }
    }

    if (branch < 0) {
      std::vector<double> x = lp.x;
      for (int j : model.binaries) x[j] = std::round(x[j]);
      if (model.base.max_violation(x) > 10 * params.lp.feasibility_tolerance) {
        std::vector<signed char> fixed(nb);
        for (int b = 0; b < nb; ++b) fixed[b] = static_cast<signed char>(x[model.binaries[b]]);
        apply_fixings(fixed);
        LpSolution again = solver.solve();
        last_solved = -2;
        if (again.status != LpStatus::optimal) {
          pruned_bound = std::min(pruned_bound, v);
          continue;
        }
        x = again.x;
        for (int j : model.binaries) x[j] = std::round(x[j]);
      }
      double value = sign * model.base.evaluate_objective(x);
      if (value < inc_value) {
        inc_value = value;
        incumbent = std::move(x);
        // First incumbent ends the dive; remaining nodes go to best-bound order.
        for (auto& n : stack) heap.push(std::move(n));
        stack.clear();
      }
      // The node's LP optimum can sit below its integral completion.
      if (v < inc_value) pruned_bound = std::min(pruned_bound, v);
      continue;
    }

    LpBasis basis = solver.basis();
    const double xb = lp.x[model.binaries[branch]];
    const signed char first = xb >= 0.5 ? 1 : 0;
    Node children[2];
    for (int c = 0; c < 2; ++c) {
      children[c].fix = node.fix;
      children[c].fix[branch] = c == 0 ? static_cast<signed char>(1 - first) : first;
      children[c].bound = v;
      children[c].depth = node.depth + 1;
      children[c].parent = node.id;
      children[c].basis = basis;
    }
    if (!incumbent) {
      // Dive: the preferred child is pushed last and popped next.
      children[0].id = next_id++;
      children[1].id = next_id++;
      stack.push_back(std::move(children[0]));
      stack.push_back(std::move(children[1]));
    } else {
      for (auto& ch : children) {
        ch.id = next_id++;
        heap.push(std::move(ch));
      }
    }
  }

  double bound = std::min(pruned_bound, open_bound());
  if (incumbent) bound = std::min(bound, inc_value);
  result.wall_time = elapsed();
  if (incumbent) {
    result.incumbent = incumbent;
    result.objective_value = sign * inc_value;
    result.best_bound = sign * bound;
    result.gap = std::abs(inc_value - bound) / std::max(std::abs(inc_value), 1e-10);
    const bool closed = result.gap <= params.gap_tolerance || inc_value - bound <= params.absolute_gap;
    result.status = closed ? MilpStatus::optimal : MilpStatus::feasible;
  } else {
    result.best_bound = sign * bound;
    result.status = (!stopped && bound == kInf) ? MilpStatus::infeasible : MilpStatus::bound_only;
  }
  return result;
}

}  // namespace relumip
