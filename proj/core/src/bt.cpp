#include "relumip/bt.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <future>
#include <sstream>

namespace relumip {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

const char* to_string(BtKind kind) {
  switch (kind) {
    case BtKind::lrr: return "lrr";
    case BtKind::rr: return "rr";
    case BtKind::lr: return "lr";
    case BtKind::semi_rr: return "semi-rr";
    case BtKind::no_r: return "no-r";
  }
  return "unknown";
}

BtScheme BtScheme::parse(std::string_view text) {
  std::string s = trim(text);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  BtScheme scheme;
  std::string name = s;
  auto open = s.find('(');
  if (open != std::string::npos) {
    if (s.back() != ')') throw std::invalid_argument("scheme '" + std::string(text) + "': missing ')'");
    name = trim(s.substr(0, open));
    std::string arg = trim(s.substr(open + 1, s.size() - open - 2));
    double t = 0.0;
    auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), t);
    if (arg.empty() || ec != std::errc() || ptr != arg.data() + arg.size() || !(t > 0.0) || !std::isfinite(t))
      throw std::invalid_argument("scheme '" + std::string(text) + "': time limit must be a positive number");
    scheme.subproblem_time_limit = t;
  }
  if (name == "lrr") scheme.kind = BtKind::lrr;
  else if (name == "rr") scheme.kind = BtKind::rr;
  else if (name == "lr") scheme.kind = BtKind::lr;
  else if (name == "semi-rr") scheme.kind = BtKind::semi_rr;
  else if (name == "no-r") scheme.kind = BtKind::no_r;
  else throw std::invalid_argument("unknown scheme '" + std::string(text) + "' (expected lrr, rr, lr, semi-rr or no-r)");
  if (scheme.subproblem_time_limit && !scheme.milp_based())
    throw std::invalid_argument("scheme '" + std::string(text) + "': time limits apply to lr, semi-rr and no-r only");
  return scheme;
}

std::string BtScheme::to_string() const {
  std::string s = relumip::to_string(kind);
  if (subproblem_time_limit) {
    std::ostringstream os;
    os << *subproblem_time_limit;
    s += "(" + os.str() + ")";
  }
  return s;
}

InfeasibleBoundsError::InfeasibleBoundsError(int layer, int index)
    : std::runtime_error("bound subproblem infeasible at node (" + std::to_string(layer) + "," + std::to_string(index) +
                         "): no input in D maps into the output box"),
      layer_(layer),
      index_(index) {}

Interval lrr_node(const ReluNetwork& net, const BoundSet& bounds, int k, int j) {
  const DenseLayer& l = net.layer(k);
  double lo = l.bias[j], hi = l.bias[j];
  for (int i = 0; i < l.inputs; ++i) {
    const double w = l.weight(j, i);
    if (w == 0.0) continue;
    double a = bounds.lower[k - 1][i], b = bounds.upper[k - 1][i];
    if (k > 1) {
      a = std::max(0.0, a);
      b = std::max(0.0, b);
    }
    hi += std::max(w * a, w * b);
    lo += std::min(w * a, w * b);
  }
  return {lo, hi};
}

BoundSet lrr_bounds(const ReluNetwork& net, const Box& input_box) {
  if (static_cast<int>(input_box.size()) != net.input_size())
    throw std::invalid_argument("input box size does not match network input size");
  for (const auto& iv : input_box)
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || iv.lo > iv.hi)
      throw std::invalid_argument("input box must be finite and nonempty");
  BoundSet b = BoundSet::unbounded(net);
  b.set_layer(0, input_box);
  for (int k = 1; k <= net.depth(); ++k)
    for (int j = 0; j < net.layer_size(k); ++j) b.set(k, j, lrr_node(net, b, k, j));
  return b;
}

NeuronCounts neuron_fractions(const BoundSet& bounds) {
  NeuronCounts c;
  int total = 0;
  for (int k = 1; k < bounds.depth(); ++k) {
    for (std::size_t j = 0; j < bounds.lower[k].size(); ++j) {
      ++total;
      if (bounds.upper[k][j] < 0.0) c.dead += 1;
      else if (bounds.lower[k][j] > 0.0) c.active += 1;
      else c.unstable += 1;
    }
  }
  if (total > 0) {
    c.dead /= total;
    c.active /= total;
    c.unstable /= total;
  }
  return c;
}

double mad(const BoundSet& bounds) {
  double total = 0.0;
  for (int k = 0; k <= bounds.depth(); ++k) {
    const auto& lo = bounds.lower[k];
    const auto& hi = bounds.upper[k];
    if (lo.empty()) continue;
    double sum = 0.0;
    for (std::size_t j = 0; j < lo.size(); ++j) {
      if (!std::isfinite(lo[j]) || !std::isfinite(hi[j]))
        throw std::invalid_argument("mad: infinite bound in layer " + std::to_string(k));
      sum += std::abs(hi[j] - lo[j]);
    }
    total += sum / static_cast<double>(lo.size());
  }
  return total;
}

double mrd(const BoundSet& b, const BoundSet& b_star, const BoundSet& b_minus) {
  auto same_shape = [](const BoundSet& x, const BoundSet& y) {
    if (x.lower.size() != y.lower.size()) return false;
    for (std::size_t k = 0; k < x.lower.size(); ++k)
      if (x.lower[k].size() != y.lower[k].size()) return false;
    return true;
  };
  if (!same_shape(b, b_star) || !same_shape(b, b_minus)) throw std::invalid_argument("mrd: bound sets differ in shape");
  const double ref = mad(b_star);
  const double den = std::abs(mad(b_minus) - ref);
  if (den == 0.0) return 0.0;
  return 100.0 * std::abs(mad(b) - ref) / den;
}

BbpAnalysis bbp_threshold(std::span<const double> weights, const Box& node_bounds, int j) {
  if (weights.size() != node_bounds.size() || weights.empty())
    throw std::invalid_argument("bbp_threshold: weights and bounds must be nonempty and of equal length");
  if (j < 0 || j >= static_cast<int>(weights.size())) throw std::out_of_range("bbp_threshold: target index");
  double total = 0.0, others = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] < 0.0) throw std::invalid_argument("bbp_threshold: weights must be nonnegative");
    if (node_bounds[i].hi < node_bounds[i].lo) throw std::invalid_argument("bbp_threshold: negative interval width");
    double c = weights[i] * node_bounds[i].width();
    total += c;
    if (static_cast<int>(i) != j) others += c;
  }
  BbpAnalysis a;
  a.delta_threshold = others;
  if (total == 0.0) {
    a.delta_param = 1.0;
    a.delta_relative = 0.0;
  } else {
    a.delta_relative = others / total;
    a.delta_param = weights[j] * node_bounds[j].width() / total;
  }
  return a;
}

namespace {

struct Subproblem {
  MilpModel model;
  std::vector<Term> objective;
  double constant = 0.0;
};

Subproblem build_subproblem(const ReluNetwork& net, const BoundSet& bounds, const std::optional<Box>& output_box,
                            BtKind kind, int k, int j) {
  const int K = net.depth();
  RelaxSpec relax;
  switch (kind) {
    case BtKind::rr: relax.relax_layers(net, 1, K - 1); break;
    case BtKind::semi_rr: relax.relax_layers(net, k, K - 1); break;
    case BtKind::lr: relax.remove_layers(net, k, K); break;
    default: break;
  }
  EmbedOptions opt;
  if (kind != BtKind::lr) opt.output_box = output_box;
  Subproblem sp;
  NetworkEmbedding emb = embed_network(sp.model, net, bounds, relax, opt);
  sp.objective = emb.pre_activation(net, k, j, sp.constant);
  return sp;
}

struct Extremum {
  double value;
  bool timed_out = false;
};

// Returns a valid bound on the objective in direction `sense`.
Extremum solve_extremum(const Subproblem& sp, Sense sense, BtKind kind, const BtScheme& scheme, const BtParams& params,
                        int k, int j) {
  MilpModel m = sp.model;
  m.base.set_objective(sense, sp.objective, sp.constant);
  const double unbounded = sense == Sense::maximize ? kInf : -kInf;
  if (kind == BtKind::rr) {
    LpSolution lp = solve_lp(m.base, params.milp.lp);
    if (lp.status == LpStatus::infeasible) throw InfeasibleBoundsError(k, j);
    if (lp.status != LpStatus::optimal) return {unbounded};
    return {lp.objective_value};
  }
  SolveParams sp_params = params.milp;
  sp_params.time_limit_seconds = scheme.subproblem_time_limit;
  MilpResult r = solve_milp(m, sp_params);
  if (r.status == MilpStatus::infeasible) throw InfeasibleBoundsError(k, j);
  if (r.status == MilpStatus::unbounded) return {unbounded};
  return {r.best_bound, r.status != MilpStatus::optimal};
}

}  // namespace

BtReport tighten(const ReluNetwork& net, const Box& input_box, const std::optional<Box>& output_box,
                 const BtScheme& scheme, const BtParams& params) {
  if (scheme.rounds < 1) throw std::invalid_argument("tighten: rounds must be at least 1");
  if (output_box && static_cast<int>(output_box->size()) != net.output_size())
    throw std::invalid_argument("output box size does not match network output size");
  const auto t0 = Clock::now();
  BtReport report;
  report.scheme = scheme;
  report.initial = lrr_bounds(net, input_box);
  BoundSet B = report.initial;
  const int K = net.depth();

  if (output_box && scheme.uses_output_box()) {
    for (int j = 0; j < net.output_size(); ++j) {
      const Interval e = (*output_box)[j];
      if (std::max(B.lower[K][j], e.lo) - std::min(B.upper[K][j], e.hi) >
          1e-7 * (1.0 + std::max(std::abs(e.lo), std::abs(e.hi))))
        throw InfeasibleBoundsError(K, j);
    }
  }

  if (scheme.kind != BtKind::lrr) {
    const int k0 = scheme.kind == BtKind::lr ? 1 : 0;
    for (int round = 0; round < scheme.rounds; ++round) {
      for (int k = k0; k <= K; ++k) {
        for (int j = 0; j < net.layer_size(k); ++j) {
          const auto tn = Clock::now();
          Subproblem sp = build_subproblem(net, B, output_box, scheme.kind, k, j);
          Extremum hi, lo;
          if (params.parallel_min_max) {
            auto fut = std::async(std::launch::async, [&] {
              return solve_extremum(sp, Sense::maximize, scheme.kind, scheme, params, k, j);
            });
            lo = solve_extremum(sp, Sense::minimize, scheme.kind, scheme, params, k, j);
            hi = fut.get();
          } else {
            hi = solve_extremum(sp, Sense::maximize, scheme.kind, scheme, params, k, j);
            lo = solve_extremum(sp, Sense::minimize, scheme.kind, scheme, params, k, j);
          }
          const Interval cur = B.at(k, j);
          // Shrink-only: looser subproblem bounds are discarded.
          double nlo = std::max(cur.lo, lo.value), nhi = std::min(cur.hi, hi.value);
          if (nlo > nhi) std::swap(nlo, nhi);
          if (k == K && output_box && scheme.uses_output_box()) {
            // Outputs of feasible inputs lie in E by definition.
            const Interval e = (*output_box)[j];
            const double a = std::max(nlo, e.lo), b = std::min(nhi, e.hi);
            if (a <= b) {
              nlo = a;
              nhi = b;
            } else if (a - b <= 1e-7 * (1.0 + std::max(std::abs(e.lo), std::abs(e.hi)))) {
              nlo = nhi = std::clamp(0.5 * (nlo + nhi), e.lo, e.hi);
            } else {
              throw InfeasibleBoundsError(k, j);
            }
          }
          B.set(k, j, {nlo, nhi});
          const bool timed_out = hi.timed_out || lo.timed_out;
          report.subproblem_timeouts += static_cast<int>(hi.timed_out) + static_cast<int>(lo.timed_out);
          report.timings.push_back({k, j, seconds_since(tn), timed_out});
        }
      }
    }
  }

  report.bounds = std::move(B);
  report.total_time = seconds_since(t0);
  report.neurons = neuron_fractions(report.bounds);
  report.mad = mad(report.bounds);
  if (params.reference) report.mrd = mrd(report.bounds, *params.reference, report.initial);
  return report;
}

}  // namespace relumip
