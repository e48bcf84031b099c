#include "relumip/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "relumip/lp.hpp"

namespace relumip {

GridResult brute_force_optimum(const ScalarFn& objective, const ScalarFn& constraint, const Box& box, int density,
                               double band, Sense sense) {
  if (box.empty()) throw std::invalid_argument("brute_force_optimum: empty box");
  if (density < 2) throw std::invalid_argument("brute_force_optimum: density must be at least 2");
  double total = std::pow(static_cast<double>(density), static_cast<double>(box.size()));
  if (total > 1e7) throw std::invalid_argument("brute_force_optimum: grid exceeds 10^7 points");
  for (const auto& iv : box)
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || iv.lo > iv.hi)
      throw std::invalid_argument("brute_force_optimum: box must be finite");

  GridResult best;
  const std::size_t n = box.size();
  std::vector<int> idx(n, 0);
  std::vector<double> x(n);
  const double dir = sense == Sense::maximize ? -1.0 : 1.0;
  while (true) {
    for (std::size_t d = 0; d < n; ++d)
      x[d] = box[d].lo + (box[d].hi - box[d].lo) * static_cast<double>(idx[d]) / (density - 1);
    ++best.points;
    if (!constraint || std::abs(constraint(x)) <= band) {
      double v = objective(x);
      if (!best.found || dir * v < dir * best.value) {
        best.found = true;
        best.value = v;
        best.x = x;
      }
    }
    std::size_t d = 0;
    while (d < n && ++idx[d] == density) idx[d++] = 0;
    if (d == n) break;
  }
  return best;
}

std::vector<double> find_roots(const std::function<double(double)>& f, double lo, double hi, int samples) {
  if (!(lo <= hi)) throw std::invalid_argument("find_roots: empty interval");
  std::vector<double> roots;
  if (lo == hi) {
    if (f(lo) == 0.0) roots.push_back(lo);
    return roots;
  }
  samples = std::max(samples, 1);
  double a = lo, fa = f(lo);
  if (fa == 0.0) roots.push_back(a);
  for (int i = 1; i <= samples; ++i) {
    double b = i == samples ? hi : lo + (hi - lo) * static_cast<double>(i) / samples;
    double fb = f(b);
    if (fb == 0.0) {
      roots.push_back(b);
    } else if (fa != 0.0 && (fa < 0.0) != (fb < 0.0)) {
      double l = a, r = b, fl = fa;
      for (int it = 0; it < 200 && r - l > 0.0; ++it) {
        double m = 0.5 * (l + r);
        if (m <= l || m >= r) break;
        double fm = f(m);
        if (fm == 0.0) {
          l = r = m;
          break;
        }
        if ((fm < 0.0) == (fl < 0.0)) {
          l = m;
          fl = fm;
        } else {
          r = m;
        }
      }
      roots.push_back(0.5 * (l + r));
    }
    a = b;
    fa = fb;
  }
  return roots;
}

GridResult qn_oracle_1d(const ReluNetwork& net1, const ReluNetwork& net2, double alpha, double lo, double hi) {
  if (net1.input_size() != 1 || net2.input_size() != 1) throw std::invalid_argument("qn_oracle_1d: scalar inputs only");
  auto h = [&](double x) { return forward(net2, std::span<const double>(&x, 1))[0] - alpha; };
  GridResult best;
  for (double r : find_roots(h, lo, hi, 100000)) {
    ++best.points;
    double v = forward(net1, std::span<const double>(&r, 1))[0];
    if (!best.found || v < best.value) {
      best.found = true;
      best.value = v;
      best.x = {r};
    }
  }
  return best;
}

namespace {

// Roots of f2 - alpha along one axis-parallel segment inside the box.
void scan_line(const ReluNetwork& net1, const ReluNetwork& net2, double alpha, int axis, double fixed, double lo,
               double hi, int samples, GridResult& best, std::vector<std::pair<double, std::vector<double>>>* all) {
  std::vector<double> x(2);
  x[1 - axis] = fixed;
  auto h = [&](double v) {
    x[axis] = v;
    return forward(net2, x)[0] - alpha;
  };
  for (double r : find_roots(h, lo, hi, samples)) {
    x[axis] = r;
    double v = forward(net1, x)[0];
    ++best.points;
    if (all) all->push_back({v, x});
    if (!best.found || v < best.value) {
      best.found = true;
      best.value = v;
      best.x = x;
    }
  }
}

}  // namespace

GridResult qn_oracle_2d(const ReluNetwork& net1, const ReluNetwork& net2, double alpha, int lines) {
  if (net1.input_size() != 2 || net2.input_size() != 2) throw std::invalid_argument("qn_oracle_2d: two inputs only");
  if (lines < 2) throw std::invalid_argument("qn_oracle_2d: need at least two lines");
  GridResult best;
  std::vector<std::pair<double, std::vector<double>>> candidates;
  for (int axis = 0; axis < 2; ++axis)
    for (int i = 0; i <= lines; ++i)
      scan_line(net1, net2, alpha, axis, -1.0 + 2.0 * i / lines, -1.0, 1.0, lines, best, &candidates);
  if (!best.found) return best;

  std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::vector<double>> seeds;
  for (const auto& c : candidates) {
    bool near = false;
    for (const auto& s : seeds) near |= std::hypot(s[0] - c.second[0], s[1] - c.second[1]) < 0.05;
    if (!near) seeds.push_back(c.second);
    if (seeds.size() == 12) break;
  }
  for (const auto& seed : seeds) {
    GridResult local;
    local.found = true;
    local.x = seed;
    local.value = forward(net1, seed)[0];
    double w = 4.0 / lines;
    for (int level = 0; level < 45; ++level) {
      const std::vector<double> c = local.x;
      const int k = 16;
      for (int axis = 0; axis < 2; ++axis) {
        const int other = 1 - axis;
        const double lo = std::max(-1.0, c[axis] - w), hi = std::min(1.0, c[axis] + w);
        for (int i = 0; i <= k; ++i) {
          double f = c[other] - w + 2.0 * w * i / k;
          if (f < -1.0 || f > 1.0) continue;
          scan_line(net1, net2, alpha, axis, f, lo, hi, 64, local, nullptr);
        }
      }
      w *= 0.6;
    }
    best.points += local.points;
    if (local.value < best.value) {
      best.value = local.value;
      best.x = local.x;
    }
  }
  return best;
}

PatternExtrema pattern_extrema(const ReluNetwork& net, const Box& box) {
  if (net.output_size() != 1) throw std::invalid_argument("pattern_extrema: scalar output only");
  if (static_cast<int>(box.size()) != net.input_size()) throw std::invalid_argument("pattern_extrema: box size");
  const int h = net.hidden_node_count();
  if (h > 16) throw std::invalid_argument("pattern_extrema: at most 16 hidden nodes");
  const int K = net.depth();

  PatternExtrema out;
  out.min = kInf;
  out.max = -kInf;
  for (long mask = 0; mask < (1L << h); ++mask) {
    ++out.patterns;
    LinearModel lp;
    std::vector<int> prev;
    for (int i = 0; i < net.input_size(); ++i) prev.push_back(lp.add_variable("x" + std::to_string(i), box[i].lo, box[i].hi));
    std::vector<char> prev_on(net.input_size(), 1);
    int bit = 0;
    for (int k = 1; k < K; ++k) {
      const DenseLayer& l = net.layer(k);
      std::vector<int> cur;
      std::vector<char> on;
      for (int j = 0; j < l.outputs; ++j) {
        const bool active = (mask >> bit++) & 1L;
        int t = lp.add_variable("t" + std::to_string(k) + "_" + std::to_string(j), active ? 0.0 : -kInf,
                                active ? kInf : 0.0);
        std::vector<Term> row{{t, -1.0}};
        for (int i = 0; i < l.inputs; ++i)
          if (prev_on[i]) row.push_back({prev[i], l.weight(j, i)});
        lp.add_constraint(std::move(row), Relation::equal, -l.bias[j]);
        cur.push_back(t);
        on.push_back(active);
      }
      prev = std::move(cur);
      prev_on = std::move(on);
    }
    const DenseLayer& last = net.layer(K);
    std::vector<Term> obj;
    for (int i = 0; i < last.inputs; ++i)
      if (prev_on[i]) obj.push_back({prev[i], last.weight(0, i)});
    lp.set_objective(Sense::maximize, obj, last.bias[0]);
    LpSolution hi = solve_lp(lp);
    if (hi.status == LpStatus::infeasible) continue;
    if (hi.status != LpStatus::optimal) throw std::runtime_error("pattern_extrema: LP did not solve to optimality");
    lp.set_sense(Sense::minimize);
    LpSolution lo = solve_lp(lp);
    if (lo.status != LpStatus::optimal) throw std::runtime_error("pattern_extrema: LP did not solve to optimality");
    ++out.feasible_patterns;
    out.max = std::max(out.max, hi.objective_value);
    out.min = std::min(out.min, lo.objective_value);
  }
  return out;
}

}  // namespace relumip
