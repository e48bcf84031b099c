#pragma once

// Shared fixtures and brute-force oracles for the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "relumip/bt.hpp"
#include "relumip/encode.hpp"
#include "relumip/lp.hpp"
#include "relumip/milp.hpp"
#include "relumip/net.hpp"
#include "relumip/random.hpp"

namespace relumip::testing {

/// |x| = relu(x) + relu(-x).
inline ReluNetwork abs_net() {
  DenseLayer l1{1, 2, {1.0, -1.0}, {0.0, 0.0}};
  DenseLayer l2{2, 1, {1.0, 1.0}, {0.0}};
  return ReluNetwork({l1, l2});
}

/// He-initialized net with small random biases so activation patterns vary.
inline ReluNetwork random_net(const std::vector<int>& dims, std::uint64_t seed, double bias_scale = 0.3) {
  ReluNetwork he = he_initialize(dims, seed);
  std::vector<DenseLayer> layers = he.layers();
  Rng rng(derive_seed(seed, "test-bias"));
  std::uniform_real_distribution<double> u(-bias_scale, bias_scale);
  for (auto& l : layers)
    for (double& b : l.bias) b = u(rng);
  return ReluNetwork(std::move(layers));
}

inline std::vector<double> uniform_point(const Box& box, Rng& rng) {
  std::vector<double> x;
  for (const auto& iv : box) x.push_back(std::uniform_real_distribution<double>(iv.lo, iv.hi)(rng));
  return x;
}

/// Up to `count` inputs drawn uniformly from D whose output lies in E.
inline std::vector<std::vector<double>> rejection_sample(const ReluNetwork& net, const Box& D,
                                                         const std::optional<Box>& E, int count, std::uint64_t seed,
                                                         long max_draws = 20000000) {
  Rng rng(seed);
  std::vector<std::vector<double>> out;
  for (long d = 0; d < max_draws && static_cast<int>(out.size()) < count; ++d) {
    auto x = uniform_point(D, rng);
    if (E) {
      auto y = forward(net, x);
      bool ok = true;
      for (std::size_t j = 0; j < y.size(); ++j) ok &= (*E)[j].contains(y[j]);
      if (!ok) continue;
    }
    out.push_back(std::move(x));
  }
  return out;
}

/// Largest amount by which the trace of x leaves `bounds`.
inline double trace_excess(const ReluNetwork& net, const BoundSet& bounds, const std::vector<double>& x) {
  Trace t = forward_trace(net, x);
  double worst = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k)
    for (std::size_t j = 0; j < t[k].size(); ++j)
      worst = std::max({worst, bounds.lower[k][j] - t[k][j], t[k][j] - bounds.upper[k][j]});
  return worst;
}

/// Solves A x = b by Gaussian elimination with partial pivoting; nullopt when singular.
inline std::optional<std::vector<double>> solve_dense(std::vector<std::vector<double>> A, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(A[r][c]) > std::abs(A[p][c])) p = r;
    if (std::abs(A[p][c]) < 1e-10) return std::nullopt;
    std::swap(A[p], A[c]);
    std::swap(b[p], b[c]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = A[r][c] / A[c][c];
      if (f == 0.0) continue;
      for (std::size_t k = c; k < n; ++k) A[r][k] -= f * A[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / A[i][i];
  return x;
}

/// Optimum of a bounded LP by enumerating every vertex (all finite variable bounds).
/// Returns nullopt when no vertex is feasible.
inline std::optional<double> vertex_enumeration(const LinearModel& m, double tol = 1e-7) {
  const int n = m.num_variables();
  struct Plane {
    std::vector<double> a;
    double rhs;
  };
  std::vector<Plane> planes;
  for (const auto& c : m.constraints()) {
    Plane p{std::vector<double>(n, 0.0), c.rhs};
    for (const auto& t : c.terms) p.a[t.var] += t.coeff;
    planes.push_back(p);
  }
  for (int j = 0; j < n; ++j) {
    Plane lo{std::vector<double>(n, 0.0), m.variable(j).lower};
    lo.a[j] = 1.0;
    Plane hi = lo;
    hi.rhs = m.variable(j).upper;
    planes.push_back(lo);
    planes.push_back(hi);
  }
  const int P = static_cast<int>(planes.size());
  std::optional<double> best;
  std::vector<int> pick(n);
  for (int i = 0; i < n; ++i) pick[i] = i;
  while (true) {
    std::vector<std::vector<double>> A;
    std::vector<double> b;
    for (int i : pick) {
      A.push_back(planes[i].a);
      b.push_back(planes[i].rhs);
    }
    if (auto x = solve_dense(A, b); x && m.max_violation(*x) <= tol) {
      double v = m.evaluate_objective(*x);
      const bool better = !best || (m.sense() == Sense::maximize ? v > *best : v < *best);
      if (better) best = v;
    }
    int i = n - 1;
    while (i >= 0 && pick[i] == P - n + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int k = i + 1; k < n; ++k) pick[k] = pick[k - 1] + 1;
  }
  return best;
}

/// MILP optimum by fixing every binary assignment and solving the remaining LP.
inline std::optional<double> binary_enumeration(const MilpModel& model, const LpOptions& lp = {}) {
  const auto& bins = model.binaries;
  std::optional<double> best;
  const bool maximize = model.base.sense() == Sense::maximize;
  for (long mask = 0; mask < (1L << bins.size()); ++mask) {
    LinearModel m = model.base;
    bool ok = true;
    for (std::size_t i = 0; i < bins.size(); ++i) {
      const double v = (mask >> i) & 1L ? 1.0 : 0.0;
      const auto& var = m.variable(bins[i]);
      if (v < var.lower || v > var.upper) ok = false;
      else m.set_bounds(bins[i], v, v);
    }
    if (!ok) continue;
    LpSolution s = solve_lp(m, lp);
    if (s.status != LpStatus::optimal) continue;
    if (!best || (maximize ? s.objective_value > *best : s.objective_value < *best)) best = s.objective_value;
  }
  return best;
}

}  // namespace relumip::testing
