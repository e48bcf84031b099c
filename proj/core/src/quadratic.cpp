#include "relumip/quadratic.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "relumip/random.hpp"

namespace relumip {

double QuadraticSpec::operator()(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != n) throw std::invalid_argument("quadratic: input dimension mismatch");
  double v = c;
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) row += A[static_cast<std::size_t>(i) * n + j] * x[j];
    v += x[i] * row + b[i] * x[i];
  }
  return v;
}

QuadraticSpec gen_quadratic(int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen_quadratic: n must be positive");
  QuadraticSpec q;
  q.n = n;
  q.seed = seed;
  Rng rng(derive_seed(seed, "quadratic"));
  std::normal_distribution<double> quad(0.0, std::sqrt(5.0)), unit(0.0, 1.0);
  q.A.resize(static_cast<std::size_t>(n) * n);
  for (double& a : q.A) a = quad(rng);
  q.b.resize(n);
  for (double& v : q.b) v = unit(rng);
  q.c = unit(rng);
  return q;
}

LabeledDataset sample_quadratic(const QuadraticSpec& q, int count, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("sample_quadratic: count must be positive");
  Rng rng(derive_seed(seed, "samples"));
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  LabeledDataset d;
  for (int s = 0; s < count; ++s) {
    std::vector<double> x(q.n);
    for (double& v : x) v = u(rng);
    d.targets.push_back({q(x)});
    d.inputs.push_back(std::move(x));
  }
  return d;
}

Box unit_box(int n) { return Box(static_cast<std::size_t>(n), Interval{-1.0, 1.0}); }

QnArchitecture qn_architecture(int n) {
  switch (n) {
    case 1: return {{1, 10, 5, 1}, 100};
    case 2: return {{2, 20, 10, 1}, 500};
    case 3: return {{3, 40, 20, 1}, 2000};
    case 4: return {{4, 50, 20, 1}, 5000};
    case 5: return {{5, 50, 30, 30, 1}, 10000};
    case 6: return {{6, 80, 40, 40, 1}, 20000};
    default: throw std::invalid_argument("qn_architecture: n must be in 1..6");
  }
}

TrainConfig qn_train_config(int n, std::uint64_t seed) {
  TrainConfig c;
  c.epochs = n == 1 ? 15000 : n == 2 ? 4000 : 1500;
  c.batch_size = 10;
  c.learning_rate = n == 2 ? 0.03 : 0.01;
  c.l2_lambda = 0.0;
  c.seed = seed;
  return c;
}

TrainedSurrogate train_quadratic_surrogate(int n, std::uint64_t seed) {
  const QnArchitecture arch = qn_architecture(n);
  TrainedSurrogate s;
  s.spec = gen_quadratic(n, seed);
  s.data = sample_quadratic(s.spec, arch.samples, seed);
  ReluNetwork init = he_initialize(arch.layers, derive_seed(seed, "init"));
  s.net = sgd_train(init, s.data, qn_train_config(n, derive_seed(seed, "train")));
  s.mape = mape(s.net, s.data, true);
  return s;
}

double choose_alpha(const ReluNetwork& net, std::uint64_t seed, int samples) {
  if (samples < 1) throw std::invalid_argument("choose_alpha: samples must be positive");
  Rng rng(derive_seed(seed, "alpha"));
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> values;
  std::vector<double> x(net.input_size());
  for (int s = 0; s < samples; ++s) {
    for (double& v : x) v = u(rng);
    values.push_back(forward(net, x)[0]);
  }
  auto mid = values.begin() + values.size() / 2;
  std::nth_element(values.begin(), mid, values.end());
  return *mid;
}

BuiltProblem build_qn(const ReluNetwork& net1, const BoundSet& bounds1, const ReluNetwork& net2,
                      const BoundSet& bounds2, double alpha) {
  if (net1.input_size() != net2.input_size()) throw std::invalid_argument("build_qn: networks differ in input size");
  if (net1.output_size() != 1 || net2.output_size() != 1) throw std::invalid_argument("build_qn: networks must be scalar");
  const int n = net1.input_size();
  ProblemSpec spec;
  std::vector<std::string> xs;
  for (int i = 0; i < n; ++i) {
    xs.push_back("x" + std::to_string(i));
    spec.variables.push_back({xs.back(), -1.0, 1.0, false});
  }
  spec.networks.push_back({net1, bounds1, {}, xs, {}, std::nullopt});
  spec.networks.push_back({net2, bounds2, {}, xs, {}, Box{{alpha, alpha}}});
  spec.sense = Sense::minimize;
  spec.objective = {{"net0_x_" + std::to_string(net1.depth()) + "_0", 1.0}};
  return build_problem(spec);
}

BuiltProblem build_qn(const ReluNetwork& net1, const ReluNetwork& net2, double alpha) {
  const Box box = unit_box(net1.input_size());
  return build_qn(net1, lrr_bounds(net1, box), net2, lrr_bounds(net2, box), alpha);
}

QnSolution solve_qn(const ReluNetwork& net1, const ReluNetwork& net2, double alpha, const BtScheme& scheme,
                    const SolveParams& params, const BtParams& bt_params) {
  const Box box = unit_box(net1.input_size());
  QnSolution sol;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    sol.bt1 = tighten(net1, box, std::nullopt, scheme, bt_params);
    sol.bt2 = tighten(net2, box, Box{{alpha, alpha}}, scheme, bt_params);
  } catch (const InfeasibleBoundsError&) {
    sol.bt_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    sol.result.status = MilpStatus::infeasible;
    sol.result.best_bound = kInf;
    return sol;
  }
  sol.bt_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  BuiltProblem p = build_qn(net1, sol.bt1->bounds, net2, sol.bt2->bounds, alpha);
  SolveParams sp = params;
  if (sp.time_limit_seconds) sp.time_limit_seconds = std::max(0.0, *sp.time_limit_seconds - sol.bt_time);
  sol.result = solve_milp(p.model, sp);
  sol.opt_time = sol.result.wall_time;
  if (sol.result.incumbent)
    for (int v : p.embeddings[0].inputs()) sol.x.push_back((*sol.result.incumbent)[v]);
  return sol;
}

}  // namespace relumip
