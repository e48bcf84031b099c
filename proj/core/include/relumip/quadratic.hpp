#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "relumip/bt.hpp"
#include "relumip/encode.hpp"
#include "relumip/milp.hpp"
#include "relumip/net.hpp"
#include "relumip/trainer.hpp"

namespace relumip {

/// q(x) = x^T A x + b^T x + c.
struct QuadraticSpec {
  int n = 1;
  std::vector<double> A;  // n x n, row-major
  std::vector<double> b;
  double c = 0.0;
  std::uint64_t seed = 0;

  double operator()(std::span<const double> x) const;
};

/// A_ij ~ N(0, 5) (variance 5), b_i ~ N(0, 1), c ~ N(0, 1).
QuadraticSpec gen_quadratic(int n, std::uint64_t seed);

/// `count` points drawn uniformly from [-1, 1]^n with exact targets.
LabeledDataset sample_quadratic(const QuadraticSpec& q, int count, std::uint64_t seed);

Box unit_box(int n);

struct QnArchitecture {
  std::vector<int> layers;
  int samples = 0;
};

/// Network shape and training-set size per input dimension (n = 1..6).
QnArchitecture qn_architecture(int n);

TrainConfig qn_train_config(int n, std::uint64_t seed);

struct TrainedSurrogate {
  QuadraticSpec spec;
  LabeledDataset data;
  ReluNetwork net;
  double mape = 0.0;  // on the training samples
};

/// Generates a quadratic, samples it and fits the architecture for n.
TrainedSurrogate train_quadratic_surrogate(int n, std::uint64_t seed);

/// Median of f over uniform samples of [-1,1]^n; lies inside the range of f on the box.
double choose_alpha(const ReluNetwork& net, std::uint64_t seed, int samples = 10000);

/// min f1(x) s.t. f2(x) = alpha, x in [-1,1]^n, with both networks sharing x.
BuiltProblem build_qn(const ReluNetwork& net1, const BoundSet& bounds1, const ReluNetwork& net2,
                      const BoundSet& bounds2, double alpha);
/// Same model with interval-arithmetic bounds.
BuiltProblem build_qn(const ReluNetwork& net1, const ReluNetwork& net2, double alpha);

struct QnSolution {
  MilpResult result;
  std::vector<double> x;  // input part of the incumbent, empty without one
  double bt_time = 0.0;
  double opt_time = 0.0;
  std::optional<BtReport> bt1, bt2;
};

/// Tightens both networks with `scheme` (net2 sees E = {alpha}) and solves Q_n.
QnSolution solve_qn(const ReluNetwork& net1, const ReluNetwork& net2, double alpha, const BtScheme& scheme,
                    const SolveParams& params = {}, const BtParams& bt_params = {});

}  // namespace relumip
