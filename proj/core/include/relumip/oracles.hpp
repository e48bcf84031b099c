#pragma once

#include <functional>
#include <span>
#include <vector>

#include "relumip/encode.hpp"
#include "relumip/net.hpp"

namespace relumip {

using ScalarFn = std::function<double(std::span<const double>)>;

struct GridResult {
  bool found = false;
  double value = 0.0;
  std::vector<double> x;
  long points = 0;
};

/// Best objective over a uniform grid of `density` points per dimension of `box`,
/// keeping only points with |constraint(x)| <= band when a constraint is given.
/// Throws when the grid would exceed 10^7 points.
GridResult brute_force_optimum(const ScalarFn& objective, const ScalarFn& constraint, const Box& box, int density,
                               double band, Sense sense);

/// All roots of a continuous function on [lo, hi], located by sign changes on a
/// uniform sample of `samples` intervals and refined by bisection.
std::vector<double> find_roots(const std::function<double(double)>& f, double lo, double hi, int samples = 20000);

/// Exact-up-to-bisection minimum of f1 over {x in [lo,hi] : f2(x) = alpha} for
/// scalar-input networks. Returns found = false when the level set is empty.
GridResult qn_oracle_1d(const ReluNetwork& net1, const ReluNetwork& net2, double alpha, double lo = -1.0,
                        double hi = 1.0);

/// Minimum of f1 over the level set f2 = alpha in [-1,1]^2, found by root finding
/// along axis-parallel lines followed by local zooming around the best points.
GridResult qn_oracle_2d(const ReluNetwork& net1, const ReluNetwork& net2, double alpha, int lines = 1000);

struct PatternExtrema {
  double min = 0.0;
  double max = 0.0;
  long patterns = 0;
  long feasible_patterns = 0;
};

/// Min and max of the scalar output over `box` by solving one LP per activation
/// pattern of the hidden layer nodes (at most 16 hidden nodes).
PatternExtrema pattern_extrema(const ReluNetwork& net, const Box& box);

}  // namespace relumip
