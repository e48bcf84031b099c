// Dense bounded-variable primal simplex.
//
// Every row i carries an activity column r_i with A x - r = 0, so the working
// matrix is [A | -I] with zero right-hand side and all constraint senses become
// bounds on r. Phase 1 minimizes the sum of bound violations of the basic
// variables from whatever basis is loaded (no artificials), which lets branch
// and bound restart from a parent basis after changing bounds.

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "relumip/lp.hpp"

namespace relumip {

class SimplexEngine {
 public:
  SimplexEngine(const LinearModel& model, const LpOptions& options);

  void set_bounds(int var, double lower, double upper);
  double lower(int var) const { return lo_.at(var); }
  double upper(int var) const { return up_.at(var); }

  LpSolution solve();
  LpBasis basis() const;
  void set_basis(const LpBasis& b);

 private:
  double& t(int i, int j) { return T_[static_cast<std::size_t>(i) * ncol_ + j]; }
  double t(int i, int j) const { return T_[static_cast<std::size_t>(i) * ncol_ + j]; }

  void place_nonbasic(int j, signed char preferred);
  void slack_basis();
  void refactor();
  void compute_primal();
  void pivot_on(int r, int q);
  bool verify() const;
  LpSolution finish(LpStatus status, long iterations) const;

  LpOptions opt_;
  int n_ = 0;     // structural columns
  int m_ = 0;     // rows
  int ncol_ = 0;  // n + m
  bool trivially_infeasible_ = false;
  Sense sense_ = Sense::minimize;
  double offset_ = 0.0;
  std::vector<double> A_;     // m x n
  std::vector<double> cost_;  // minimization costs, ncol
  std::vector<double> lo_, up_;
  std::vector<double> T_;     // B^{-1} [A | -I]
  std::vector<int> head_;
  std::vector<int> row_of_;   // basic row per column, -1 if nonbasic
  std::vector<signed char> state_;
  std::vector<double> x_;
  int pivots_since_refactor_ = 0;
  bool factored_ = false;

  std::vector<int> nz_;  // scratch
};

SimplexEngine::SimplexEngine(const LinearModel& model, const LpOptions& options) : opt_(options) {
  n_ = model.num_variables();
  sense_ = model.sense();
  offset_ = model.objective_offset();
  std::vector<const Constraint*> rows;
  for (const auto& c : model.constraints()) {
    if (!c.terms.empty()) {
      rows.push_back(&c);
      continue;
    }
    bool ok = c.relation == Relation::less_equal ? 0.0 <= c.rhs + opt_.feasibility_tolerance
              : c.relation == Relation::greater_equal ? 0.0 >= c.rhs - opt_.feasibility_tolerance
                                                      : std::abs(c.rhs) <= opt_.feasibility_tolerance;
    if (!ok) trivially_infeasible_ = true;
  }
  m_ = static_cast<int>(rows.size());
  ncol_ = n_ + m_;
  A_.assign(static_cast<std::size_t>(m_) * n_, 0.0);
  lo_.resize(ncol_);
  up_.resize(ncol_);
  cost_.assign(ncol_, 0.0);
  for (int j = 0; j < n_; ++j) {
    lo_[j] = model.variable(j).lower;
    up_[j] = model.variable(j).upper;
    double c = model.objective()[j];
    cost_[j] = sense_ == Sense::maximize ? -c : c;
  }
  for (int i = 0; i < m_; ++i) {
    const Constraint& c = *rows[i];
    for (const auto& term : c.terms) A_[static_cast<std::size_t>(i) * n_ + term.var] = term.coeff;
    lo_[n_ + i] = c.relation == Relation::less_equal ? -kInf : c.rhs;
    up_[n_ + i] = c.relation == Relation::greater_equal ? kInf : c.rhs;
  }
  if (opt_.max_iterations <= 0) opt_.max_iterations = 10000 + 50L * (m_ + ncol_);
  x_.assign(ncol_, 0.0);
  state_.assign(ncol_, LpBasis::at_lower);
  row_of_.assign(ncol_, -1);
  slack_basis();
}

void SimplexEngine::place_nonbasic(int j, signed char preferred) {
  row_of_[j] = -1;
  if (preferred == LpBasis::at_upper && up_[j] < kInf) {
    state_[j] = LpBasis::at_upper;
    x_[j] = up_[j];
  } else if (lo_[j] > -kInf) {
    state_[j] = LpBasis::at_lower;
    x_[j] = lo_[j];
  } else if (up_[j] < kInf) {
    state_[j] = LpBasis::at_upper;
    x_[j] = up_[j];
  } else {
    state_[j] = LpBasis::at_zero;
    x_[j] = 0.0;
  }
}

void SimplexEngine::slack_basis() {
  head_.resize(m_);
  for (int j = 0; j < n_; ++j) place_nonbasic(j, state_[j]);
  for (int i = 0; i < m_; ++i) {
    head_[i] = n_ + i;
    state_[n_ + i] = LpBasis::basic;
    row_of_[n_ + i] = i;
  }
  factored_ = false;
}

void SimplexEngine::set_bounds(int var, double lower, double upper) {
  if (var < 0 || var >= n_) throw std::out_of_range("set_bounds: unknown variable");
  if (std::isnan(lower) || std::isnan(upper) || lower > upper)
    throw std::invalid_argument("set_bounds: invalid bounds");
  lo_[var] = lower;
  up_[var] = upper;
  if (state_[var] != LpBasis::basic) place_nonbasic(var, state_[var]);
}

LpBasis SimplexEngine::basis() const { return {head_, state_}; }

void SimplexEngine::set_basis(const LpBasis& b) {
  if (b.empty()) return;
  if (static_cast<int>(b.head.size()) != m_ || static_cast<int>(b.state.size()) != ncol_)
    throw std::invalid_argument("set_basis: basis does not match model dimensions");
  head_ = b.head;
  std::fill(row_of_.begin(), row_of_.end(), -1);
  for (int j = 0; j < ncol_; ++j) {
    if (b.state[j] == LpBasis::basic) state_[j] = LpBasis::basic;
    else place_nonbasic(j, b.state[j]);
  }
  factored_ = false;
}

void SimplexEngine::pivot_on(int r, int q) {
  double* row_r = T_.data() + static_cast<std::size_t>(r) * ncol_;
  const double inv = 1.0 / row_r[q];
  nz_.clear();
  for (int j = 0; j < ncol_; ++j) {
    if (row_r[j] != 0.0) {
      row_r[j] *= inv;
      nz_.push_back(j);
    }
  }
  row_r[q] = 1.0;
  for (int i = 0; i < m_; ++i) {
    if (i == r) continue;
    double* row_i = T_.data() + static_cast<std::size_t>(i) * ncol_;
    const double f = row_i[q];
    if (f == 0.0) continue;
    for (int j : nz_) row_i[j] -= f * row_r[j];
    row_i[q] = 0.0;
  }
}

void SimplexEngine::refactor() {
  T_.assign(static_cast<std::size_t>(m_) * ncol_, 0.0);
  for (int i = 0; i < m_; ++i) {
    std::copy_n(A_.data() + static_cast<std::size_t>(i) * n_, n_, T_.data() + static_cast<std::size_t>(i) * ncol_);
    t(i, n_ + i) = -1.0;
  }
  std::vector<int> wanted;
  for (int j = 0; j < ncol_; ++j)
    if (state_[j] == LpBasis::basic) wanted.push_back(j);
  // Structural columns first: row activities can always fill the gaps.
  std::stable_partition(wanted.begin(), wanted.end(), [&](int j) { return j < n_; });
  std::vector<char> used(m_, 0);
  std::vector<int> head(m_, -1);
  std::fill(row_of_.begin(), row_of_.end(), -1);
  for (int q : wanted) {
    int best = -1;
    double best_abs = 1e-9;
    for (int i = 0; i < m_; ++i) {
      if (used[i]) continue;
      double a = std::abs(t(i, q));
      if (a > best_abs) {
        best_abs = a;
        best = i;
      }
    }
    if (best < 0) {
      place_nonbasic(q, LpBasis::at_lower);
      continue;
    }
    pivot_on(best, q);
    used[best] = 1;
    head[best] = q;
  }
  for (int i = 0; i < m_; ++i) {
    if (used[i]) continue;
    pivot_on(i, n_ + i);
    head[i] = n_ + i;
  }
  head_ = head;
  for (int i = 0; i < m_; ++i) {
    state_[head_[i]] = LpBasis::basic;
    row_of_[head_[i]] = i;
  }
  for (int j = 0; j < ncol_; ++j)
    if (state_[j] == LpBasis::basic && row_of_[j] < 0) place_nonbasic(j, LpBasis::at_lower);
  pivots_since_refactor_ = 0;
  factored_ = true;
}

void SimplexEngine::compute_primal() {
  std::vector<int> active;
  for (int j = 0; j < ncol_; ++j)
    if (state_[j] != LpBasis::basic && x_[j] != 0.0) active.push_back(j);
  for (int i = 0; i < m_; ++i) {
    double v = 0.0;
    for (int j : active) v -= t(i, j) * x_[j];
    x_[head_[i]] = v;
  }
}

bool SimplexEngine::verify() const {
  const double tol = opt_.feasibility_tolerance;
  for (int j = 0; j < n_; ++j)
    if (x_[j] < lo_[j] - tol || x_[j] > up_[j] + tol) return false;
  for (int i = 0; i < m_; ++i) {
    double act = 0.0;
    const double* a = A_.data() + static_cast<std::size_t>(i) * n_;
    for (int j = 0; j < n_; ++j) act += a[j] * x_[j];
    if (act < lo_[n_ + i] - tol || act > up_[n_ + i] + tol) return false;
  }
  return true;
}

LpSolution SimplexEngine::finish(LpStatus status, long iterations) const {
  LpSolution s;
  s.status = status;
  s.iterations = iterations;
  s.x.assign(x_.begin(), x_.begin() + n_);
  double v = 0.0;
  for (int j = 0; j < n_; ++j) v += cost_[j] * x_[j];
  s.objective_value = (sense_ == Sense::maximize ? -v : v) + offset_;
  return s;
}

LpSolution SimplexEngine::solve() {
  if (trivially_infeasible_) return finish(LpStatus::infeasible, 0);
  for (int j = 0; j < n_; ++j)
    if (lo_[j] > up_[j]) return finish(LpStatus::infeasible, 0);
  if (!factored_) refactor();
  compute_primal();

  const double htol = 0.5 * opt_.feasibility_tolerance;
  const double ptol = opt_.pivot_tolerance;
  const double dtol = opt_.optimality_tolerance;
  const long degenerate_limit = 5L * (m_ + n_);

  std::vector<double> cb(m_), d(ncol_), alpha(m_);
  long iterations = 0, degenerate = 0;
  bool bland = false, fresh = true;
  int repairs = 0;

  while (true) {
    if (iterations >= opt_.max_iterations) return finish(LpStatus::iteration_limit, iterations);
    if (pivots_since_refactor_ >= opt_.refactor_interval) {
      refactor();
      compute_primal();
      fresh = true;
    }

    bool phase1 = false;
    for (int i = 0; i < m_; ++i) {
      int j = head_[i];
      if (x_[j] < lo_[j] - htol) { cb[i] = -1.0; phase1 = true; }
      else if (x_[j] > up_[j] + htol) { cb[i] = 1.0; phase1 = true; }
      else cb[i] = 0.0;
    }
    if (!phase1)
      for (int i = 0; i < m_; ++i) cb[i] = cost_[head_[i]];

    // reduced costs d_j = c_j - cb^T T_j
    if (phase1) std::fill(d.begin(), d.end(), 0.0);
    else d = cost_;
    for (int i = 0; i < m_; ++i) {
      if (cb[i] == 0.0) continue;
      const double* row = T_.data() + static_cast<std::size_t>(i) * ncol_;
      for (int j = 0; j < ncol_; ++j) d[j] -= cb[i] * row[j];
    }

    int q = -1, dir = 0;
    double best = 0.0;
    for (int j = 0; j < ncol_; ++j) {
      const signed char s = state_[j];
      if (s == LpBasis::basic) continue;
      int dj = 0;
      if (d[j] < -dtol && (s == LpBasis::at_zero || (s == LpBasis::at_lower && up_[j] > lo_[j]))) dj = 1;
      else if (d[j] > dtol && (s == LpBasis::at_zero || (s == LpBasis::at_upper && up_[j] > lo_[j]))) dj = -1;
      if (dj == 0) continue;
      if (bland) {
        q = j;
        dir = dj;
        break;
      }
      if (std::abs(d[j]) > best) {
        best = std::abs(d[j]);
        q = j;
        dir = dj;
      }
    }

    if (q < 0) {
      if (!fresh) {
        refactor();
        compute_primal();
        fresh = true;
        continue;
      }
      if (phase1) return finish(LpStatus::infeasible, iterations);
      if (!verify() && repairs < 3) {
        ++repairs;
        slack_basis();
        refactor();
        compute_primal();
        continue;
      }
      return finish(LpStatus::optimal, iterations);
    }

    for (int i = 0; i < m_; ++i) alpha[i] = -dir * t(i, q);

    // Ratio test; in phase 1 infeasible basics stop at their violated bound.
    const double span = up_[q] - lo_[q];
    double theta_max = std::isfinite(span) ? span : kInf;
    auto limit = [&](int i, double& ratio) -> bool {
      const double a = alpha[i];
      if (std::abs(a) <= ptol) return false;
      const int j = head_[i];
      const double xi = x_[j];
      double target;
      if (a > 0) target = xi < lo_[j] - htol ? lo_[j] : up_[j];
      else target = xi > up_[j] + htol ? up_[j] : lo_[j];
      if (!std::isfinite(target)) return false;
      ratio = std::max((target - xi) / a, 0.0);
      return true;
    };

    int r = -1;
    double theta = 0.0;
    if (bland) {
      double best_ratio = kInf;
      for (int i = 0; i < m_; ++i) {
        double ex;
        if (!limit(i, ex)) continue;
        if (ex < best_ratio - 1e-12 || (ex <= best_ratio + 1e-12 && r >= 0 && head_[i] < head_[r])) {
          best_ratio = std::min(best_ratio, ex);
          r = i;
        }
      }
      if (r >= 0 && best_ratio >= theta_max) r = -1;
      theta = r >= 0 ? best_ratio : theta_max;
    } else {
      // Exact minimum ratio; near-ties go to the largest pivot.
      double theta_min = kInf;
      for (int i = 0; i < m_; ++i) {
        double ex;
        if (limit(i, ex)) theta_min = std::min(theta_min, ex);
      }
      double best_alpha = 0.0;
      if (theta_min < theta_max) {
        for (int i = 0; i < m_; ++i) {
          double ex;
          if (!limit(i, ex) || ex > theta_min + 1e-12) continue;
          if (std::abs(alpha[i]) > best_alpha) {
            best_alpha = std::abs(alpha[i]);
            r = i;
            theta = ex;
          }
        }
      }
      if (r < 0) theta = theta_max;
    }

    if (r < 0 && !std::isfinite(theta)) {
      if (phase1 || !fresh) {
        refactor();
        compute_primal();
        fresh = true;
        continue;
      }
      return finish(LpStatus::unbounded, iterations);
    }

    // Bound reached by the leaving column, judged before the step.
    bool leave_upper = false;
    if (r >= 0) {
      const int p = head_[r];
      leave_upper = alpha[r] > 0 ? !(x_[p] < lo_[p] - htol) : x_[p] > up_[p] + htol;
    }

    ++iterations;
    if (theta <= 1e-12) {
      if (++degenerate > degenerate_limit) bland = true;
    } else {
      degenerate = 0;
      bland = false;
    }

    for (int i = 0; i < m_; ++i)
      if (alpha[i] != 0.0) x_[head_[i]] += alpha[i] * theta;

    if (r < 0) {  // bound flip of the entering column
      if (dir > 0) { state_[q] = LpBasis::at_upper; x_[q] = up_[q]; }
      else { state_[q] = LpBasis::at_lower; x_[q] = lo_[q]; }
      fresh = false;
      continue;
    }

    x_[q] += dir * theta;
    const int p = head_[r];
    if (leave_upper) { state_[p] = LpBasis::at_upper; x_[p] = up_[p]; }
    else { state_[p] = LpBasis::at_lower; x_[p] = lo_[p]; }
    pivot_on(r, q);
    head_[r] = q;
    row_of_[q] = r;
    row_of_[p] = -1;
    state_[q] = LpBasis::basic;
    ++pivots_since_refactor_;
    fresh = false;
  }
}

LpSolver::LpSolver(const LinearModel& model, LpOptions options)
    : engine_(std::make_unique<SimplexEngine>(model, options)) {}
LpSolver::~LpSolver() = default;
LpSolver::LpSolver(LpSolver&&) noexcept = default;
LpSolver& LpSolver::operator=(LpSolver&&) noexcept = default;

void LpSolver::set_bounds(int var, double lower, double upper) { engine_->set_bounds(var, lower, upper); }
double LpSolver::lower(int var) const { return engine_->lower(var); }
double LpSolver::upper(int var) const { return engine_->upper(var); }
LpSolution LpSolver::solve() { return engine_->solve(); }
LpBasis LpSolver::basis() const { return engine_->basis(); }
void LpSolver::set_basis(const LpBasis& basis) { engine_->set_basis(basis); }

}  // namespace relumip
