#pragma once

#include <iosfwd>
#include <limits>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

namespace relumip {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Relation { less_equal, equal, greater_equal };
enum class Sense { minimize, maximize };

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = kInf;
};

struct Term {
  int var = 0;
  double coeff = 0.0;
};

struct Constraint {
  std::vector<Term> terms;
  Relation relation = Relation::less_equal;
  double rhs = 0.0;
  std::string name;
};

/// Linear program: variables with bounds, linear rows, linear objective.
class LinearModel {
 public:
  /// Throws on duplicate names, lower > upper, NaN bounds or lower = +inf / upper = -inf.
  int add_variable(std::string name, double lower = 0.0, double upper = kInf);

  /// Duplicate variables in `terms` are merged and zero coefficients dropped.
  int add_constraint(std::vector<Term> terms, Relation relation, double rhs, std::string name = {});

  void set_objective(Sense sense, std::vector<Term> terms, double offset = 0.0);
  void set_objective_coeff(int var, double coeff);
  void set_sense(Sense sense) { sense_ = sense; }
  void set_bounds(int var, double lower, double upper);

  int num_variables() const { return static_cast<int>(vars_.size()); }
  int num_constraints() const { return static_cast<int>(rows_.size()); }
  const std::vector<Variable>& variables() const { return vars_; }
  const Variable& variable(int j) const { return vars_.at(j); }
  const std::vector<Constraint>& constraints() const { return rows_; }
  const std::vector<double>& objective() const { return obj_; }
  double objective_offset() const { return offset_; }
  Sense sense() const { return sense_; }

  /// Index of the named variable, or -1.
  int find_variable(const std::string& name) const;

  double evaluate_objective(const std::vector<double>& x) const;
  /// Largest absolute violation over variable bounds and constraints.
  double max_violation(const std::vector<double>& x) const;

 private:
  std::vector<Term> normalize(std::vector<Term> terms) const;

  std::vector<Variable> vars_;
  std::vector<Constraint> rows_;
  std::vector<double> obj_;
  double offset_ = 0.0;
  Sense sense_ = Sense::minimize;
  std::unordered_map<std::string, int> index_;
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

const char* to_string(LpStatus status);

struct LpOptions {
  double feasibility_tolerance = 1e-7;
  double pivot_tolerance = 1e-9;
  double optimality_tolerance = 1e-9;
  /// 0 picks a limit proportional to the model size.
  long max_iterations = 0;
  int refactor_interval = 100;
};

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  std::vector<double> x;
  double objective_value = 0.0;
  long iterations = 0;
};

/// Simplex basis: basic column per row and a position code for every column.
///
/// Columns 0..n-1 are the model variables, column n+i is the activity of row i.
struct LpBasis {
  enum : signed char { at_lower = 0, at_upper = 1, at_zero = 2, basic = 3 };
  std::vector<int> head;
  std::vector<signed char> state;

  bool empty() const { return head.empty() && state.empty(); }
};

class SimplexEngine;

/// Re-solvable LP: variable bounds may be changed between solves and the
/// previous basis is used as the starting point.
class LpSolver {
 public:
  explicit LpSolver(const LinearModel& model, LpOptions options = {});
  ~LpSolver();
  LpSolver(LpSolver&&) noexcept;
  LpSolver& operator=(LpSolver&&) noexcept;

  void set_bounds(int var, double lower, double upper);
  double lower(int var) const;
  double upper(int var) const;

  LpSolution solve();

  LpBasis basis() const;
  void set_basis(const LpBasis& basis);

 private:
  std::unique_ptr<SimplexEngine> engine_;
};

LpSolution solve_lp(const LinearModel& model, const LpOptions& options = {});

/// CPLEX-LP text for debugging. Names are sanitized; write-only.
void write_cplex_lp(const LinearModel& model, std::ostream& out);

}  // namespace relumip
