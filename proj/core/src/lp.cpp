#include "relumip/lp.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace relumip {

namespace {

void check_bounds(const std::string& name, double lower, double upper) {
  if (std::isnan(lower) || std::isnan(upper)) throw std::invalid_argument("variable " + name + ": NaN bound");
  if (lower == kInf || upper == -kInf) throw std::invalid_argument("variable " + name + ": empty bound range");
  if (lower > upper) throw std::invalid_argument("variable " + name + ": lower bound exceeds upper bound");
}

}  // namespace

int LinearModel::add_variable(std::string name, double lower, double upper) {
  if (name.empty()) name = "v" + std::to_string(vars_.size());
  check_bounds(name, lower, upper);
  if (index_.count(name)) throw std::invalid_argument("duplicate variable name " + name);
  int j = static_cast<int>(vars_.size());
  index_.emplace(name, j);
  vars_.push_back({std::move(name), lower, upper});
  obj_.push_back(0.0);
  return j;
}

std::vector<Term> LinearModel::normalize(std::vector<Term> terms) const {
  for (const auto& t : terms) {
    if (t.var < 0 || t.var >= num_variables()) throw std::out_of_range("term references unknown variable");
    if (!std::isfinite(t.coeff)) throw std::invalid_argument("non-finite coefficient");
  }
  std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.var < b.var; });
  std::vector<Term> out;
  for (const auto& t : terms) {
    if (!out.empty() && out.back().var == t.var)
      out.back().coeff += t.coeff;
    else
      out.push_back(t);
  }
  std::erase_if(out, [](const Term& t) { return t.coeff == 0.0; });
  return out;
}

int LinearModel::add_constraint(std::vector<Term> terms, Relation relation, double rhs, std::string name) {
  if (!std::isfinite(rhs)) throw std::invalid_argument("constraint " + name + ": non-finite right-hand side");
  rows_.push_back({normalize(std::move(terms)), relation, rhs, std::move(name)});
  return num_constraints() - 1;
}

void LinearModel::set_objective(Sense sense, std::vector<Term> terms, double offset) {
  sense_ = sense;
  std::fill(obj_.begin(), obj_.end(), 0.0);
  for (const auto& t : normalize(std::move(terms))) obj_[t.var] = t.coeff;
  offset_ = offset;
}

void LinearModel::set_objective_coeff(int var, double coeff) {
  if (!std::isfinite(coeff)) throw std::invalid_argument("non-finite objective coefficient");
  obj_.at(var) = coeff;
}

void LinearModel::set_bounds(int var, double lower, double upper) {
  auto& v = vars_.at(var);
  check_bounds(v.name, lower, upper);
  v.lower = lower;
  v.upper = upper;
}

int LinearModel::find_variable(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? -1 : it->second;
}

double LinearModel::evaluate_objective(const std::vector<double>& x) const {
  double v = offset_;
  for (int j = 0; j < num_variables(); ++j)
    if (obj_[j] != 0.0) v += obj_[j] * x.at(j);
  return v;
}

double LinearModel::max_violation(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != num_variables()) throw std::invalid_argument("solution size mismatch");
  double worst = 0.0;
  for (int j = 0; j < num_variables(); ++j) {
    worst = std::max(worst, vars_[j].lower - x[j]);
    worst = std::max(worst, x[j] - vars_[j].upper);
  }
  for (const auto& r : rows_) {
    double act = 0.0;
    for (const auto& t : r.terms) act += t.coeff * x[t.var];
    double d = act - r.rhs;
    if (r.relation == Relation::less_equal) worst = std::max(worst, d);
    else if (r.relation == Relation::greater_equal) worst = std::max(worst, -d);
    else worst = std::max(worst, std::abs(d));
  }
  return worst;
}

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

LpSolution solve_lp(const LinearModel& model, const LpOptions& options) {
  LpSolver solver(model, options);
  return solver.solve();
}

namespace {

std::string lp_name(const std::string& raw, const char* prefix, int index) {
  if (raw.empty()) return prefix + std::to_string(index);
  std::string s;
  for (char c : raw) s += (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.') ? c : '_';
  if (std::isdigit(static_cast<unsigned char>(s[0])) || s[0] == '.') s = "_" + s;
  return s;
}

void write_terms(std::ostream& out, const std::vector<Term>& terms, const std::vector<std::string>& names) {
  if (terms.empty()) {
    out << " 0 " << names.front();
    return;
  }
  for (const auto& t : terms) out << (t.coeff < 0 ? " - " : " + ") << std::abs(t.coeff) << ' ' << names[t.var];
}

}  // namespace

void write_cplex_lp(const LinearModel& model, std::ostream& out) {
  auto old_prec = out.precision(17);
  std::vector<std::string> names;
  for (int j = 0; j < model.num_variables(); ++j) names.push_back(lp_name(model.variable(j).name, "x", j));
  out << (model.sense() == Sense::maximize ? "Maximize\n" : "Minimize\n") << " obj:";
  std::vector<Term> obj;
  for (int j = 0; j < model.num_variables(); ++j)
    if (model.objective()[j] != 0.0) obj.push_back({j, model.objective()[j]});
  if (model.num_variables() > 0) write_terms(out, obj, names);
  out << "\nSubject To\n";
  for (int i = 0; i < model.num_constraints(); ++i) {
    const auto& r = model.constraints()[i];
    if (r.terms.empty()) continue;
    out << ' ' << lp_name(r.name, "c", i) << ':';
    write_terms(out, r.terms, names);
    out << (r.relation == Relation::less_equal ? " <= " : r.relation == Relation::equal ? " = " : " >= ") << r.rhs
        << '\n';
  }
  out << "Bounds\n";
  for (int j = 0; j < model.num_variables(); ++j) {
    const auto& v = model.variable(j);
    if (v.lower == -kInf && v.upper == kInf) out << ' ' << names[j] << " free\n";
    else if (v.lower == v.upper) out << ' ' << names[j] << " = " << v.lower << '\n';
    else {
      out << ' ';
      if (v.lower == -kInf) out << "-inf"; else out << v.lower;
      out << " <= " << names[j] << " <= ";
      if (v.upper == kInf) out << "+inf"; else out << v.upper;
      out << '\n';
    }
  }
  out << "End\n";
  out.precision(old_prec);
}

}  // namespace relumip
