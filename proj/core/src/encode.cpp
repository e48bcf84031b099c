#include "relumip/encode.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace relumip {

BoundSet BoundSet::unbounded(const ReluNetwork& net) {
  BoundSet b;
  for (int k = 0; k <= net.depth(); ++k) {
    b.lower.emplace_back(net.layer_size(k), -kInf);
    b.upper.emplace_back(net.layer_size(k), kInf);
  }
  return b;
}

Box BoundSet::layer_box(int k) const {
  Box box;
  for (std::size_t j = 0; j < lower.at(k).size(); ++j) box.push_back({lower[k][j], upper[k][j]});
  return box;
}

void BoundSet::set_layer(int k, const Box& box) {
  if (box.size() != lower.at(k).size()) throw std::invalid_argument("box size does not match layer " + std::to_string(k));
  for (std::size_t j = 0; j < box.size(); ++j) set(k, static_cast<int>(j), box[j]);
}

void BoundSet::validate(const ReluNetwork& net) const {
  if (depth() != net.depth() || upper.size() != lower.size())
    throw std::invalid_argument("bounds: layer count does not match network");
  for (int k = 0; k <= depth(); ++k) {
    if (static_cast<int>(lower[k].size()) != net.layer_size(k) || static_cast<int>(upper[k].size()) != net.layer_size(k))
      throw std::invalid_argument("bounds: layer " + std::to_string(k) + " size does not match network");
    for (int j = 0; j < net.layer_size(k); ++j) {
      double l = lower[k][j], u = upper[k][j];
      if (std::isnan(l) || std::isnan(u))
        throw std::invalid_argument("bounds: NaN at node (" + std::to_string(k) + "," + std::to_string(j) + ")");
      if (l > u)
        throw std::invalid_argument("bounds: negative width at node (" + std::to_string(k) + "," + std::to_string(j) + ")");
    }
  }
}

bool BoundSet::hidden_finite() const {
  for (int k = 1; k < depth(); ++k)
    for (std::size_t j = 0; j < lower[k].size(); ++j)
      if (!std::isfinite(lower[k][j]) || !std::isfinite(upper[k][j])) return false;
  return true;
}

std::string save_bounds(const BoundSet& bounds) {
  auto num = [](double v) -> nlohmann::json { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  nlohmann::json layers = nlohmann::json::array();
  for (int k = 0; k <= bounds.depth(); ++k) {
    nlohmann::json L = nlohmann::json::array(), U = nlohmann::json::array();
    for (double v : bounds.lower[k]) L.push_back(num(v));
    for (double v : bounds.upper[k]) U.push_back(num(v));
    layers.push_back({{"L", L}, {"U", U}});
  }
  return nlohmann::json{{"layers", layers}}.dump(1);
}

BoundSet load_bounds(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("bounds: malformed document: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("layers") || !doc["layers"].is_array())
    throw std::invalid_argument("bounds: expected object with a layers array");
  BoundSet b;
  for (const auto& layer : doc["layers"]) {
    const auto& L = layer.at("L");
    const auto& U = layer.at("U");
    if (!L.is_array() || !U.is_array() || L.size() != U.size())
      throw std::invalid_argument("bounds: L and U must be arrays of equal length");
    std::vector<double> lo, hi;
    for (const auto& v : L) {
      if (v.is_null()) lo.push_back(-kInf);
      else if (v.is_number()) lo.push_back(v.get<double>());
      else throw std::invalid_argument("bounds: non-numeric entry");
    }
    for (const auto& v : U) {
      if (v.is_null()) hi.push_back(kInf);
      else if (v.is_number()) hi.push_back(v.get<double>());
      else throw std::invalid_argument("bounds: non-numeric entry");
    }
    for (std::size_t j = 0; j < lo.size(); ++j)
      if (lo[j] > hi[j]) throw std::invalid_argument("bounds: L > U in layer " + std::to_string(b.lower.size()));
    b.lower.push_back(std::move(lo));
    b.upper.push_back(std::move(hi));
  }
  if (b.lower.size() < 2) throw std::invalid_argument("bounds: need at least two layers");
  return b;
}

void save_bounds_file(const BoundSet& bounds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << save_bounds(bounds) << '\n';
}

BoundSet load_bounds_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_bounds(ss.str());
}

void RelaxSpec::relax_layers(const ReluNetwork& net, int from, int to) {
  for (int k = std::max(from, 1); k <= std::min(to, net.depth() - 1); ++k)
    for (int j = 0; j < net.layer_size(k); ++j) relu_relaxed.insert({k, j});
}

void RelaxSpec::remove_layers(const ReluNetwork& net, int from, int to) {
  for (int k = std::max(from, 1); k <= std::min(to, net.depth()); ++k)
    for (int j = 0; j < net.layer_size(k); ++j) removed.insert({k, j});
}

std::vector<Term> NetworkEmbedding::pre_activation(const ReluNetwork& net, int k, int j, double& constant) const {
  if (k == 0) {
    constant = 0.0;
    return {{x[0].at(j), 1.0}};
  }
  const DenseLayer& l = net.layer(k);
  constant = l.bias.at(j);
  std::vector<Term> terms;
  for (int i = 0; i < l.inputs; ++i) {
    if (x[k - 1][i] < 0) throw std::logic_error("pre_activation: predecessor node is not embedded");
    if (l.weight(j, i) != 0.0) terms.push_back({x[k - 1][i], l.weight(j, i)});
  }
  return terms;
}

namespace {

std::string node_label(int k, int j) { return "(" + std::to_string(k) + "," + std::to_string(j) + ")"; }

void intersect_bounds(MilpModel& model, int var, double lo, double hi) {
  const auto& v = model.base.variable(var);
  double nlo = std::max(v.lower, lo), nhi = std::min(v.upper, hi);
  if (nlo > nhi) throw std::invalid_argument("empty bound intersection on variable " + v.name);
  model.base.set_bounds(var, nlo, nhi);
}

}  // namespace

NetworkEmbedding embed_network(MilpModel& model, const ReluNetwork& net, const BoundSet& bounds, const RelaxSpec& relax,
                               const EmbedOptions& options) {
  bounds.validate(net);
  const int K = net.depth();
  for (const auto& id : relax.relu_relaxed)
    if (id.layer < 1 || id.layer >= K || id.index < 0 || id.index >= net.layer_size(id.layer))
      throw std::invalid_argument("relaxed node " + node_label(id.layer, id.index) + " is not a hidden node");
  for (const auto& id : relax.removed)
    if (id.layer < 1 || id.layer > K || id.index < 0 || id.index >= net.layer_size(id.layer))
      throw std::invalid_argument("removed node " + node_label(id.layer, id.index) + " is not a hidden or output node");
  for (int k = 1; k <= K; ++k) {
    bool any_kept = false;
    for (int j = 0; j < net.layer_size(k); ++j) any_kept |= !relax.is_removed(k, j);
    if (!any_kept) continue;
    for (int i = 0; i < net.layer_size(k - 1); ++i)
      if (relax.is_removed(k - 1, i))
        throw std::invalid_argument("layer " + std::to_string(k) + " uses removed node " + node_label(k - 1, i));
  }
  if (!options.input_vars.empty() && static_cast<int>(options.input_vars.size()) != net.input_size())
    throw std::invalid_argument("input_vars size does not match network input size");
  if (!options.output_vars.empty() && static_cast<int>(options.output_vars.size()) != net.output_size())
    throw std::invalid_argument("output_vars size does not match network output size");
  if (options.output_box && static_cast<int>(options.output_box->size()) != net.output_size())
    throw std::invalid_argument("output box size does not match network output size");

  NetworkEmbedding emb;
  emb.prefix = options.prefix;
  emb.x.resize(K + 1);
  emb.s.resize(K + 1);
  emb.z.resize(K + 1);
  for (int k = 0; k <= K; ++k) {
    emb.x[k].assign(net.layer_size(k), -1);
    emb.s[k].assign(net.layer_size(k), -1);
    emb.z[k].assign(net.layer_size(k), -1);
  }
  auto name = [&](const char* kind, int k, int j) {
    return options.prefix + "_" + kind + "_" + std::to_string(k) + "_" + std::to_string(j);
  };

  for (int j = 0; j < net.input_size(); ++j) {
    const Interval b = bounds.at(0, j);
    if (options.input_vars.empty()) {
      emb.x[0][j] = model.base.add_variable(name("x", 0, j), b.lo, b.hi);
    } else {
      emb.x[0][j] = options.input_vars[j];
      intersect_bounds(model, emb.x[0][j], b.lo, b.hi);
    }
  }

  for (int k = 1; k <= K; ++k) {
    const DenseLayer& l = net.layer(k);
    for (int j = 0; j < l.outputs; ++j) {
      if (relax.is_removed(k, j)) continue;
      std::vector<Term> row;
      for (int i = 0; i < l.inputs; ++i)
        if (l.weight(j, i) != 0.0) row.push_back({emb.x[k - 1][i], l.weight(j, i)});
      const double L = bounds.lower[k][j], U = bounds.upper[k][j];

      if (k == K) {
        Interval out{L, U};
        std::optional<Relation> disjoint;
        if (options.output_box) {
          out.lo = std::max(out.lo, (*options.output_box)[j].lo);
          out.hi = std::min(out.hi, (*options.output_box)[j].hi);
          if (out.lo > out.hi) {
            const Interval& e = (*options.output_box)[j];
            if (out.lo - out.hi > 1e-7 * (1.0 + std::max(std::abs(e.lo), std::abs(e.hi)))) {
              // Disjoint: keep E as the box and state the violated bound as a row,
              // so the model is built and reported infeasible by the solver.
              out = e;
              disjoint = L > e.hi ? Relation::greater_equal : Relation::less_equal;
            } else {
              out.lo = out.hi = std::clamp(0.5 * (L + U), e.lo, e.hi);
            }
          }
        }
        int xv;
        if (options.output_vars.empty()) {
          xv = model.base.add_variable(name("x", k, j), out.lo, out.hi);
        } else {
          xv = options.output_vars[j];
          intersect_bounds(model, xv, out.lo, out.hi);
        }
        emb.x[k][j] = xv;
        if (disjoint)
          model.base.add_constraint({{xv, 1.0}}, *disjoint, *disjoint == Relation::greater_equal ? L : U,
                                    name("cut", k, j));
        row.push_back({xv, -1.0});
        model.base.add_constraint(std::move(row), Relation::equal, -l.bias[j], name("out", k, j));
        continue;
      }

      if (!std::isfinite(L) || !std::isfinite(U))
        throw std::invalid_argument("big-M encoding needs finite bounds at node " + node_label(k, j));
      const int xv = model.base.add_variable(name("x", k, j), std::max(0.0, L), std::max(0.0, U));
      const int sv = model.base.add_variable(name("s", k, j), std::max(0.0, -U), std::max(0.0, -L));
      double zlo = 0.0, zhi = 1.0;
      if (L >= 0.0) zlo = 1.0;
      else if (U <= 0.0) zhi = 0.0;
      const int zv = model.base.add_variable(name("z", k, j), zlo, zhi);
      if (!relax.is_relaxed(k, j)) model.binaries.push_back(zv);
      emb.x[k][j] = xv;
      emb.s[k][j] = sv;
      emb.z[k][j] = zv;
      row.push_back({xv, -1.0});
      row.push_back({sv, 1.0});
      model.base.add_constraint(std::move(row), Relation::equal, -l.bias[j], name("t", k, j));
      if (L < 0.0 && U > 0.0) {
        model.base.add_constraint({{xv, 1.0}, {zv, -U}}, Relation::less_equal, 0.0, name("mx", k, j));
        model.base.add_constraint({{sv, 1.0}, {zv, -L}}, Relation::less_equal, -L, name("ms", k, j));
      }
    }
  }
  return emb;
}

double relu_relaxation_upper(double pre, double L, double U) {
  if (!(L < 0.0 && U > 0.0)) throw std::invalid_argument("relu_relaxation_upper: needs L < 0 < U");
  return U * (pre - L) / (U - L);
}

namespace {

int resolve(const MilpModel& model, const std::string& name) {
  int j = model.base.find_variable(name);
  if (j < 0) throw std::invalid_argument("unknown variable reference " + name);
  return j;
}

std::vector<Term> resolve_terms(const MilpModel& model, const std::vector<NamedTerm>& terms) {
  std::vector<Term> out;
  for (const auto& t : terms) out.push_back({resolve(model, t.var), t.coeff});
  return out;
}

}  // namespace

BuiltProblem build_problem(const ProblemSpec& spec) {
  BuiltProblem p;
  for (const auto& v : spec.variables) {
    int j = p.model.base.add_variable(v.name, v.lower, v.upper);
    if (v.binary) p.model.mark_binary(j);
  }
  for (std::size_t i = 0; i < spec.networks.size(); ++i) {
    const NetworkSpec& ns = spec.networks[i];
    EmbedOptions opt;
    opt.prefix = "net" + std::to_string(i);
    for (const auto& n : ns.input_vars) opt.input_vars.push_back(resolve(p.model, n));
    for (const auto& n : ns.output_vars) opt.output_vars.push_back(resolve(p.model, n));
    opt.output_box = ns.output_box;
    p.embeddings.push_back(embed_network(p.model, ns.net, ns.bounds, ns.relax, opt));
  }
  for (const auto& c : spec.constraints)
    p.model.base.add_constraint(resolve_terms(p.model, c.terms), c.relation, c.rhs, c.name);
  p.model.base.set_objective(spec.sense, resolve_terms(p.model, spec.objective), spec.objective_offset);
  p.model.validate();
  return p;
}

}  // namespace relumip
