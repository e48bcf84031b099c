#include "relumip/production.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "relumip/oracles.hpp"
#include "relumip/random.hpp"

namespace relumip {

namespace {

const char* kPhaseNames[kPhases] = {"oil", "gas", "wat"};

std::string p_name(int node) { return "p" + std::to_string(node); }
std::string y_name(int e) { return "y" + std::to_string(e); }
std::string qd_name(int e, int c) { return "qd" + std::to_string(e) + "_" + kPhaseNames[c]; }
std::string qr_name(int r, int c) { return "qr" + std::to_string(r) + "_" + kPhaseNames[c]; }
std::string net_output(int i, const ReluNetwork& net) {
  return "net" + std::to_string(i) + "_x_" + std::to_string(net.depth()) + "_0";
}

double softplus(double v) { return v > 30.0 ? v : std::log1p(std::exp(v)); }

}  // namespace

std::vector<int> ProductionTopology::well_edges(int well) const {
  std::vector<int> out;
  for (std::size_t e = 0; e < discrete.size(); ++e)
    if (discrete[e].from == well) out.push_back(static_cast<int>(e));
  return out;
}

void ProductionTopology::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("production topology: " + msg); };
  if (wells < 1 || manifolds < 1 || separators < 1) fail("need at least one well, manifold and separator");
  const auto n = static_cast<std::size_t>(node_count());
  if (p_lo.size() != n || p_hi.size() != n) fail("pressure bounds must be given for every node");
  if (gor.size() != static_cast<std::size_t>(wells) || wor.size() != static_cast<std::size_t>(wells))
    fail("GOR and WOR must be given for every well");
  if (p_sep.size() != static_cast<std::size_t>(separators)) fail("one pressure per separator");
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(p_lo[i]) || !std::isfinite(p_hi[i]) || p_lo[i] > p_hi[i])
      fail("bad pressure bounds at node " + std::to_string(i));
  for (int s = 0; s < separators; ++s) {
    const int node = separator_node(s);
    if (p_sep[s] < p_lo[node] || p_sep[s] > p_hi[node]) fail("separator pressure outside its bounds");
  }
  for (int w = 0; w < wells; ++w)
    if (gor[w] < 0.0 || wor[w] < 0.0) fail("ratios must be nonnegative");
  auto check_flow = [&](const ProductionEdge& e) {
    for (int c = 0; c < kPhases; ++c)
      if (!std::isfinite(e.q_lo[c]) || !std::isfinite(e.q_hi[c]) || e.q_lo[c] < 0.0 || e.q_lo[c] > e.q_hi[c])
        fail("bad flow bounds on edge (" + std::to_string(e.from) + "," + std::to_string(e.to) + ")");
  };
  for (const auto& e : discrete) {
    if (!is_well(e.from) || !is_manifold(e.to)) fail("discrete edges must go from a well to a manifold");
    check_flow(e);
  }
  for (const auto& e : risers) {
    if (!is_manifold(e.from)) fail("risers must start at a manifold");
    if (!is_separator(e.to)) fail("risers must end at a separator");
    check_flow(e);
  }
  for (int w = 0; w < wells; ++w) {
    const auto k = well_edges(w).size();
    if (k < 1 || k > 2) fail("well " + std::to_string(w) + " must have one or two discrete edges");
  }
  for (int m = 0; m < manifolds; ++m) {
    const int node = manifold_node(m);
    bool out = std::any_of(risers.begin(), risers.end(), [&](const ProductionEdge& e) { return e.from == node; });
    if (!out) fail("manifold " + std::to_string(node) + " has no riser");
  }
}

ProductionTopology paper_topology() {
  ProductionTopology t;
  t.wells = 8;
  t.manifolds = 2;
  t.separators = 2;
  for (int w = 0; w < t.wells; ++w)
    for (int m = 0; m < t.manifolds; ++m) t.discrete.push_back({w, t.manifold_node(m), {0, 0, 0}, {8.0, 20.0, 8.0}});
  for (int m = 0; m < t.manifolds; ++m)
    t.risers.push_back({t.manifold_node(m), t.separator_node(m), {0, 0, 0}, {40.0, 100.0, 40.0}});
  t.gor = {1.2, 0.8, 1.5, 0.6, 1.0, 1.8, 0.9, 1.3};
  t.wor = {0.3, 0.5, 0.2, 0.8, 0.4, 0.1, 0.6, 0.3};
  t.p_lo.assign(t.node_count(), 2.0);
  t.p_hi.assign(t.node_count(), 12.0);
  t.p_sep = {2.0, 2.0};
  for (int s = 0; s < t.separators; ++s) t.p_lo[t.separator_node(s)] = t.p_hi[t.separator_node(s)] = t.p_sep[s];
  return t;
}

ProductionTopology tiny_topology() {
  ProductionTopology t;
  t.wells = 2;
  t.manifolds = 1;
  t.separators = 1;
  t.discrete = {{0, 2, {0, 0, 0}, {6.0, 15.0, 6.0}}, {1, 2, {0, 0, 0}, {6.0, 15.0, 6.0}}};
  t.risers = {{2, 3, {0, 0, 0}, {12.0, 30.0, 12.0}}};
  t.gor = {1.5, 0.8};
  t.wor = {0.3, 0.6};
  t.p_lo = {2.0, 2.0, 2.0, 2.0};
  t.p_hi = {10.0, 10.0, 10.0, 2.0};
  t.p_sep = {2.0};
  return t;
}

double RiserCurve::drop(double q_oil, double q_gas, double q_wat) const {
  const double total = q_oil + q_gas + q_wat;
  return c0 + c[oil] * q_oil + c[gas] * q_gas + c[wat] * q_wat + d * softplus(k * (total - m)) / k;
}

ProductionInstance synthetic_instance(const ProductionTopology& topology, std::uint64_t seed) {
  topology.validate();
  ProductionInstance inst;
  inst.topology = topology;
  Rng rng(derive_seed(seed, "production"));
  auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  for (int w = 0; w < topology.wells; ++w) {
    const double lo = topology.p_lo[w], hi = topology.p_hi[w];
    WellCurve f;
    f.a = u(3.0, 6.0);
    const double shut_in = lo + (hi - lo) * u(0.6, 0.85);
    f.b = f.a / shut_in;
    inst.wells.push_back(f);
  }
  for (const auto& e : topology.risers) {
    RiserCurve g;
    g.c0 = u(0.2, 0.5);
    g.c = {u(0.05, 0.1), u(0.02, 0.05), u(0.08, 0.15)};
    g.d = u(0.2, 0.4);
    g.k = 1.0;
    g.m = u(0.2, 0.4) * (e.q_hi[oil] + e.q_hi[gas] + e.q_hi[wat]);
    inst.risers.push_back(g);
  }
  return inst;
}

namespace {

TrainConfig train_config(int epochs, int batch, double lr, double l2) {
  TrainConfig c;
  c.epochs = epochs;
  c.batch_size = batch;
  c.learning_rate = lr;
  c.l2_lambda = l2;
  return c;
}

}  // namespace

ProductionArchitecture shallow_architecture() {
  return {{1, 20, 20, 1}, {4, 50, 50, 1}, 50, 4000, train_config(2000, 10, 0.01, 1e-6),
          train_config(60, 32, 0.01, 1e-6)};
}

ProductionArchitecture deep_architecture() {
  return {{1, 10, 10, 10, 10, 1}, {4, 20, 20, 20, 20, 20, 1}, 50, 4000, train_config(2000, 10, 0.005, 1e-6),
          train_config(60, 32, 0.005, 1e-6)};
}

ProductionArchitecture tiny_architecture() {
  return {{1, 5, 5, 1}, {4, 8, 8, 1}, 50, 1000, train_config(1000, 10, 0.01, 1e-6), train_config(150, 16, 0.01, 1e-6)};
}

Box well_input_box(const ProductionTopology& t, int well) { return {{t.p_lo[well], t.p_hi[well]}}; }

Box well_output_box(const ProductionTopology& t, int well) {
  double lo = 0.0, hi = 0.0;
  for (int e : t.well_edges(well)) {
    lo = std::min(lo, t.discrete[e].q_lo[oil]);
    hi = std::max(hi, t.discrete[e].q_hi[oil]);
  }
  return {{lo, hi}};
}

Box riser_input_box(const ProductionTopology& t, int riser) {
  const ProductionEdge& e = t.risers[riser];
  Box b;
  for (int c = 0; c < kPhases; ++c) b.push_back({e.q_lo[c], e.q_hi[c]});
  b.push_back({t.p_lo[e.from], t.p_hi[e.from]});
  return b;
}

Box riser_output_box(const ProductionTopology& t, int riser) {
  const double p = t.p_sep[t.risers[riser].to - t.wells - t.manifolds];
  return {{p, p}};
}

namespace {

LabeledDataset sample_box(const Box& box, int count, Rng& rng, const std::function<double(std::span<const double>)>& f) {
  LabeledDataset d;
  for (int s = 0; s < count; ++s) {
    std::vector<double> x;
    for (const auto& iv : box) x.push_back(std::uniform_real_distribution<double>(iv.lo, iv.hi)(rng));
    d.targets.push_back({f(x)});
    d.inputs.push_back(std::move(x));
  }
  return d;
}

void check_arch(const ProductionTopology& t, const ProductionArchitecture& arch) {
  t.validate();
  if (arch.well_layers.size() < 2 || arch.well_layers.front() != 1 || arch.well_layers.back() != 1)
    throw std::invalid_argument("well networks must map 1 input to 1 output");
  if (arch.riser_layers.size() < 2 || arch.riser_layers.front() != 4 || arch.riser_layers.back() != 1)
    throw std::invalid_argument("riser networks must map 4 inputs to 1 output");
}

}  // namespace

ProductionNets train_production_nets(const ProductionInstance& inst, const ProductionArchitecture& arch,
                                     std::uint64_t seed) {
  const ProductionTopology& t = inst.topology;
  check_arch(t, arch);
  if (inst.wells.size() != static_cast<std::size_t>(t.wells) || inst.risers.size() != t.risers.size())
    throw std::invalid_argument("instance curves do not match the topology");
  ProductionNets nets;
  for (int w = 0; w < t.wells; ++w) {
    Rng rng(derive_seed(seed, "well-samples", w));
    const WellCurve f = inst.wells[w];
    LabeledDataset d = sample_box(well_input_box(t, w), arch.well_samples, rng, [&](auto x) { return f(x[0]); });
    TrainConfig cfg = arch.well_train;
    cfg.seed = derive_seed(seed, "well-train", w);
    ReluNetwork net = sgd_train(he_initialize(arch.well_layers, derive_seed(seed, "well-init", w)), d, cfg);
    nets.well_mape.push_back(mape(net, d, true));
    nets.wells.push_back(std::move(net));
  }
  for (std::size_t r = 0; r < t.risers.size(); ++r) {
    Rng rng(derive_seed(seed, "riser-samples", r));
    const RiserCurve g = inst.risers[r];
    LabeledDataset d = sample_box(riser_input_box(t, static_cast<int>(r)), arch.riser_samples, rng,
                                  [&](auto x) { return g(x[0], x[1], x[2], x[3]); });
    TrainConfig cfg = arch.riser_train;
    cfg.seed = derive_seed(seed, "riser-train", r);
    ReluNetwork net = sgd_train(he_initialize(arch.riser_layers, derive_seed(seed, "riser-init", r)), d, cfg);
    nets.riser_mape.push_back(mape(net, d, true));
    nets.risers.push_back(std::move(net));
  }
  return nets;
}

ProductionNets random_production_nets(const ProductionTopology& t, const ProductionArchitecture& arch,
                                      std::uint64_t seed) {
  check_arch(t, arch);
  ProductionNets nets;
  for (int w = 0; w < t.wells; ++w) nets.wells.push_back(he_initialize(arch.well_layers, derive_seed(seed, "well-init", w)));
  for (std::size_t r = 0; r < t.risers.size(); ++r)
    nets.risers.push_back(he_initialize(arch.riser_layers, derive_seed(seed, "riser-init", r)));
  return nets;
}

namespace {

void check_nets(const ProductionTopology& t, const ProductionNets& nets) {
  t.validate();
  if (nets.wells.size() != static_cast<std::size_t>(t.wells)) throw std::invalid_argument("one network per well");
  if (nets.risers.size() != t.risers.size()) throw std::invalid_argument("one network per riser");
  for (const auto& n : nets.wells)
    if (n.input_size() != 1 || n.output_size() != 1) throw std::invalid_argument("well networks must be 1 -> 1");
  for (const auto& n : nets.risers)
    if (n.input_size() != 4 || n.output_size() != 1) throw std::invalid_argument("riser networks must be 4 -> 1");
}

}  // namespace

ProductionBt tighten_production(const ProductionTopology& t, const ProductionNets& nets, const BtScheme& scheme,
                                const BtParams& params) {
  check_nets(t, nets);
  const auto t0 = std::chrono::steady_clock::now();
  ProductionBt out;
  for (int w = 0; w < t.wells; ++w) {
    out.well_reports.push_back(tighten(nets.wells[w], well_input_box(t, w), well_output_box(t, w), scheme, params));
    out.bounds.wells.push_back(out.well_reports.back().bounds);
  }
  for (std::size_t r = 0; r < t.risers.size(); ++r) {
    const int ri = static_cast<int>(r);
    out.riser_reports.push_back(
        tighten(nets.risers[r], riser_input_box(t, ri), riser_output_box(t, ri), scheme, params));
    out.bounds.risers.push_back(out.riser_reports.back().bounds);
  }
  out.total_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

ProductionModel build_production_model(const ProductionTopology& t, const ProductionNets& nets,
                                       const ProductionBounds& bounds) {
  check_nets(t, nets);
  if (bounds.wells.size() != nets.wells.size() || bounds.risers.size() != nets.risers.size())
    throw std::invalid_argument("one bound set per network");

  ProblemSpec spec;
  spec.sense = Sense::maximize;
  for (int i = 0; i < t.node_count(); ++i) spec.variables.push_back({p_name(i), t.p_lo[i], t.p_hi[i], false});
  for (int s = 0; s < t.separators; ++s) {
    auto& v = spec.variables[t.separator_node(s)];
    v.lower = v.upper = t.p_sep[s];
  }
  for (std::size_t e = 0; e < t.discrete.size(); ++e) {
    const int ei = static_cast<int>(e);
    spec.variables.push_back({y_name(ei), 0.0, 1.0, true});
    for (int c = 0; c < kPhases; ++c)
      spec.variables.push_back({qd_name(ei, c), std::min(0.0, t.discrete[e].q_lo[c]), t.discrete[e].q_hi[c], false});
  }
  for (std::size_t r = 0; r < t.risers.size(); ++r)
    for (int c = 0; c < kPhases; ++c)
      spec.variables.push_back({qr_name(static_cast<int>(r), c), t.risers[r].q_lo[c], t.risers[r].q_hi[c], false});

  for (int w = 0; w < t.wells; ++w)
    spec.networks.push_back({nets.wells[w], bounds.wells[w], {}, {p_name(w)}, {}, well_output_box(t, w)});
  for (std::size_t r = 0; r < t.risers.size(); ++r) {
    const int ri = static_cast<int>(r);
    const ProductionEdge& e = t.risers[r];
    spec.networks.push_back({nets.risers[r], bounds.risers[r], {},
                             {qr_name(ri, oil), qr_name(ri, gas), qr_name(ri, wat), p_name(e.from)},
                             {p_name(e.to)}, riser_output_box(t, ri)});
  }

  auto& cons = spec.constraints;
  for (int m = 0; m < t.manifolds; ++m) {
    const int node = t.manifold_node(m);
    for (int c = 0; c < kPhases; ++c) {
      ExtraConstraint row{{}, Relation::equal, 0.0, "balance_" + std::to_string(node) + "_" + kPhaseNames[c]};
      for (std::size_t e = 0; e < t.discrete.size(); ++e)
        if (t.discrete[e].to == node) row.terms.push_back({qd_name(static_cast<int>(e), c), 1.0});
      for (std::size_t r = 0; r < t.risers.size(); ++r)
        if (t.risers[r].from == node) row.terms.push_back({qr_name(static_cast<int>(r), c), -1.0});
      cons.push_back(std::move(row));
    }
  }
  for (std::size_t e = 0; e < t.discrete.size(); ++e) {
    const int ei = static_cast<int>(e);
    const int i = t.discrete[e].from, j = t.discrete[e].to;
    const double up = t.p_hi[i] - t.p_lo[j], down = t.p_lo[i] - t.p_hi[j];
    cons.push_back({{{p_name(i), 1.0}, {p_name(j), -1.0}, {y_name(ei), up}}, Relation::less_equal, up,
                    "drop_hi_" + std::to_string(e)});
    cons.push_back({{{p_name(i), 1.0}, {p_name(j), -1.0}, {y_name(ei), down}}, Relation::greater_equal, down,
                    "drop_lo_" + std::to_string(e)});
    for (int c = 0; c < kPhases; ++c) {
      cons.push_back({{{qd_name(ei, c), 1.0}, {y_name(ei), -t.discrete[e].q_hi[c]}}, Relation::less_equal, 0.0,
                      "qhi_" + std::to_string(e) + "_" + kPhaseNames[c]});
      if (t.discrete[e].q_lo[c] > 0.0)
        cons.push_back({{{qd_name(ei, c), 1.0}, {y_name(ei), -t.discrete[e].q_lo[c]}}, Relation::greater_equal, 0.0,
                        "qlo_" + std::to_string(e) + "_" + kPhaseNames[c]});
    }
  }
  for (int w = 0; w < t.wells; ++w) {
    const auto edges = t.well_edges(w);
    ExtraConstraint route{{}, Relation::less_equal, 1.0, "route_" + std::to_string(w)};
    ExtraConstraint curve{{{net_output(w, nets.wells[w]), -1.0}}, Relation::equal, 0.0, "well_" + std::to_string(w)};
    ExtraConstraint g{{}, Relation::equal, 0.0, "gor_" + std::to_string(w)};
    ExtraConstraint r{{}, Relation::equal, 0.0, "wor_" + std::to_string(w)};
    for (int e : edges) {
      route.terms.push_back({y_name(e), 1.0});
      curve.terms.push_back({qd_name(e, oil), 1.0});
      g.terms.push_back({qd_name(e, gas), 1.0});
      g.terms.push_back({qd_name(e, oil), -t.gor[w]});
      r.terms.push_back({qd_name(e, wat), 1.0});
      r.terms.push_back({qd_name(e, oil), -t.wor[w]});
    }
    cons.push_back(std::move(route));
    cons.push_back(std::move(curve));
    cons.push_back(std::move(g));
    cons.push_back(std::move(r));
  }
  for (std::size_t r = 0; r < t.risers.size(); ++r) spec.objective.push_back({qr_name(static_cast<int>(r), oil), 1.0});

  BuiltProblem built = build_problem(spec);
  ProductionModel pm;
  pm.model = std::move(built.model);
  pm.embeddings = std::move(built.embeddings);
  const LinearModel& lm = pm.model.base;
  for (int i = 0; i < t.node_count(); ++i) pm.p.push_back(lm.find_variable(p_name(i)));
  for (std::size_t e = 0; e < t.discrete.size(); ++e) {
    const int ei = static_cast<int>(e);
    pm.y.push_back(lm.find_variable(y_name(ei)));
    pm.q_discrete.push_back({lm.find_variable(qd_name(ei, oil)), lm.find_variable(qd_name(ei, gas)),
                             lm.find_variable(qd_name(ei, wat))});
  }
  for (std::size_t r = 0; r < t.risers.size(); ++r) {
    const int ri = static_cast<int>(r);
    pm.q_riser.push_back(
        {lm.find_variable(qr_name(ri, oil)), lm.find_variable(qr_name(ri, gas)), lm.find_variable(qr_name(ri, wat))});
  }
  return pm;
}

ProductionCheck check_production_solution(const ProductionTopology& t, const ProductionNets& nets,
                                          const ProductionModel& pm, const std::vector<double>& x) {
  ProductionCheck chk;
  for (int m = 0; m < t.manifolds; ++m) {
    const int node = t.manifold_node(m);
    for (int c = 0; c < kPhases; ++c) {
      double net_flow = 0.0;
      for (std::size_t e = 0; e < t.discrete.size(); ++e)
        if (t.discrete[e].to == node) net_flow += x[pm.q_discrete[e][c]];
      for (std::size_t r = 0; r < t.risers.size(); ++r)
        if (t.risers[r].from == node) net_flow -= x[pm.q_riser[r][c]];
      chk.max_balance_violation = std::max(chk.max_balance_violation, std::abs(net_flow));
    }
  }
  for (int w = 0; w < t.wells; ++w) {
    int open = 0;
    double oil_out = 0.0;
    for (int e : t.well_edges(w)) {
      open += x[pm.y[e]] > 0.5 ? 1 : 0;
      oil_out += x[pm.q_discrete[e][oil]];
    }
    if (open > 1) chk.routing_ok = false;
    const double p = x[pm.p[w]];
    chk.max_well_error = std::max(chk.max_well_error, std::abs(forward(nets.wells[w], std::span(&p, 1))[0] - oil_out));
  }
  for (std::size_t r = 0; r < t.risers.size(); ++r) {
    const auto& q = pm.q_riser[r];
    const std::vector<double> in{x[q[oil]], x[q[gas]], x[q[wat]], x[pm.p[t.risers[r].from]]};
    const double target = riser_output_box(t, static_cast<int>(r))[0].lo;
    chk.max_riser_error = std::max(chk.max_riser_error, std::abs(forward(nets.risers[r], in)[0] - target));
  }
  return chk;
}

ProductionSolution solve_production(const ProductionTopology& t, const ProductionNets& nets, const BtScheme& scheme,
                                    const SolveParams& params, const BtParams& bt_params) {
  ProductionSolution sol;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    sol.bt = tighten_production(t, nets, scheme, bt_params);
  } catch (const InfeasibleBoundsError&) {
    sol.bt_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    sol.result.status = MilpStatus::infeasible;
    sol.result.best_bound = -kInf;
    return sol;
  }
  sol.bt_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ProductionModel pm = build_production_model(t, nets, sol.bt.bounds);
  SolveParams sp = params;
  if (sp.time_limit_seconds) sp.time_limit_seconds = std::max(0.0, *sp.time_limit_seconds - sol.bt_time);
  sol.result = solve_milp(pm.model, sp);
  sol.opt_time = sol.result.wall_time;
  if (sol.result.incumbent) sol.check = check_production_solution(t, nets, pm, *sol.result.incumbent);
  return sol;
}

ProductionOracle production_oracle(const ProductionTopology& t, const ProductionNets& nets) {
  check_nets(t, nets);
  if (t.manifolds != 1 || t.risers.size() != 1) throw std::invalid_argument("production_oracle: single manifold only");
  const int ne = static_cast<int>(t.discrete.size());
  if (ne > 20) throw std::invalid_argument("production_oracle: too many discrete edges");
  const ProductionEdge& riser = t.risers[0];
  const int mnode = riser.from;
  const double p_out = riser_output_box(t, 0)[0].lo;
  const double tol = 1e-9;

  auto well_rate = [&](int w, double p) { return forward(nets.wells[w], std::span(&p, 1))[0]; };
  std::vector<char> can_close(t.wells);
  for (int w = 0; w < t.wells; ++w)
    can_close[w] = !find_roots([&](double p) { return well_rate(w, p); }, t.p_lo[w], t.p_hi[w]).empty();

  ProductionOracle best;
  for (long mask = 0; mask < (1L << ne); ++mask) {
    std::vector<int> open_edge(t.wells, -1);
    bool ok = true;
    for (int e = 0; e < ne && ok; ++e) {
      if (!((mask >> e) & 1L)) continue;
      const int w = t.discrete[e].from;
      if (open_edge[w] >= 0) ok = false;
      open_edge[w] = e;
    }
    if (!ok) continue;
    double lo = t.p_lo[mnode], hi = t.p_hi[mnode];
    for (int w = 0; w < t.wells; ++w) {
      if (open_edge[w] >= 0) {
        lo = std::max(lo, t.p_lo[w]);
        hi = std::min(hi, t.p_hi[w]);
      } else if (!can_close[w]) {
        ok = false;
      }
    }
    if (!ok || lo > hi) continue;

    auto flows = [&](double p) {
      PhaseRange q{0.0, 0.0, 0.0};
      for (int w = 0; w < t.wells; ++w) {
        if (open_edge[w] < 0) continue;
        const double f = well_rate(w, p);
        q[oil] += f;
        q[gas] += t.gor[w] * f;
        q[wat] += t.wor[w] * f;
      }
      return q;
    };
    auto residual = [&](double p) {
      const PhaseRange q = flows(p);
      const std::vector<double> in{q[oil], q[gas], q[wat], p};
      return forward(nets.risers[0], in)[0] - p_out;
    };
    auto feasible = [&](double p) {
      for (int w = 0; w < t.wells; ++w) {
        const int e = open_edge[w];
        if (e < 0) continue;
        const double f = well_rate(w, p);
        const PhaseRange q{f, t.gor[w] * f, t.wor[w] * f};
        for (int c = 0; c < kPhases; ++c)
          if (q[c] < t.discrete[e].q_lo[c] - tol || q[c] > t.discrete[e].q_hi[c] + tol) return false;
      }
      const PhaseRange q = flows(p);
      for (int c = 0; c < kPhases; ++c)
        if (q[c] < riser.q_lo[c] - tol || q[c] > riser.q_hi[c] + tol) return false;
      return true;
    };
    for (double p : find_roots(residual, lo, hi, 20000)) {
      if (!feasible(p)) continue;
      const double z = flows(p)[oil];
      if (!best.feasible || z > best.objective) {
        best.feasible = true;
        best.objective = z;
        best.manifold_pressure = p;
        best.open.assign(ne, 0);
        for (int w = 0; w < t.wells; ++w)
          if (open_edge[w] >= 0) best.open[open_edge[w]] = 1;
      }
    }
  }
  return best;
}

}  // namespace relumip
