#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <regex>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "relumip/bt.hpp"
#include "relumip/net.hpp"
#include "relumip/production.hpp"
#include "relumip/quadratic.hpp"
#include "relumip/random.hpp"
#include "relumip/study.hpp"
#include "relumip/trainer.hpp"

namespace relumip::cli {

using nlohmann::json;

namespace {

// Raised for bad flag values that CLI11 cannot see (box literals, lists, ...).
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double parse_number(const std::string& raw) {
  const std::string s = trim(raw);
  if (s == "inf" || s == "+inf") return kInf;
  if (s == "-inf") return -kInf;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw UsageError("not a number: '" + s + "'");
  }
  if (used != s.size()) throw UsageError("not a number: '" + s + "'");
  return v;
}

template <class T>
std::vector<T> split_list(const std::string& text, const char* what) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw UsageError(std::string("empty entry in ") + what + " list");
    double v = parse_number(item);
    if (v != static_cast<double>(static_cast<T>(v)) || v < 0) throw UsageError(std::string("bad ") + what + ": " + item);
    out.push_back(static_cast<T>(v));
  }
  if (out.empty()) throw UsageError(std::string(what) + " list is empty");
  return out;
}

std::vector<std::string> split_strings(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

json box_json(const Box& b) {
  json a = json::array();
  for (const auto& iv : b)
    a.push_back({std::isfinite(iv.lo) ? json(iv.lo) : json(nullptr), std::isfinite(iv.hi) ? json(iv.hi) : json(nullptr)});
  return a;
}

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json result_json(const MilpResult& r) {
  json j;
  to_json(j, r);
  return j;
}

json bt_json(const BtReport& r) {
  json timings = json::array();
  for (const auto& t : r.timings) timings.push_back({{"layer", t.layer}, {"index", t.index}, {"seconds", t.seconds}, {"timed_out", t.timed_out}});
  json j{{"scheme", r.scheme.to_string()},
         {"total_time", r.total_time},
         {"mad", r.mad},
         {"initial_mad", mad(r.initial)},
         {"dead", r.neurons.dead},
         {"active", r.neurons.active},
         {"unstable", r.neurons.unstable},
         {"subproblem_timeouts", r.subproblem_timeouts},
         {"timings", timings}};
  if (r.mrd) j["mrd"] = *r.mrd;
  return j;
}

void emit_report(const std::string& path, const std::string& command, const json& config, const json& result) {
  if (path.empty()) return;
  json doc{{"command", command}, {"config", config}, {"result", result}};
  write_atomic(path, doc.dump(2) + "\n");
}

void require_file(const std::string& path, const char* flag) {
  if (!std::filesystem::exists(path)) throw UsageError(std::string(flag) + ": file not found: " + path);
}

BtScheme resolve_scheme(const std::string& text, const std::optional<double>& sub_limit, int rounds) {
  BtScheme s = BtScheme::parse(text);
  if (sub_limit) {
    if (!(*sub_limit > 0.0)) throw UsageError("--sub-time-limit must be positive");
    if (!s.milp_based()) throw UsageError("--sub-time-limit applies to lr, semi-rr and no-r only");
    s.subproblem_time_limit = sub_limit;
  }
  if (rounds < 1) throw UsageError("--rounds must be at least 1");
  s.rounds = rounds;
  return s;
}

SolveParams solve_params(const std::optional<double>& time_limit, double gap) {
  SolveParams p;
  if (time_limit) {
    if (!(*time_limit >= 0.0)) throw UsageError("--time-limit must be nonnegative");
    p.time_limit_seconds = time_limit;
  }
  if (!(gap >= 0.0)) throw UsageError("--gap must be nonnegative");
  p.gap_tolerance = gap;
  p.integrality_tolerance = 1e-9;
  return p;
}

}  // namespace

Box parse_box(const std::string& raw, int dims) {
  std::string text = trim(raw);
  if (text.empty()) throw UsageError("empty box");
  if (text.front() != '[' && std::filesystem::exists(text)) text = trim(read_file(text));

  Box box;
  json doc = json::parse(text, nullptr, false);
  auto interval = [](const json& pair) {
    if (!pair.is_array() || pair.size() != 2) throw UsageError("box entries must be [lo,hi] pairs");
    auto val = [](const json& v, double inf) {
      if (v.is_null()) return inf;
      if (v.is_number()) return v.get<double>();
      if (v.is_string()) return parse_number(v.get<std::string>());
      throw UsageError("box bounds must be numbers");
    };
    return Interval{val(pair[0], -kInf), val(pair[1], kInf)};
  };
  if (!doc.is_discarded() && doc.is_array()) {
    if (!doc.empty() && !doc[0].is_array()) {
      box.push_back(interval(doc));
    } else {
      for (const auto& p : doc) box.push_back(interval(p));
    }
  } else {
    static const std::regex item(R"(\[\s*([^,\]]+?)\s*,\s*([^\]]+?)\s*\])");
    std::string rest = text;
    std::smatch m;
    std::string leftover;
    while (std::regex_search(rest, m, item)) {
      leftover += m.prefix().str();
      box.push_back({parse_number(m[1].str()), parse_number(m[2].str())});
      rest = m.suffix().str();
    }
    leftover += rest;
    for (char c : leftover)
      if (!std::isspace(static_cast<unsigned char>(c)) && c != 'x' && c != ',' && c != ';')
        throw UsageError("malformed box literal: " + raw);
  }
  if (box.empty()) throw UsageError("malformed box literal: " + raw);
  for (const auto& iv : box)
    if (std::isnan(iv.lo) || std::isnan(iv.hi) || iv.lo > iv.hi) throw UsageError("box interval with lo > hi: " + raw);
  if (dims > 0 && box.size() == 1 && dims > 1) box.assign(static_cast<std::size_t>(dims), box.front());
  if (dims > 0 && static_cast<int>(box.size()) != dims)
    throw UsageError("box has " + std::to_string(box.size()) + " intervals, expected " + std::to_string(dims));
  return box;
}

int exit_code(MilpStatus status) {
  switch (status) {
    case MilpStatus::optimal: return kSuccess;
    case MilpStatus::infeasible: return kInfeasible;
    case MilpStatus::unbounded: return kInfeasible;
    case MilpStatus::feasible: return kLimitWithIncumbent;
    case MilpStatus::bound_only: return kLimitWithoutIncumbent;
  }
  return kUsage;
}

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot move report into place at " + path + ": " + ec.message());
  }
}

namespace {

struct Common {
  std::uint64_t seed = 0;
  std::string report;
  std::string out;
};

int cmd_train(const Common& c, const std::string& dataset, const std::string& layers_text, const std::string& init_path,
              const TrainConfig& base, std::ostream& out) {
  require_file(dataset, "--dataset");
  std::vector<int> layers = split_list<int>(layers_text, "layer");
  if (layers.size() < 2) throw UsageError("--layers needs at least input and output sizes");
  LabeledDataset data = load_dataset_csv_file(dataset, layers.front());
  if (!data.empty() && static_cast<int>(data.targets.front().size()) != layers.back())
    throw UsageError("dataset has " + std::to_string(data.targets.front().size()) + " target columns, --layers ends in " +
                     std::to_string(layers.back()));
  TrainConfig cfg = base;
  cfg.seed = derive_seed(c.seed, "train");
  cfg.validate();
  ReluNetwork init;
  if (!init_path.empty()) {
    require_file(init_path, "--init");
    init = load_network_file(init_path);
    if (init.layer_dims() != layers) throw UsageError("--init network does not match --layers");
  } else {
    init = he_initialize(layers, derive_seed(c.seed, "init"));
  }
  ReluNetwork net = sgd_train(init, data, cfg);
  write_atomic(c.out, save_network(net) + "\n");

  bool has_zero = false;
  for (const auto& t : data.targets)
    for (double v : t) has_zero |= v == 0.0;
  json result{{"loss", loss(net, data, cfg.l2_lambda)},
              {"mse", loss(net, data, 0.0)},
              {"mape", mape(net, data, true)},
              {"zero_targets_skipped", has_zero},
              {"parameters", net.parameter_count()},
              {"samples", data.size()}};
  json config{{"dataset", dataset},     {"layers", layers},          {"epochs", cfg.epochs},
              {"batch_size", cfg.batch_size}, {"learning_rate", cfg.learning_rate}, {"l2_lambda", cfg.l2_lambda},
              {"standardize", cfg.standardize}, {"seed", c.seed},   {"init", init_path},
              {"out", c.out}};
  emit_report(c.report, "train", config, result);
  out << "trained " << net.parameter_count() << " parameters, MSE " << result["mse"].get<double>() << ", MAPE "
      << result["mape"].get<double>() << "%\n";
  return kSuccess;
}

int cmd_tighten(const Common& c, const std::string& net_path, const std::string& in_box, const std::string& out_box,
                const BtScheme& scheme, bool parallel, const std::string& reference, std::ostream& out) {
  require_file(net_path, "--net");
  ReluNetwork net = load_network_file(net_path);
  Box input = parse_box(in_box, net.input_size());
  std::optional<Box> output;
  if (!out_box.empty()) output = parse_box(out_box, net.output_size());
  BtParams params;
  params.parallel_min_max = parallel;
  if (!reference.empty()) {
    require_file(reference, "--reference");
    params.reference = load_bounds_file(reference);
    params.reference->validate(net);
  }
  json config{{"net", net_path}, {"input_box", box_json(input)}, {"output_box", output ? box_json(*output) : json(nullptr)},
              {"scheme", scheme.to_string()}, {"rounds", scheme.rounds}, {"parallel", parallel},
              {"reference", reference}, {"seed", c.seed}, {"out", c.out}};
  BtReport report;
  try {
    report = tighten(net, input, output, scheme, params);
  } catch (const InfeasibleBoundsError& e) {
    emit_report(c.report, "tighten", config, {{"status", "infeasible"}, {"message", e.what()}});
    throw;
  }
  const std::string doc = save_bounds(report.bounds) + "\n";
  if (c.out.empty()) out << doc;
  else write_atomic(c.out, doc);
  emit_report(c.report, "tighten", config, bt_json(report));
  return kSuccess;
}

json qn_result(const QnSolution& sol, const ReluNetwork& net1, const ReluNetwork& net2, double alpha) {
  json j{{"milp", result_json(sol.result)}, {"t_bt", sol.bt_time}, {"t_opt", sol.opt_time}, {"alpha", alpha}};
  if (!sol.x.empty()) {
    j["x"] = sol.x;
    j["f1"] = forward(net1, sol.x)[0];
    j["f2_residual"] = forward(net2, sol.x)[0] - alpha;
  }
  if (sol.bt1) j["bt_net1"] = bt_json(*sol.bt1);
  if (sol.bt2) j["bt_net2"] = bt_json(*sol.bt2);
  return j;
}

int cmd_solve_qn(const Common& c, int n, const std::string& net1_path, const std::string& net2_path,
                 std::optional<double> alpha, const BtScheme& scheme, const SolveParams& params, std::ostream& out) {
  ReluNetwork net1, net2;
  json config{{"scheme", scheme.to_string()},
              {"time_limit", params.time_limit_seconds ? json(*params.time_limit_seconds) : json(nullptr)},
              {"gap", params.gap_tolerance},
              {"seed", c.seed}};
  json extra;
  if (n > 0) {
    if (!net1_path.empty() || !net2_path.empty()) throw UsageError("use either --n or --net/--net2");
    TrainedSurrogate s1 = train_quadratic_surrogate(n, derive_seed(c.seed, "qn", 0));
    TrainedSurrogate s2 = train_quadratic_surrogate(n, derive_seed(c.seed, "qn", 1));
    net1 = s1.net;
    net2 = s2.net;
    extra["mape"] = {s1.mape, s2.mape};
    config["n"] = n;
    if (!c.out.empty()) {
      write_atomic(c.out + ".net1.json", save_network(net1) + "\n");
      write_atomic(c.out + ".net2.json", save_network(net2) + "\n");
    }
  } else {
    if (net1_path.empty() || net2_path.empty()) throw UsageError("solve-qn needs --n or both --net and --net2");
    require_file(net1_path, "--net");
    require_file(net2_path, "--net2");
    net1 = load_network_file(net1_path);
    net2 = load_network_file(net2_path);
    config["net"] = net1_path;
    config["net2"] = net2_path;
  }
  if (!alpha) alpha = choose_alpha(net2, derive_seed(c.seed, "alpha"));
  config["alpha"] = *alpha;
  QnSolution sol = solve_qn(net1, net2, *alpha, scheme, params);
  json result = qn_result(sol, net1, net2, *alpha);
  if (!extra.is_null()) result.update(extra);
  emit_report(c.report, "solve-qn", config, result);
  out << "status " << to_string(sol.result.status);
  if (sol.result.objective_value) out << ", objective " << *sol.result.objective_value;
  out << ", bound " << sol.result.best_bound << ", T_BT " << sol.bt_time << " s, T_OPT " << sol.opt_time << " s\n";
  return exit_code(sol.result.status);
}

int cmd_solve_production(const Common& c, const std::string& topo_name, std::string arch_name, const BtScheme& scheme,
                         const SolveParams& params, bool oracle, std::ostream& out) {
  ProductionTopology topo;
  if (topo_name == "tiny") topo = tiny_topology();
  else if (topo_name == "paper") topo = paper_topology();
  else throw UsageError("--topology must be tiny or paper");
  if (arch_name.empty()) arch_name = topo_name == "tiny" ? "tiny" : "shallow";
  ProductionArchitecture arch;
  if (arch_name == "tiny") arch = tiny_architecture();
  else if (arch_name == "shallow") arch = shallow_architecture();
  else if (arch_name == "deep") arch = deep_architecture();
  else throw UsageError("--architecture must be tiny, shallow or deep");
  if (oracle && topo.manifolds != 1) throw UsageError("--oracle needs the tiny topology");

  ProductionInstance inst = synthetic_instance(topo, derive_seed(c.seed, "instance"));
  ProductionNets nets = train_production_nets(inst, arch, derive_seed(c.seed, "train"));
  ProductionSolution sol = solve_production(topo, nets, scheme, params);

  json config{{"topology", topo_name}, {"architecture", arch_name}, {"scheme", scheme.to_string()},
              {"time_limit", params.time_limit_seconds ? json(*params.time_limit_seconds) : json(nullptr)},
              {"gap", params.gap_tolerance}, {"seed", c.seed}};
  json result{{"milp", result_json(sol.result)}, {"t_bt", sol.bt_time}, {"t_opt", sol.opt_time},
              {"well_mape", nets.well_mape}, {"riser_mape", nets.riser_mape}};
  json wells = json::array(), risers = json::array();
  for (const auto& r : sol.bt.well_reports) wells.push_back(bt_json(r));
  for (const auto& r : sol.bt.riser_reports) risers.push_back(bt_json(r));
  result["bt_wells"] = wells;
  result["bt_risers"] = risers;
  if (sol.check)
    result["check"] = {{"max_balance_violation", sol.check->max_balance_violation},
                       {"routing_ok", sol.check->routing_ok},
                       {"max_riser_error", sol.check->max_riser_error},
                       {"max_well_error", sol.check->max_well_error}};
  if (oracle) {
    ProductionOracle o = production_oracle(topo, nets);
    result["oracle"] = {{"feasible", o.feasible}, {"objective", num(o.feasible ? o.objective : kInf)},
                        {"open", o.open}, {"manifold_pressure", o.manifold_pressure}};
  }
  if (!c.out.empty()) {
    json nets_doc{{"wells", json::array()}, {"risers", json::array()}};
    for (const auto& n : nets.wells) nets_doc["wells"].push_back(json::parse(save_network(n)));
    for (const auto& n : nets.risers) nets_doc["risers"].push_back(json::parse(save_network(n)));
    write_atomic(c.out, nets_doc.dump(1) + "\n");
  }
  emit_report(c.report, "solve-production", config, result);
  out << "status " << to_string(sol.result.status);
  if (sol.result.objective_value) out << ", total oil " << *sol.result.objective_value;
  out << ", T_BT " << sol.bt_time << " s, T_OPT " << sol.opt_time << " s\n";
  return exit_code(sol.result.status);
}

int cmd_study(const Common& c, const std::string& config_path, const std::string& dims, const std::string& seeds,
              const std::string& levels, const std::string& schemes, int threads, bool with_time, std::ostream& out) {
  OutputBoundStudyConfig cfg;
  if (!config_path.empty()) {
    require_file(config_path, "--config");
    json doc = json::parse(read_file(config_path), nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw UsageError("--config must hold a JSON object");
    try {
      if (doc.contains("dims")) cfg.dims = doc["dims"].get<std::vector<int>>();
      if (doc.contains("seeds")) cfg.seeds = doc["seeds"].get<std::vector<std::uint64_t>>();
      if (doc.contains("levels")) cfg.levels = doc["levels"].get<std::vector<int>>();
      if (doc.contains("schemes"))
        for (const auto& s : doc["schemes"]) cfg.schemes.push_back(BtScheme::parse(s.get<std::string>()));
      if (doc.contains("threads")) cfg.threads = doc["threads"].get<int>();
    } catch (const json::exception& e) {
      throw UsageError(std::string("--config: ") + e.what());
    }
  }
  if (!dims.empty()) cfg.dims = split_list<int>(dims, "dims");
  if (!seeds.empty()) cfg.seeds = split_list<std::uint64_t>(seeds, "seeds");
  if (!levels.empty()) cfg.levels = split_list<int>(levels, "levels");
  if (!schemes.empty()) {
    cfg.schemes.clear();
    for (const auto& s : split_strings(schemes)) cfg.schemes.push_back(BtScheme::parse(s));
  }
  if (threads > 0) cfg.threads = threads;
  for (int d : cfg.dims)
    if (d < 1) throw UsageError("dims must be positive");
  if (c.seed != 0 && seeds.empty() && config_path.empty()) {
    // A single --seed derives the per-network seeds.
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) cfg.seeds[i] = derive_seed(c.seed, "study", i);
  }

  OutputBoundStudy study = run_output_bound_study(cfg);
  const std::string csv = study_csv(study, with_time);
  if (c.out.empty()) out << csv;
  else write_atomic(c.out, csv);

  json scheme_names = json::array();
  for (const auto& s : study.config.schemes) scheme_names.push_back(s.to_string());
  json config{{"dims", study.config.dims}, {"seeds", study.config.seeds}, {"levels", study.config.levels},
              {"schemes", scheme_names}, {"threads", study.config.threads}, {"seed", c.seed}};
  json cells = json::array(), ratios = json::object();
  for (const auto& cell : study.cells)
    cells.push_back({{"scheme", cell.scheme}, {"level", cell.level}, {"avg_mad", cell.avg_mad}, {"avg_time", cell.avg_time}});
  for (const auto& r : study.ratios) ratios[r.scheme] = r.ratio;
  emit_report(c.report, "study-output-bounds", config, {{"cells", cells}, {"ratios", ratios}});
  return kSuccess;
}

int cmd_verify(const Common& c, const std::string& net_path, const std::string& bounds_path, int samples,
               const std::string& in_box, const std::string& out_box, double tol, std::ostream& out, std::ostream& err) {
  require_file(net_path, "--net");
  require_file(bounds_path, "--bounds");
  if (samples < 1) throw UsageError("--samples must be positive");
  ReluNetwork net = load_network_file(net_path);
  BoundSet bounds = load_bounds_file(bounds_path);
  bounds.validate(net);
  Box input = in_box.empty() ? bounds.layer_box(0) : parse_box(in_box, net.input_size());
  for (const auto& iv : input)
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi)) throw UsageError("input box must be finite; pass --input-box");
  std::optional<Box> output;
  if (!out_box.empty()) output = parse_box(out_box, net.output_size());

  Rng rng(derive_seed(c.seed, "verify"));
  std::vector<double> x(static_cast<std::size_t>(net.input_size()));
  long accepted = 0, drawn = 0, violations = 0;
  const long max_draws = 1000L * samples;
  double worst = 0.0;
  json first = nullptr;
  while (accepted < samples && drawn < max_draws) {
    ++drawn;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::uniform_real_distribution<double>(input[i].lo, input[i].hi)(rng);
    Trace tr = forward_trace(net, x);
    if (output) {
      bool inside = true;
      for (std::size_t j = 0; j < tr.back().size(); ++j) inside &= (*output)[j].contains(tr.back()[j]);
      if (!inside) continue;
    }
    ++accepted;
    for (int k = 0; k <= net.depth(); ++k)
      for (std::size_t j = 0; j < tr[k].size(); ++j) {
        const double v = tr[k][j];
        const double excess = std::max(bounds.lower[k][j] - v, v - bounds.upper[k][j]);
        if (excess > tol) {
          ++violations;
          if (first.is_null()) first = {{"layer", k}, {"index", j}, {"value", v}, {"L", num(bounds.lower[k][j])}, {"U", num(bounds.upper[k][j])}};
        }
        worst = std::max(worst, excess);
      }
  }
  json config{{"net", net_path}, {"bounds", bounds_path}, {"samples", samples}, {"input_box", box_json(input)},
              {"output_box", output ? box_json(*output) : json(nullptr)}, {"tolerance", tol}, {"seed", c.seed}};
  json result{{"accepted", accepted}, {"drawn", drawn}, {"violations", violations}, {"max_excess", worst}, {"first_violation", first}};
  emit_report(c.report, "verify", config, result);
  if (accepted < samples) err << "warning: only " << accepted << " of " << samples << " samples satisfied the output box\n";
  if (violations > 0) {
    err << "bounds violated by " << violations << " trace entries; first at layer " << first["layer"] << " index "
        << first["index"] << "\n";
    return kInfeasible;
  }
  out << "verified " << accepted << " traces\n";
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"MILP tools for ReLU networks: training, bound tightening and optimization"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all commands");

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", common.seed, "Root seed for all random streams");
    sub->add_option("--report", common.report, "JSON report path (written atomically)");
  };

  // train
  auto* train = app.add_subcommand("train", "Fit a ReLU network to a CSV dataset");
  std::string dataset, layers, init_path;
  TrainConfig tc;
  bool no_standardize = false;
  train->add_option("--dataset", dataset, "CSV with a header row, inputs then targets")->required();
  train->add_option("--layers", layers, "Layer sizes, e.g. 1,10,5,1")->required();
  train->add_option("--init", init_path, "Start from this network instead of He initialization");
  train->add_option("--epochs", tc.epochs);
  train->add_option("--batch-size", tc.batch_size);
  train->add_option("--lr", tc.learning_rate);
  train->add_option("--l2", tc.l2_lambda);
  train->add_flag("--no-standardize", no_standardize);
  train->add_option("--out", common.out, "Network JSON output")->required();
  add_common(train);

  // tighten
  auto* tight = app.add_subcommand("tighten", "Compute node bounds with a bound tightening scheme");
  std::string net_path, in_box, out_box, scheme_text = "no-r", reference;
  std::optional<double> sub_limit;
  int rounds = 1;
  bool parallel = false;
  tight->add_option("--net", net_path, "Network JSON")->required();
  tight->add_option("--input-box", in_box, "Input box D")->required();
  tight->add_option("--output-box", out_box, "Output box E");
  tight->add_option("--scheme", scheme_text, "lrr, rr, lr, semi-rr or no-r, optionally with (T)");
  tight->add_option("--sub-time-limit", sub_limit, "Seconds per bound subproblem");
  tight->add_option("--rounds", rounds, "Passes over all nodes");
  tight->add_option("--reference", reference, "Optimal bounds for MRD");
  tight->add_flag("--parallel", parallel, "Solve min and max of a node concurrently");
  tight->add_option("--out", common.out, "Bounds JSON output (stdout when omitted)");
  add_common(tight);

  // solve-qn
  auto* qn = app.add_subcommand("solve-qn", "min f1(x) s.t. f2(x) = alpha over [-1,1]^n");
  int qn_n = 0;
  std::string net2_path;
  std::optional<double> alpha, time_limit;
  double gap = 1e-4;
  qn->add_option("--n", qn_n, "Generate and train a quadratic pair of this dimension");
  qn->add_option("--net", net_path, "Objective network");
  qn->add_option("--net2", net2_path, "Constraint network");
  qn->add_option("--alpha", alpha, "Level (default: median of f2 over the box)");
  qn->add_option("--scheme", scheme_text);
  qn->add_option("--time-limit", time_limit, "Total seconds for tightening and solving");
  qn->add_option("--sub-time-limit", sub_limit);
  qn->add_option("--gap", gap, "Relative optimality gap");
  qn->add_option("--out", common.out, "Prefix for the generated networks");
  add_common(qn);

  // solve-production
  auto* prod = app.add_subcommand("solve-production", "Production optimization with network surrogates");
  std::string topo_name = "tiny", arch_name;
  bool oracle = false;
  prod->add_option("--topology", topo_name, "tiny or paper");
  prod->add_option("--architecture", arch_name, "tiny, shallow or deep");
  prod->add_option("--scheme", scheme_text);
  prod->add_option("--time-limit", time_limit);
  prod->add_option("--sub-time-limit", sub_limit);
  prod->add_option("--gap", gap);
  prod->add_flag("--oracle", oracle, "Also solve by routing enumeration (tiny topology)");
  prod->add_option("--out", common.out, "Trained networks JSON output");
  add_common(prod);

  // study-output-bounds
  auto* study = app.add_subcommand("study-output-bounds", "MAD of every scheme for shrinking output boxes");
  std::string config_path, dims, seeds, levels, schemes;
  int threads = 0;
  bool with_time = false;
  study->add_option("--config", config_path, "JSON with dims, seeds, levels, schemes");
  study->add_option("--dims", dims, "Layer sizes, default 3,10,10,5,1");
  study->add_option("--seeds", seeds, "Network seeds, default 1,2,3,4,5");
  study->add_option("--levels", levels, "Output box levels in percent, default 100,75,50,25,0");
  study->add_option("--schemes", schemes, "Comma-separated scheme strings");
  study->add_option("--threads", threads);
  study->add_flag("--with-time", with_time, "Add the average time column");
  study->add_option("--out", common.out, "CSV output (stdout when omitted)");
  add_common(study);

  // verify
  auto* verify = app.add_subcommand("verify", "Check sampled traces against a bounds file");
  std::string bounds_path;
  int samples = 1000;
  double tol = 1e-8;
  verify->add_option("--net", net_path)->required();
  verify->add_option("--bounds", bounds_path)->required();
  verify->add_option("--samples", samples, "Accepted samples to check");
  verify->add_option("--input-box", in_box, "Sampling box (default: layer 0 of the bounds)");
  verify->add_option("--output-box", out_box, "Reject samples whose output leaves this box");
  verify->add_option("--tolerance", tol);
  add_common(verify);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(std::move(rev));
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    if (auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front()) err << sub->help();
    return kUsage;
  }

  try {
    if (train->parsed()) {
      tc.standardize = !no_standardize;
      return cmd_train(common, dataset, layers, init_path, tc, out);
    }
    if (tight->parsed())
      return cmd_tighten(common, net_path, in_box, out_box, resolve_scheme(scheme_text, sub_limit, rounds), parallel,
                         reference, out);
    if (qn->parsed())
      return cmd_solve_qn(common, qn_n, net_path, net2_path, alpha, resolve_scheme(scheme_text, sub_limit, 1),
                          solve_params(time_limit, gap), out);
    if (prod->parsed())
      return cmd_solve_production(common, topo_name, arch_name, resolve_scheme(scheme_text, sub_limit, 1),
                                  solve_params(time_limit, gap), oracle, out);
    if (study->parsed()) return cmd_study(common, config_path, dims, seeds, levels, schemes, threads, with_time, out);
    if (verify->parsed()) return cmd_verify(common, net_path, bounds_path, samples, in_box, out_box, tol, out, err);
  } catch (const InfeasibleBoundsError& e) {
    err << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace relumip::cli
