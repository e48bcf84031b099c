#include "relumip/study.hpp"

#include <algorithm>
#include <cstdio>
#include <future>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "relumip/random.hpp"

namespace relumip {

const StudyCell& OutputBoundStudy::cell(const std::string& scheme, int level) const {
  for (const auto& c : cells)
    if (c.scheme == scheme && c.level == level) return c;
  throw std::out_of_range("no study cell for " + scheme + " at level " + std::to_string(level));
}

double OutputBoundStudy::ratio(const std::string& scheme) const {
  for (const auto& r : ratios)
    if (r.scheme == scheme) return r.ratio;
  throw std::out_of_range("no study ratio for " + scheme);
}

namespace {

struct Job {
  std::size_t scheme, level, seed;
  double mad = 0.0, time = 0.0;
};

}  // namespace

OutputBoundStudy run_output_bound_study(const OutputBoundStudyConfig& config) {
  if (config.dims.size() < 2) throw std::invalid_argument("study: need at least an input and an output layer");
  if (config.seeds.empty()) throw std::invalid_argument("study: seeds must be nonempty");
  if (config.levels.empty()) throw std::invalid_argument("study: levels must be nonempty");
  for (int p : config.levels)
    if (p < 0 || p > 100) throw std::invalid_argument("study: levels must lie in [0, 100]");

  OutputBoundStudy study;
  study.config = config;
  if (study.config.schemes.empty())
    for (auto k : {BtKind::lrr, BtKind::rr, BtKind::lr, BtKind::semi_rr, BtKind::no_r})
      study.config.schemes.push_back(BtScheme{k, std::nullopt, 1});
  const auto& cfg = study.config;

  std::vector<ReluNetwork> nets;
  for (auto s : cfg.seeds) nets.push_back(he_initialize(cfg.dims, derive_seed(s, "init")));
  const Box input(static_cast<std::size_t>(cfg.dims.front()), Interval{-1.0, 1.0});
  const auto n_out = static_cast<std::size_t>(cfg.dims.back());

  std::vector<Job> jobs;
  for (std::size_t a = 0; a < cfg.schemes.size(); ++a)
    for (std::size_t l = 0; l < cfg.levels.size(); ++l)
      for (std::size_t s = 0; s < cfg.seeds.size(); ++s) jobs.push_back({a, l, s});

  auto run = [&](Job& job) {
    const double e = cfg.levels[job.level] / 100.0;
    BtReport r = tighten(nets[job.seed], input, Box(n_out, Interval{-e, e}), cfg.schemes[job.scheme], cfg.bt);
    job.mad = r.mad;
    job.time = r.total_time;
  };
  const unsigned threads = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                           : std::max(1u, std::thread::hardware_concurrency());
  if (threads <= 1) {
    for (auto& j : jobs) run(j);
  } else {
    for (std::size_t begin = 0; begin < jobs.size(); begin += threads) {
      std::vector<std::future<void>> futs;
      for (std::size_t i = begin; i < std::min(jobs.size(), begin + threads); ++i)
        futs.push_back(std::async(std::launch::async, [&, i] { run(jobs[i]); }));
      for (auto& f : futs) f.get();
    }
  }

  const double n = static_cast<double>(cfg.seeds.size());
  for (std::size_t a = 0; a < cfg.schemes.size(); ++a) {
    for (std::size_t l = 0; l < cfg.levels.size(); ++l) {
      StudyCell c{cfg.schemes[a].to_string(), cfg.levels[l], 0.0, 0.0};
      for (const auto& j : jobs)
        if (j.scheme == a && j.level == l) {
          c.avg_mad += j.mad;
          c.avg_time += j.time;
        }
      c.avg_mad /= n;
      c.avg_time /= n;
      study.cells.push_back(c);
    }
    const double first = study.cells[study.cells.size() - cfg.levels.size()].avg_mad;
    const double last = study.cells.back().avg_mad;
    study.ratios.push_back({cfg.schemes[a].to_string(), first == 0.0 ? 100.0 : 100.0 * last / first});
  }
  return study;
}

std::string study_csv(const OutputBoundStudy& study, bool include_time) {
  std::ostringstream os;
  char buf[64];
  os << (include_time ? "scheme,level,avg_mad,avg_time\n" : "scheme,level,avg_mad\n");
  for (const auto& c : study.cells) {
    std::snprintf(buf, sizeof buf, "%.12g", c.avg_mad);
    os << c.scheme << ',' << c.level << ',' << buf;
    if (include_time) {
      std::snprintf(buf, sizeof buf, "%.6f", c.avg_time);
      os << ',' << buf;
    }
    os << '\n';
  }
  for (const auto& r : study.ratios) {
    std::snprintf(buf, sizeof buf, "%.2f", r.ratio);
    os << r.scheme << ",ratio," << buf;
    if (include_time) os << ',';
    os << '\n';
  }
  return os.str();
}

}  // namespace relumip
