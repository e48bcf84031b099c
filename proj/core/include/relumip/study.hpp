#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "relumip/bt.hpp"

namespace relumip {

struct OutputBoundStudyConfig {
  std::vector<int> dims{3, 10, 10, 5, 1};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  /// Output box E_p = [-p/100, p/100] for each level p; inputs are [-1,1]^n.
  std::vector<int> levels{100, 75, 50, 25, 0};
  std::vector<BtScheme> schemes;  // empty: all five schemes without time limits
  BtParams bt;
  int threads = 0;  // 0: hardware concurrency
};

struct StudyCell {
  std::string scheme;
  int level = 0;
  double avg_mad = 0.0;
  double avg_time = 0.0;
};

struct StudyRatio {
  std::string scheme;
  double ratio = 0.0;  // 100 * MAD at the last level / MAD at the first level
};

struct OutputBoundStudy {
  OutputBoundStudyConfig config;
  std::vector<StudyCell> cells;  // scheme-major, levels in config order
  std::vector<StudyRatio> ratios;

  const StudyCell& cell(const std::string& scheme, int level) const;
  double ratio(const std::string& scheme) const;
};

/// Tightens He-initialized networks (one per seed) for every scheme and level.
OutputBoundStudy run_output_bound_study(const OutputBoundStudyConfig& config);

/// `scheme,level,avg_mad` rows followed by `scheme,ratio,value` rows. Timing
/// columns are added only on request since they differ between runs.
std::string study_csv(const OutputBoundStudy& study, bool include_time = false);

}  // namespace relumip
