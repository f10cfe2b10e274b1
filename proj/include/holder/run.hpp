#pragma once

#include <optional>
#include <string>

#include "holder/config.hpp"
#include "holder/report.hpp"

namespace holder {

struct RunOptions {
  /// Overrides config.output when set.
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  /// Write report.json, paths.csv and constants.csv.
  bool write_files = true;
};

/// Executes each analysis in order. Analysis errors are recorded in the
/// report and the run continues.
RegularityReport run(const RunConfig& config, const RunOptions& options = {});

/// True when any analysis reported a violated verdict.
bool has_violations(const RegularityReport& report);

}  // namespace holder
