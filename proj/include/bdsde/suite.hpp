#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "bdsde/config.hpp"

namespace bdsde {

enum class SuiteStatus { Pass, Fail, Skipped };

std::string_view to_string(SuiteStatus status) noexcept;

struct SuiteRow {
  std::string suite;
  SuiteStatus status = SuiteStatus::Skipped;
  double value = 0.0;
  double tolerance = 0.0;
  std::uint64_t seed = 0;
  double runtime_s = 0.0;
  std::string detail;
};

struct SuiteReport {
  std::vector<SuiteRow> rows;  // one per selected suite, in selection order

  bool passed() const noexcept;  // no row failed
};

// Runs one check. Numerical errors raised inside a check become a failed row.
SuiteRow run_single_suite(SuiteKind kind, const ExperimentConfig& config);

// Throws Error{ConfigParseError | UnknownCoefficientName} for an invalid config.
SuiteReport run_suite(const ExperimentConfig& config);

// CSV columns: suite,status,value,tolerance,seed,detail. Runtime is left out so
// the file depends only on the config and the seed.
void write_suite_csv(std::ostream& out, const SuiteReport& report);
void write_suite_text(std::ostream& out, const SuiteReport& report);

}  // namespace bdsde
