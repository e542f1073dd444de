#pragma once

#include "volnet/experiment.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace volnet::report {

/// One row per trial; numeric fields use 17 significant digits so a re-parse is exact.
void write_trials_csv(std::ostream& out, const std::vector<experiment::TrialResult>& trials);
/// Inverse of write_trials_csv. Test predictions are not part of the file and stay empty.
std::vector<experiment::TrialResult> parse_trials_csv(std::istream& in, const std::string& source_name);
std::vector<experiment::TrialResult> parse_trials_csv(const std::filesystem::path& path);

/// The twelve descriptive-statistics tables and the architecture t-test as markdown.
/// Depends on nothing but the trials, so it can be rebuilt from trials.csv.
std::string render_tables(const std::vector<experiment::TrialResult>& trials, const std::string& title);

/// `metric,split,statistic,MLFF,CFFN` with 17-digit values.
void write_tables_csv(std::ostream& out, const experiment::StatTables& tables);

/// Writes trials.csv, tables.md, tables.csv, config.txt and the plots into out_dir and
/// records the paths in report.artifacts.
std::vector<std::string> emit_report(experiment::ExperimentReport& report, const std::filesystem::path& out_dir,
                                     const std::string& data_source = {});

/// Replaces any partial output with a single error.txt describing the failure.
std::filesystem::path emit_error_report(const std::filesystem::path& out_dir, const std::string& message);

}  // namespace volnet::report
