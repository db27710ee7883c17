#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sigmar/path_types.hpp"
#include "sigmar/verification.hpp"

namespace sigmar {

// Recorded in every manifest so archived reports can be traced to a build.
inline constexpr const char* kCodeVersion = "sigmar 0.1.0";

// One number at 17 significant digits with a '.' decimal point regardless of
// locale; round-trips the exact binary value.
std::string csv_number(double v);

// report.csv, one row per check across the run's reports.  Columns are
// fixed: experiment, check, statistic, value, tolerance, pass, n_paths,
// n_steps, seed.  The check column is "<report name>.<row check>"; when a
// run holds several reports under one name, later ones get a "#k" suffix so
// every row stays addressable.
void write_report_csv(std::ostream& out, const std::string& experiment,
                      const std::vector<VerificationReport>& reports);

// report.json: the same reports with every field, including the fields the
// CSV has no room for (asserted flags, notes, parameter strings).
void write_report_json(std::ostream& out, const std::string& experiment,
                       const std::vector<VerificationReport>& reports);

// paths.jsonl: one role-tagged path per line.
void write_paths_jsonl(std::ostream& out, const std::string& experiment,
                       const std::vector<SamplePath>& paths);

bool all_asserted_pass(const std::vector<VerificationReport>& reports);

}  // namespace sigmar
