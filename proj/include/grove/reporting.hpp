#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace grove::reporting {

enum class CaseStatus { passed, failed, errored };

const char* to_string(CaseStatus status);

struct TestCaseResult {
  std::string case_name;
  CaseStatus status = CaseStatus::passed;
  double duration_seconds = 0.0;
  std::optional<std::string> message;
};

struct Totals {
  int run = 0;
  int passed = 0;
  int failed = 0;
  int errored = 0;
  bool operator==(const Totals&) const = default;
};

struct TestReport {
  std::string run_id;
  Totals totals;
  std::vector<TestCaseResult> cases;  // sorted by case name
  std::chrono::system_clock::time_point generated_at;
};

// Parses the JUnit-compatible subset: a <testsuite> (optionally wrapped in
// <testsuites>) holding <testcase name time> elements with nested <failure>
// or <error>. Suite-level count attributes are ignored; counts always come
// from the elements themselves. A malformed document yields one errored
// synthetic case named after `source_name` — malformation is data here, not
// an error.
std::vector<TestCaseResult> parse_result_file(const std::string& xml_text,
                                              const std::string& source_name = "<input>");

// Parses every file, appends `extra_cases` (synthesized results for test
// tasks that died without writing a file), sorts cases by name and recounts
// the totals from the elements.
TestReport aggregate(const std::string& run_id, const std::vector<std::filesystem::path>& files,
                     const std::vector<TestCaseResult>& extra_cases = {});

enum class ReportFormat { json, html };

std::string render_report(const TestReport& report, ReportFormat format);

}  // namespace grove::reporting
