#include "grove/reporting.hpp"

#include <algorithm>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <nlohmann/json.hpp>

#include "grove/errors.hpp"
#include "grove/util.hpp"

namespace grove::reporting {

namespace pt = boost::property_tree;

const char* to_string(CaseStatus status) {
  switch (status) {
    case CaseStatus::passed: return "passed";
    case CaseStatus::failed: return "failed";
    case CaseStatus::errored: return "errored";
  }
  return "?";
}

namespace {

std::string trimmed(std::string s) {
  const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && is_space(s.front())) s.erase(s.begin());
  while (!s.empty() && is_space(s.back())) s.pop_back();
  return s;
}

TestCaseResult synthetic_error(const std::string& source_name, const std::string& why) {
  TestCaseResult r;
  r.case_name = source_name;
  r.status = CaseStatus::errored;
  r.duration_seconds = 0.0;
  r.message = why;
  return r;
}

void collect_cases(const pt::ptree& suite, std::vector<TestCaseResult>& out) {
  for (const auto& [key, node] : suite) {
    if (key != "testcase") continue;
    TestCaseResult r;
    r.case_name = node.get<std::string>("<xmlattr>.name", "(unnamed)");
    r.duration_seconds = std::max(0.0, node.get<double>("<xmlattr>.time", 0.0));
    for (const auto& [child_key, child] : node) {
      if (child_key == "failure" || child_key == "error") {
        r.status = child_key == "failure" ? CaseStatus::failed : CaseStatus::errored;
        std::string msg = child.get<std::string>("<xmlattr>.message", "");
        if (msg.empty()) msg = trimmed(child.get_value<std::string>());
        if (!msg.empty()) r.message = msg;
        break;
      }
    }
    out.push_back(std::move(r));
  }
}

std::string html_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::vector<TestCaseResult> parse_result_file(const std::string& xml_text,
                                              const std::string& source_name) {
  pt::ptree tree;
  try {
    std::istringstream in(xml_text);
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    return {synthetic_error(source_name, std::string("malformed result file: ") + e.what())};
  }

  std::vector<TestCaseResult> cases;
  if (auto suite = tree.get_child_optional("testsuite")) {
    collect_cases(*suite, cases);
    return cases;
  }
  if (auto suites = tree.get_child_optional("testsuites")) {
    for (const auto& [key, node] : *suites) {
      if (key == "testsuite") collect_cases(node, cases);
    }
    return cases;
  }
  return {synthetic_error(source_name, "malformed result file: no testsuite element")};
}

TestReport aggregate(const std::string& run_id, const std::vector<std::filesystem::path>& files,
                     const std::vector<TestCaseResult>& extra_cases) {
  std::vector<std::filesystem::path> ordered = files;
  std::sort(ordered.begin(), ordered.end(),
            [](const auto& a, const auto& b) { return a.filename() < b.filename(); });

  TestReport report;
  report.run_id = run_id;
  for (const auto& file : ordered) {
    std::vector<TestCaseResult> cases;
    try {
      cases = parse_result_file(util::read_file(file), file.filename().string());
    } catch (const std::exception& e) {
      cases = {synthetic_error(file.filename().string(), e.what())};
    }
    report.cases.insert(report.cases.end(), cases.begin(), cases.end());
  }
  report.cases.insert(report.cases.end(), extra_cases.begin(), extra_cases.end());
  std::stable_sort(report.cases.begin(), report.cases.end(),
                   [](const TestCaseResult& a, const TestCaseResult& b) {
                     return a.case_name < b.case_name;
                   });
  for (const auto& c : report.cases) {
    ++report.totals.run;
    switch (c.status) {
      case CaseStatus::passed: ++report.totals.passed; break;
      case CaseStatus::failed: ++report.totals.failed; break;
      case CaseStatus::errored: ++report.totals.errored; break;
    }
  }
  report.generated_at = std::chrono::system_clock::now();
  return report;
}

std::string render_report(const TestReport& report, ReportFormat format) {
  if (format == ReportFormat::json) {
    nlohmann::ordered_json doc;
    doc["run_id"] = report.run_id;
    doc["totals"] = {{"run", report.totals.run},
                     {"passed", report.totals.passed},
                     {"failed", report.totals.failed},
                     {"errored", report.totals.errored}};
    doc["cases"] = nlohmann::ordered_json::array();
    for (const auto& c : report.cases) {
      nlohmann::ordered_json jc;
      jc["name"] = c.case_name;
      jc["status"] = to_string(c.status);
      jc["duration_s"] = c.duration_seconds;
      if (c.message) jc["message"] = *c.message;
      doc["cases"].push_back(std::move(jc));
    }
    return doc.dump(2) + "\n";
  }
  if (format == ReportFormat::html) {
    std::ostringstream os;
    os << "<!doctype html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n"
       << "<title>Test report " << html_escape(report.run_id) << "</title>\n"
       << "<style>\n"
       << "body{font-family:sans-serif;margin:2em}table{border-collapse:collapse}\n"
       << "td,th{border:1px solid #ccc;padding:4px 10px;text-align:left}\n"
       << ".passed{color:#1a7f37}.failed{color:#cf222e}.errored{color:#9a6700}\n"
       << "</style>\n</head>\n<body>\n"
       << "<h1>Test report &mdash; run " << html_escape(report.run_id) << "</h1>\n"
       << "<p class=\"totals\">" << report.totals.run << " run, " << report.totals.passed
       << " passed, " << report.totals.failed << " failed, " << report.totals.errored
       << " errored</p>\n"
       << "<table>\n<thead><tr><th>Case</th><th>Status</th><th>Duration (s)</th>"
       << "<th>Message</th></tr></thead>\n<tbody>\n";
    for (const auto& c : report.cases) {
      os << "<tr class=\"case " << to_string(c.status) << "\"><td>" << html_escape(c.case_name)
         << "</td><td>" << to_string(c.status) << "</td><td>" << c.duration_seconds << "</td><td>"
         << html_escape(c.message.value_or("")) << "</td></tr>\n";
    }
    os << "</tbody>\n</table>\n</body>\n</html>\n";
    return os.str();
  }
  throw RejectedError("unknown report format");
}

}  // namespace grove::reporting
