// Result parsing and aggregation. The expected numbers here are hand-counted
// from the fixture files — if a fixture changes, recount before touching
// the assertions.

#include <doctest.h>

#include <nlohmann/json.hpp>

#include "grove/reporting.hpp"
#include "grove/util.hpp"
#include "support/test_util.hpp"

using namespace grove;
using reporting::CaseStatus;
namespace fs = std::filesystem;

namespace {

std::vector<fs::path> shipped_fixture_files() {
  // The five well-formed shipped results. Hand count:
  //   api-orders.xml    1 case, failed   (failure with body text)
  //   api-smoke.xml     1 case, passed
  //   unit-auth.xml     1 case, passed
  //   unit-cart.xml     1 case, failed   (failure with message attribute)
  //   unit-catalog.xml  1 case, passed   (testsuites-wrapped)
  // => totals run=5 passed=3 failed=2 errored=0
  return {
      testsupport::fixture("fixtures/results/api-orders.xml"),
      testsupport::fixture("fixtures/results/api-smoke.xml"),
      testsupport::fixture("fixtures/results/unit-auth.xml"),
      testsupport::fixture("fixtures/results/unit-cart.xml"),
      testsupport::fixture("fixtures/results/unit-catalog.xml"),
  };
}

const reporting::TestCaseResult* find_case(const reporting::TestReport& report,
                                           const std::string& name) {
  for (const auto& c : report.cases) {
    if (c.case_name == name) return &c;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("parses a plain testsuite with passes, failures and errors") {
  const std::string xml = R"(<?xml version="1.0"?>
<testsuite name="mix" tests="4" failures="1" errors="1" time="1.0">
  <testcase name="ok_one" time="0.25"/>
  <testcase name="bad_one" time="0.5">
    <failure message="expected 1 got 2">stack here</failure>
  </testcase>
  <testcase name="broken_one" time="0.1">
    <error message="connection reset"/>
  </testcase>
  <testcase name="ok_two" time="0.15"/>
</testsuite>)";

  auto cases = reporting::parse_result_file(xml, "mix.xml");
  REQUIRE(cases.size() == 4);

  CHECK(cases[0].case_name == "ok_one");
  CHECK(cases[0].status == CaseStatus::passed);
  CHECK(cases[0].duration_seconds == doctest::Approx(0.25));

  CHECK(cases[1].case_name == "bad_one");
  CHECK(cases[1].status == CaseStatus::failed);
  REQUIRE(cases[1].message.has_value());
  CHECK(*cases[1].message == "expected 1 got 2");  // attribute preferred over body

  CHECK(cases[2].status == CaseStatus::errored);
  CHECK(*cases[2].message == "connection reset");
}

TEST_CASE("failure body text becomes the message when the attribute is absent") {
  const std::string xml = R"(<testsuite name="s">
  <testcase name="t" time="0.1">
    <failure>
      timed out waiting for response after 1.5s
    </failure>
  </testcase>
</testsuite>)";
  auto cases = reporting::parse_result_file(xml);
  REQUIRE(cases.size() == 1);
  CHECK(cases[0].status == CaseStatus::failed);
  CHECK(*cases[0].message == "timed out waiting for response after 1.5s");  // trimmed
}

TEST_CASE("testsuites wrapper with nested suites flattens to all cases") {
  const std::string xml = R"(<testsuites name="all">
  <testsuite name="a"><testcase name="a1" time="0.1"/><testcase name="a2" time="0.1"/></testsuite>
  <testsuite name="b"><testcase name="b1" time="0.1"><error message="boom"/></testcase></testsuite>
</testsuites>)";
  auto cases = reporting::parse_result_file(xml);
  REQUIRE(cases.size() == 3);
  CHECK(cases[2].status == CaseStatus::errored);
}

TEST_CASE("suite-level count attributes are ignored; elements are the truth") {
  // The suite header lies (tests="99" failures="9"); counting must not care.
  const std::string xml = R"(<testsuite name="liar" tests="99" failures="9" errors="3">
  <testcase name="one" time="0.1"/>
  <testcase name="two" time="0.1"/>
</testsuite>)";
  testsupport::ScratchDir tmp;
  util::write_file(tmp / "liar.xml", xml);
  auto report = reporting::aggregate("run-x", {tmp / "liar.xml"});
  CHECK(report.totals == reporting::Totals{2, 2, 0, 0});
}

TEST_CASE("a malformed document yields one errored synthetic case") {
  auto cases = reporting::parse_result_file("<testsuite><testcase nam", "truncated.xml");
  REQUIRE(cases.size() == 1);
  CHECK(cases[0].case_name == "truncated.xml");
  CHECK(cases[0].status == CaseStatus::errored);
  REQUIRE(cases[0].message.has_value());
}

TEST_CASE("shipped fixtures aggregate to the hand-counted totals") {
  auto report = reporting::aggregate("run-fixtures", shipped_fixture_files());

  CHECK(report.run_id == "run-fixtures");
  CHECK(report.totals == reporting::Totals{5, 3, 2, 0});

  // Sorted by case name.
  REQUIRE(report.cases.size() == 5);
  for (std::size_t i = 1; i < report.cases.size(); ++i) {
    CHECK(report.cases[i - 1].case_name <= report.cases[i].case_name);
  }

  const auto* cart = find_case(report, "total_reflects_quantity");
  REQUIRE(cart != nullptr);
  CHECK(cart->status == CaseStatus::failed);
  CHECK(*cart->message == "expected 29.97 got 19.98");

  const auto* orders = find_case(report, "create_order_rejects_empty_cart");
  REQUIRE(orders != nullptr);
  CHECK(orders->status == CaseStatus::failed);
  CHECK(*orders->message == "expected 422 got 500");

  const auto* auth = find_case(report, "login_accepts_valid_token");
  REQUIRE(auth != nullptr);
  CHECK(auth->status == CaseStatus::passed);
  CHECK(auth->duration_seconds == doctest::Approx(0.211));
}

TEST_CASE("adding the malformed fixture adds exactly one errored case") {
  auto files = shipped_fixture_files();
  files.push_back(testsupport::fixture("fixtures/results/truncated.xml"));
  auto report = reporting::aggregate("run-fixtures", files);
  CHECK(report.totals == reporting::Totals{6, 3, 2, 1});

  const auto* synthetic = find_case(report, "truncated.xml");
  REQUIRE(synthetic != nullptr);
  CHECK(synthetic->status == CaseStatus::errored);
}

TEST_CASE("extra cases join the aggregate and its counts") {
  reporting::TestCaseResult crashed;
  crashed.case_name = "aa_crashed_runner";
  crashed.status = CaseStatus::errored;
  crashed.message = "test task exited 137 without writing a result file";

  auto report = reporting::aggregate("run-x", shipped_fixture_files(), {crashed});
  CHECK(report.totals == reporting::Totals{6, 3, 2, 1});
  CHECK(report.cases.front().case_name == "aa_crashed_runner");  // sorted in
}

TEST_CASE("aggregation is deterministic regardless of file order") {
  auto forward = shipped_fixture_files();
  auto backward = forward;
  std::reverse(backward.begin(), backward.end());

  auto a = reporting::aggregate("run-x", forward);
  auto b = reporting::aggregate("run-x", backward);
  CHECK(reporting::render_report(a, reporting::ReportFormat::json) ==
        reporting::render_report(b, reporting::ReportFormat::json));
}

TEST_CASE("json rendering round-trips the report") {
  auto report = reporting::aggregate("run-rt", shipped_fixture_files());
  std::string text = reporting::render_report(report, reporting::ReportFormat::json);

  auto doc = nlohmann::json::parse(text);
  CHECK(doc["run_id"] == "run-rt");
  CHECK(doc["totals"]["run"] == 5);
  CHECK(doc["totals"]["passed"] == 3);
  CHECK(doc["totals"]["failed"] == 2);
  CHECK(doc["totals"]["errored"] == 0);
  REQUIRE(doc["cases"].size() == 5);
  for (const auto& c : doc["cases"]) {
    CHECK(c.contains("name"));
    CHECK(c.contains("status"));
    CHECK(c.contains("duration_s"));
  }
  // Failed cases carry their message through.
  bool found_message = false;
  for (const auto& c : doc["cases"]) {
    if (c["status"] == "failed") {
      CHECK(c.contains("message"));
      found_message = true;
    }
  }
  CHECK(found_message);
}

TEST_CASE("html rendering escapes markup in case data") {
  reporting::TestReport report;
  report.run_id = "run-h";
  reporting::TestCaseResult nasty;
  nasty.case_name = "x<y&z";
  nasty.status = CaseStatus::failed;
  nasty.message = "saw <script>alert(1)</script>";
  report.cases.push_back(nasty);
  report.totals = {1, 0, 1, 0};

  std::string html = reporting::render_report(report, reporting::ReportFormat::html);
  CHECK(html.find("x&lt;y&amp;z") != std::string::npos);
  CHECK(html.find("<script>") == std::string::npos);
  CHECK(html.find("class=\"case failed\"") != std::string::npos);
}

TEST_CASE("html rendering marks each status class") {
  auto files = shipped_fixture_files();
  files.push_back(testsupport::fixture("fixtures/results/truncated.xml"));
  auto report = reporting::aggregate("run-h2", files);
  std::string html = reporting::render_report(report, reporting::ReportFormat::html);
  CHECK(html.find("class=\"case passed\"") != std::string::npos);
  CHECK(html.find("class=\"case failed\"") != std::string::npos);
  CHECK(html.find("class=\"case errored\"") != std::string::npos);
}
