#include "grove/costmodel.hpp"

#include <nlohmann/json.hpp>

#include "grove/errors.hpp"
#include "grove/util.hpp"

namespace grove::cost {

CostRates default_rates() {
  CostRates r;
  r.base_infra_monthly = 360.0;  // orchestrator + 2 small always-on nodes
  r.env_hour_rate = 0.065;       // ~0.25 vCPU / 512 MB long-running task
  r.task_minute_rate = 0.0009;   // short burst task, per minute
  return r;
}

CostEstimate estimate_monthly_cost(const CostParams& p, const CostRates& r) {
  const double params[] = {p.active_branches, p.pushes_per_branch_per_day,
                           p.build_minutes_per_push, p.test_minutes_per_push,
                           p.env_hours_per_branch_per_month};
  for (double v : params) {
    if (v < 0) throw RejectedError("cost params must be non-negative");
  }
  const double rates[] = {r.base_infra_monthly, r.env_hour_rate, r.task_minute_rate};
  for (double v : rates) {
    if (v < 0) throw RejectedError("cost rates must be non-negative");
  }

  const double env_cost =
      p.active_branches * p.env_hours_per_branch_per_month * r.env_hour_rate;
  const double task_minutes_per_month =
      p.active_branches * p.pushes_per_branch_per_day * 30.0 *
      (p.build_minutes_per_push + p.test_minutes_per_push);
  const double task_cost = task_minutes_per_month * r.task_minute_rate;

  CostEstimate e;
  e.breakdown["base_infra"] = r.base_infra_monthly;
  e.breakdown["environments"] = env_cost;
  e.breakdown["tasks"] = task_cost;
  e.total = r.base_infra_monthly + env_cost + task_cost;
  return e;
}

Scenario load_scenario(const std::filesystem::path& file) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(util::read_file(file));
  } catch (const nlohmann::json::exception& e) {
    throw RejectedError("bad scenario file " + file.string() + ": " + e.what());
  }

  Scenario s;
  try {
    s.name = doc.value("name", file.stem().string());
    const auto& jp = doc.at("params");
    s.params.active_branches = jp.at("active_branches").get<double>();
    s.params.pushes_per_branch_per_day = jp.at("pushes_per_branch_per_day").get<double>();
    s.params.build_minutes_per_push = jp.at("build_minutes_per_push").get<double>();
    s.params.test_minutes_per_push = jp.at("test_minutes_per_push").get<double>();
    s.params.env_hours_per_branch_per_month =
        jp.at("env_hours_per_branch_per_month").get<double>();

    s.rates = default_rates();
    if (doc.contains("rates")) {
      const auto& jr = doc["rates"];
      s.rates.base_infra_monthly = jr.value("base_infra_monthly", s.rates.base_infra_monthly);
      s.rates.env_hour_rate = jr.value("env_hour_rate", s.rates.env_hour_rate);
      s.rates.task_minute_rate = jr.value("task_minute_rate", s.rates.task_minute_rate);
    }
  } catch (const nlohmann::json::exception& e) {
    throw RejectedError("bad scenario file " + file.string() + ": " + e.what());
  }
  return s;
}

}  // namespace grove::cost
