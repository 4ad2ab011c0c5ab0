#pragma once

#include <filesystem>
#include <map>
#include <string>

namespace grove::cost {

// Monthly usage profile for one repository's preview environments.
struct CostParams {
  double active_branches = 0;
  double pushes_per_branch_per_day = 0;
  double build_minutes_per_push = 0;
  double test_minutes_per_push = 0;
  double env_hours_per_branch_per_month = 0;
};

// Unit prices. Calibrated, 2024-era defaults; see default_rates(). They exist
// to make projections comparable, not to reproduce a cloud bill.
struct CostRates {
  double base_infra_monthly = 0;  // orchestrator host + two runner nodes
  double env_hour_rate = 0;       // long-lived preview environment, per hour
  double task_minute_rate = 0;    // build/test task, per task-minute
};

struct CostEstimate {
  double total = 0;
  std::map<std::string, double> breakdown;  // base_infra, environments, tasks
};

// Calibrated so an 11-branch shop with moderate push traffic lands near
// USD 1000/month. 2024-era numbers, no fidelity claim beyond that.
CostRates default_rates();

// total = base + branches*env_hours*env_rate
//       + branches*pushes/day*30*(build_min+test_min)*task_rate
// Throws RejectedError when any input is negative.
CostEstimate estimate_monthly_cost(const CostParams& p, const CostRates& r);

// Loads {params:{...}, rates:{...}} from a scenario JSON file. Rates are
// optional; missing ones fall back to default_rates().
struct Scenario {
  std::string name;
  CostParams params;
  CostRates rates;
};
Scenario load_scenario(const std::filesystem::path& file);

}  // namespace grove::cost
