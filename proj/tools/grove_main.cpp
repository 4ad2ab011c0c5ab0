// grove — per-branch build/deploy/test orchestration.
//
// serve          run gateway + engine + portal from a config file
// inject         feed a recorded webhook fixture through a running gateway
// envs           list live environments from a running portal
// stop-env       tear one ref's environment down
// estimate-cost  project monthly infrastructure cost for a scenario
// replay         drive a scripted simulator scenario end-to-end in-process

#include <atomic>
#include <csignal>
#include <cstdio>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "grove/config.hpp"
#include "grove/costmodel.hpp"
#include "grove/errors.hpp"
#include "grove/log.hpp"
#include "grove/service.hpp"
#include "grove/util.hpp"

using nlohmann::json;

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

int cmd_serve(const std::string& config_file) {
  grove::Config cfg = grove::load_config(config_file);
  grove::Service service(cfg);
  if (!service.start_http()) return 2;

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cout << "gateway: http://" << cfg.bind.gateway_host << ":" << service.gateway_port()
            << "  portal: http://" << cfg.bind.portal_host << ":" << service.portal_port()
            << "\npress Ctrl-C to stop\n";
  while (!g_stop) {
    std::this_thread::sleep_for(std::chrono::milliseconds(200));
  }
  std::cout << "shutting down\n";
  return 0;
}

int cmd_inject(const std::string& fixture_file, const std::string& config_file) {
  grove::Config cfg = grove::load_config(config_file);
  json fixture = json::parse(grove::util::read_file(fixture_file));

  const std::string hook = fixture.value("hook", "multibranch");
  const std::string path = "/hooks/" + hook + "/invoke?token=" + cfg.hook_token;

  httplib::Client client(cfg.bind.gateway_host, cfg.bind.gateway_port);
  client.set_connection_timeout(3, 0);
  httplib::Headers headers;
  if (fixture.contains("event")) {
    headers.emplace("X-GitHub-Event", fixture["event"].get<std::string>());
  }
  if (fixture.contains("delivery_id")) {
    headers.emplace("X-GitHub-Delivery", fixture["delivery_id"].get<std::string>());
  }
  auto res = client.Post(path, headers, fixture.at("payload").dump(), "application/json");
  if (!res) {
    std::cerr << "no response from gateway at " << cfg.bind.gateway_host << ":"
              << cfg.bind.gateway_port << " — is `serve` running?\n";
    return 2;
  }
  std::cout << res->status << " " << res->body << "\n";
  return res->status < 400 ? 0 : 2;
}

int cmd_envs(const std::string& config_file) {
  grove::Config cfg = grove::load_config(config_file);
  httplib::Client client(cfg.bind.portal_host, cfg.bind.portal_port);
  client.set_connection_timeout(3, 0);
  auto res = client.Get("/environments");
  if (!res) {
    std::cerr << "no response from portal — is `serve` running?\n";
    return 2;
  }
  json envs = json::parse(res->body);
  if (envs.empty()) {
    std::cout << "no live environments\n";
    return 0;
  }
  for (const auto& e : envs) {
    std::cout << e["ref"]["name"].get<std::string>() << " (" << e["ref"]["safe_id"].get<std::string>()
              << ") -> " << e["endpoint"]["host"].get<std::string>() << ":"
              << e["endpoint"]["port"].get<int>() << "  task " << e["task_id"].get<std::string>()
              << "\n";
  }
  return 0;
}

int cmd_stop_env(const std::string& name, const std::string& kind,
                 const std::string& config_file) {
  grove::Config cfg = grove::load_config(config_file);
  httplib::Client client(cfg.bind.gateway_host, cfg.bind.gateway_port);
  client.set_connection_timeout(3, 0);
  std::string path = "/admin/cleanup?token=" + cfg.hook_token + "&name=" + name +
                     "&kind=" + kind;
  auto res = client.Post(path, "", "application/json");
  if (!res) {
    std::cerr << "no response from gateway — is `serve` running?\n";
    return 2;
  }
  if (res->status != 200) {
    std::cerr << res->status << " " << res->body << "\n";
    return 2;
  }
  json body = json::parse(res->body);
  std::cout << body["stopped"].get<int>() << " stopped\n";
  return 0;
}

int cmd_estimate_cost(const std::string& scenario_file) {
  grove::cost::Scenario scenario = grove::cost::load_scenario(scenario_file);
  grove::cost::CostEstimate estimate =
      grove::cost::estimate_monthly_cost(scenario.params, scenario.rates);
  std::printf("scenario: %s\n", scenario.name.c_str());
  std::printf("  base infrastructure   %10.2f USD\n", estimate.breakdown.at("base_infra"));
  std::printf("  environments          %10.2f USD\n", estimate.breakdown.at("environments"));
  std::printf("  build/test tasks      %10.2f USD\n", estimate.breakdown.at("tasks"));
  std::printf("  total                 %10.2f USD / month\n", estimate.total);
  return 0;
}

int cmd_replay(const std::string& scenario_file) {
  json scenario = json::parse(grove::util::read_file(scenario_file));

  // Self-contained run: temp storage, a synthesized source tree, and the
  // simulator programs the scenario scripts.
  auto workdir = std::filesystem::temp_directory_path() /
                 grove::util::fresh_id("grove-replay");
  auto source_root = workdir / "sources";
  std::vector<std::string> source_files =
      scenario.value("source_files", std::vector<std::string>{"app/app.txt", "tests/smoke.txt"});
  for (const auto& rel : source_files) {
    grove::util::write_file(source_root / rel, "");
  }

  grove::Config cfg;
  cfg.repository = scenario.value("repository", "example/app");
  cfg.storage_root = workdir / "workspaces";
  cfg.hook_token = "replay";
  cfg.backend = "sim";
  cfg.source_root = source_root;
  cfg.templates_dir = scenario.value("templates_dir", std::string("templates"));
  if (scenario.contains("build_targets")) {
    cfg.build_targets = scenario["build_targets"].get<std::vector<std::string>>();
  }
  if (scenario.contains("programs")) {
    cfg.sim.programs = grove::parse_sim_programs(scenario["programs"]);
  }

  grove::Service service(cfg);
  int step = 0;
  for (const auto& ev : scenario.at("events")) {
    grove::PipelineEvent event;
    const std::string kind = ev.at("kind").get<std::string>();
    if (kind == "branch-pushed") {
      event.kind = grove::EventKind::branch_pushed;
    } else if (kind == "pr-opened") {
      event.kind = grove::EventKind::pr_opened;
    } else if (kind == "pr-updated") {
      event.kind = grove::EventKind::pr_updated;
    } else if (kind == "branch-deleted") {
      event.kind = grove::EventKind::branch_deleted;
    } else if (kind == "pr-closed") {
      event.kind = grove::EventKind::pr_closed;
    } else {
      std::cerr << "unknown event kind '" << kind << "'\n";
      return 1;
    }
    bool is_pr = kind.rfind("pr-", 0) == 0;
    event.ref = grove::make_ref_key(
        is_pr ? grove::RefKind::pull_request : grove::RefKind::branch,
        ev.at("name").get<std::string>());
    if (ev.contains("commit")) event.commit_id = ev["commit"].get<std::string>();
    event.delivery_id = "replay-" + std::to_string(step++);
    event.received_at = std::chrono::system_clock::now();

    auto scheduled = service.engine().schedule_event(event);
    std::cout << "event " << kind << " " << event.ref.name << " -> "
              << (scheduled.kind == grove::ScheduleResult::Kind::scheduled      ? "scheduled"
                  : scheduled.kind == grove::ScheduleResult::Kind::coalesced    ? "coalesced"
                                                                                : "cleanup")
              << "\n";
    std::this_thread::sleep_for(std::chrono::milliseconds(ev.value("delay_ms_after", 50)));
  }

  if (!service.engine().wait_idle(60000)) {
    std::cerr << "engine did not go idle within 60s\n";
    return 2;
  }

  std::cout << "\nruns:\n";
  for (const auto& run : service.engine().runs()) {
    std::cout << "  " << run.run_id << "  " << run.ref.name << "  #" << run.run_number << "  "
              << to_string(run.outcome);
    if (run.report) {
      std::cout << "  (" << run.report->totals.run << " tests, " << run.report->totals.passed
                << " passed, " << run.report->totals.failed << " failed)";
    }
    std::cout << "\n";
  }
  std::cout << "environments:\n";
  auto environments = service.engine().environments();
  if (environments.empty()) std::cout << "  none\n";
  for (const auto& env : environments) {
    std::cout << "  " << env.ref.name << " -> " << env.endpoint.host << ":" << env.endpoint.port
              << "\n";
  }
  std::error_code ec;
  std::filesystem::remove_all(workdir, ec);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"per-branch build/deploy/test orchestration"};
  app.require_subcommand(1);

  std::string config_file = "configs/sim.json";
  std::string fixture_file;
  std::string scenario_file;
  std::string env_name;
  std::string env_kind = "branch";

  auto* serve = app.add_subcommand("serve", "run gateway + engine + portal");
  serve->add_option("-c,--config", config_file, "config file")->capture_default_str();

  auto* inject = app.add_subcommand("inject", "send a recorded webhook fixture to the gateway");
  inject->add_option("fixture", fixture_file, "fixture JSON file")->required();
  inject->add_option("-c,--config", config_file, "config file")->capture_default_str();

  auto* envs = app.add_subcommand("envs", "list live environments");
  envs->add_option("-c,--config", config_file, "config file")->capture_default_str();

  auto* stop_env = app.add_subcommand("stop-env", "tear down one ref's environment");
  stop_env->add_option("name", env_name, "branch name or PR number")->required();
  stop_env->add_option("--kind", env_kind, "branch | pull-request")->capture_default_str();
  stop_env->add_option("-c,--config", config_file, "config file")->capture_default_str();

  auto* estimate = app.add_subcommand("estimate-cost", "project monthly infrastructure cost");
  estimate->add_option("scenario", scenario_file, "scenario JSON file")->required();

  auto* replay = app.add_subcommand("replay", "run a scripted simulator scenario");
  replay->add_option("scenario", scenario_file, "scenario JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (serve->parsed()) return cmd_serve(config_file);
    if (inject->parsed()) return cmd_inject(fixture_file, config_file);
    if (envs->parsed()) return cmd_envs(config_file);
    if (stop_env->parsed()) return cmd_stop_env(env_name, env_kind, config_file);
    if (estimate->parsed()) return cmd_estimate_cost(scenario_file);
    if (replay->parsed()) return cmd_replay(scenario_file);
  } catch (const grove::RejectedError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
