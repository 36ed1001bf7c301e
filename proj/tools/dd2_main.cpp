// dd2: one binary for scenario authors, analysts and facilitators.
//
// Exit codes: 0 success, 1 validation findings, 2 usage error, 3 runtime failure.

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "dd2/analysis.h"
#include "dd2/error.h"
#include "dd2/http_api.h"
#include "dd2/sim.h"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

enum Exit { kOk = 0, kFindings = 1, kUsage = 2, kRuntime = 3 };

struct Ctx {
  bool as_json = false;
};

// Runtime failures that are not engine errors (I/O and the like).
struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_text(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw Failure("cannot read " + p.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  f << text;
  if (!f) throw Failure("cannot write " + p.string());
}

void print_findings(const dd2::ValidationReport& r) {
  for (const auto& f : r.findings)
    std::cout << (f.severity == dd2::Finding::Severity::Error ? "error   " : "warning ") << f.code << "  "
              << f.subject << ": " << f.message << '\n';
  std::cout << r.error_count() << " error(s), " << r.warning_count() << " warning(s)\n";
}

dd2::ValidationReport report_for_error(const dd2::Error& e) {
  dd2::ValidationReport r;
  r.findings.push_back({dd2::Finding::Severity::Error, std::string(dd2::error_code_name(e.code())), "scenario", e.what()});
  return r;
}

// Loads and validates; on findings prints the report and returns nullptr.
std::shared_ptr<const dd2::Scenario> load_checked(const Ctx& ctx, const std::string& path, int& exit_code) {
  const std::string text = read_text(path);
  dd2::ValidationReport report;
  std::shared_ptr<dd2::Scenario> s;
  try {
    s = std::make_shared<dd2::Scenario>(dd2::parse_scenario(text));
    report = dd2::validate_scenario(*s);
  } catch (const dd2::Error& e) {
    report = report_for_error(e);
  }
  if (report.ok()) return s;
  if (ctx.as_json)
    std::cout << json{{"ok", false}, {"report", dd2::report_to_json(report)}}.dump(2) << '\n';
  else
    print_findings(report);
  exit_code = kFindings;
  return nullptr;
}

int cmd_validate(const Ctx& ctx, const std::string& path) {
  const std::string text = read_text(path);
  dd2::ValidationReport report;
  try {
    report = dd2::validate_scenario(dd2::parse_scenario(text));
  } catch (const dd2::Error& e) {
    report = report_for_error(e);
  }
  if (ctx.as_json)
    std::cout << json{{"ok", report.ok()}, {"scenario", path}, {"report", dd2::report_to_json(report)}}.dump(2)
              << '\n';
  else
    print_findings(report);
  return report.ok() ? kOk : kFindings;
}

int cmd_graph(const Ctx& ctx, const std::string& path, const std::string& out) {
  int code = kOk;
  auto s = load_checked(ctx, path, code);
  if (!s) return code;
  const auto g = dd2::build_event_graph(*s);
  const std::string dot = dd2::emit_dot(g);
  const auto reach = dd2::reachability_report(*s);
  if (!out.empty()) write_text(out, dot);
  if (ctx.as_json) {
    json counts = json::object();
    for (auto k : {dd2::GraphEdge::Kind::Trigger, dd2::GraphEdge::Kind::Ignore, dd2::GraphEdge::Kind::Guard,
                   dd2::GraphEdge::Kind::Block})
      counts[std::string(dd2::edge_kind_name(k))] = g.count(k);
    json j = {{"ok", true},
              {"nodes", g.nodes.size()},
              {"edges", g.edges.size()},
              {"edge_counts", counts},
              {"reachability", dd2::reachability_to_json(reach)}};
    j["dot_path"] = out.empty() ? json(nullptr) : json(out);
    if (out.empty()) j["dot"] = dot;
    std::cout << j.dump(2) << '\n';
  } else {
    if (out.empty())
      std::cout << dot;
    else
      std::cout << "wrote " << out << " (" << g.nodes.size() << " nodes, " << g.edges.size() << " edges)\n";
    std::cerr << "unreachable events: " << reach.unreachable_events.size()
              << ", dead choices: " << reach.dead_choices.size() << ", trigger cycles: " << reach.trigger_cycles.size()
              << ", unsatisfiable conditions: " << reach.unsatisfiable_conditions.size() << '\n';
  }
  return kOk;
}

int cmd_cards(const Ctx& ctx, const std::string& path, const std::string& out) {
  int code = kOk;
  auto s = load_checked(ctx, path, code);
  if (!s) return code;
  const auto deck = dd2::export_cards(*s);
  dd2::write_cards(deck, out);
  if (ctx.as_json)
    std::cout << json{{"ok", true}, {"dir", out}, {"cards", deck.cards.size()}, {"index", deck.index.filename}}.dump(2)
              << '\n';
  else
    std::cout << "wrote " << deck.cards.size() << " cards and " << deck.index.filename << " to " << out << '\n';
  return kOk;
}

int cmd_simulate(const Ctx& ctx, const std::string& path, const std::string& policy_name, std::size_t runs,
                 std::uint64_t seed, const std::string& out, bool serial) {
  int code = kOk;
  auto s = load_checked(ctx, path, code);
  if (!s) return code;
  const auto policy = dd2::policy_by_name(policy_name);
  const auto results = serial ? dd2::run_batch_serial(s, policy, runs, seed) : dd2::run_batch_parallel(s, policy, runs, seed);
  const auto stats = dd2::summarize(results);
  const json summary = dd2::summary_to_json(stats, policy.name, seed);
  if (!out.empty()) {
    write_text(fs::path(out) / "runs.csv", dd2::results_to_csv(results));
    write_text(fs::path(out) / "summary.json", summary.dump(2) + "\n");
  }
  if (ctx.as_json) {
    json j = summary;
    j["ok"] = true;
    if (!out.empty()) j["out"] = out;
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << "policy " << policy.name << ", " << stats.n_runs << " runs from seed " << seed << '\n'
              << "survival rate " << stats.survival_rate << " (" << stats.survived << "/" << stats.n_runs << ")\n";
    for (const auto& [k, v] : stats.outcome_histogram) std::cout << "  " << k << ": " << v << '\n';
    std::cout << "profit mean " << stats.mean_profit << " min " << stats.min_profit << " max " << stats.max_profit
              << "\nshare mean " << stats.mean_share << " min " << stats.min_share << " max " << stats.max_share
              << "\nmean rounds survived " << stats.mean_rounds_survived << '\n';
    if (!out.empty()) std::cout << "wrote " << out << "/runs.csv and " << out << "/summary.json\n";
  }
  return kOk;
}

dd2::HttpApi* g_api = nullptr;
extern "C" void on_signal(int) {
  if (g_api) g_api->stop();
}

int cmd_serve(const Ctx& ctx, const std::string& scenarios, const std::string& bind, const std::string& data_dir) {
  dd2::ScenarioCatalog catalog;
  if (fs::is_directory(scenarios)) {
    catalog = dd2::load_catalog(scenarios);
  } else {
    int code = kOk;
    auto s = load_checked(ctx, scenarios, code);
    if (!s) return code;
    catalog.emplace(fs::path(scenarios).stem().string(), s);
  }
  if (catalog.empty()) throw Failure("no valid scenarios under " + scenarios);

  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) throw CLI::ValidationError("--bind", "expected host:port");
  const std::string host = bind.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(bind.substr(colon + 1));
  } catch (const std::exception&) {
    throw CLI::ValidationError("--bind", "port is not a number");
  }

  dd2::GameMaster gm({data_dir, nullptr});
  for (const auto& [id, why] : gm.recovery_failures()) std::cerr << "dd2: could not recover session " << id << ": " << why << '\n';
  const char* token = std::getenv("DD2_TOKEN");
  dd2::HttpApi api(gm, catalog, token ? token : "");
  g_api = &api;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  gm.start_timer();

  json names = json::array();
  for (const auto& [n, _] : catalog) names.push_back(n);
  if (ctx.as_json)
    std::cout << json{{"ok", true}, {"listening", bind}, {"data_dir", data_dir}, {"scenarios", names},
                      {"recovered_sessions", gm.session_ids().size()}}.dump()
              << std::endl;
  else
    std::cout << "dd2 serving " << names.dump() << " on http://" << bind << "/v1 (data in " << data_dir << ")"
              << std::endl;
  const bool ok = api.listen(host, port);
  gm.stop_timer();
  g_api = nullptr;
  if (!ok && !ctx.as_json) std::cerr << "dd2: could not listen on " << bind << '\n';
  if (!ok) throw Failure("could not listen on " + bind);
  return kOk;
}

void print_board(const dd2::GameState& st) {
  const auto v = dd2::make_state_view(st);
  std::cout << "\n=== Round " << v.round_index << "/" << v.rounds_limit << "  hours " << v.hours_remaining
            << "  profit " << dd2::format_money(v.projected_profit) << "  share " << dd2::format_money(v.share_price)
            << "  open " << v.open_events.size() << "/" << v.open_event_cap << " ===\n";
  for (const auto& e : v.open_events)
    std::cout << "  [" << e.id << "] " << e.title << (e.ignored_count ? " (ignored before)" : "") << "\n      "
              << e.description << '\n';
}

int cmd_play(const Ctx& ctx, const std::string& path, std::uint64_t seed, const std::string& log_path) {
  int code = kOk;
  auto s = load_checked(ctx, path, code);
  if (!s) return code;
  dd2::SystemClock clock;
  dd2::Journal journal(s, seed, nullptr, clock.wall_time());
  const std::string log_file = log_path.empty() ? "dd2-play-" + std::to_string(seed) + ".jsonl" : log_path;
  auto flush_log = [&] { write_text(log_file, dd2::records_to_jsonl(journal.records())); };

  std::cout << s->meta.name << ": you are the CISO. Seed " << seed << ". Type q to quit.\n";
  while (!journal.state().outcome.terminal()) {
    const auto legal = dd2::legal_actions(journal.state());
    if (journal.state().round_active) print_board(journal.state());
    for (std::size_t i = 0; i < legal.size(); ++i) std::cout << "  " << i + 1 << ") " << dd2::describe(legal[i]) << '\n';
    std::cout << "> " << std::flush;
    std::string line;
    if (!std::getline(std::cin, line) || line == "q") break;
    std::size_t pick = 0;
    try {
      pick = std::stoul(line);
    } catch (const std::exception&) {
      std::cout << "enter a number from the list\n";
      continue;
    }
    if (pick < 1 || pick > legal.size()) {
      std::cout << "enter a number from the list\n";
      continue;
    }
    const auto out = journal.apply(legal[pick - 1], dd2::Actor::Team, clock.wall_time());
    if (out.feedback && !out.feedback->text.empty()) std::cout << "  -> " << out.feedback->text << '\n';
    if (out.draw)
      for (const auto& a : out.draw->on_draw_applied)
        std::cout << "  !! " << s->find_event(a.event_id)->title << '\n';
    flush_log();
  }
  flush_log();
  const auto& o = journal.state().outcome;
  if (ctx.as_json)
    std::cout << json{{"ok", true},
                      {"status", std::string(dd2::outcome_status_name(o.status))},
                      {"reason", std::string(dd2::outcome_reason_name(o.reason))},
                      {"log", log_file}}.dump(2)
              << '\n';
  else
    std::cout << "\nOutcome: " << dd2::outcome_status_name(o.status) << " (" << dd2::outcome_reason_name(o.reason)
              << "). Log written to " << log_file << '\n';
  return kOk;
}

bool wants_json(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    std::string_view a = argv[i];
    if (a == "--format=json") return true;
    if (a == "--format" && i + 1 < argc && std::string_view(argv[i + 1]) == "json") return true;
  }
  return false;
}

void report_failure(const Ctx& ctx, const std::string& code, const std::string& message, const json& details = nullptr) {
  if (ctx.as_json) {
    json err = {{"code", code}, {"message", message}};
    if (!details.is_null()) err["details"] = details;
    std::cout << json{{"ok", false}, {"error", err}}.dump(2) << '\n';
  } else {
    std::cerr << "dd2: " << message << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  Ctx ctx;
  ctx.as_json = wants_json(argc, argv);

  CLI::App app{"Decide Harder: incident response exercise tools", "dd2"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string format = "text";
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "json"}));

  std::string scenario, out, policy = "random-legal", bind = "127.0.0.1:8080", data_dir;
  std::uint64_t seed = 0;
  std::size_t runs = 100;
  bool serial = false;
  if (const char* d = std::getenv("DD2_DATA_DIR")) data_dir = d;
  if (data_dir.empty()) data_dir = "dd2-data";

  auto* validate = app.add_subcommand("validate", "Check a scenario file and list findings");
  validate->add_option("--scenario", scenario, "Scenario JSON")->required();

  auto* graph = app.add_subcommand("graph", "Write the event graph as DOT plus a reachability report");
  graph->add_option("--scenario", scenario, "Scenario JSON")->required();
  graph->add_option("--out", out, "DOT file (stdout when omitted)");

  auto* cards = app.add_subcommand("cards", "Export the printable card deck as HTML");
  cards->add_option("--scenario", scenario, "Scenario JSON")->required();
  cards->add_option("--out", out, "Output directory")->required();

  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo playthroughs with a bundled policy");
  simulate->add_option("--scenario", scenario, "Scenario JSON")->required();
  simulate->add_option("--policy", policy, "ignore-all | random-legal | cheapest-first")
      ->check(CLI::IsMember(dd2::policy_names()));
  simulate->add_option("--runs", runs, "Number of runs")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", seed, "Base seed");
  simulate->add_option("--out", out, "Directory for runs.csv and summary.json");
  simulate->add_flag("--serial", serial, "Run on one thread");

  auto* serve = app.add_subcommand("serve", "Run the session service");
  serve->add_option("--scenario", scenario, "Scenario directory or file")->required();
  serve->add_option("--bind", bind, "host:port");
  serve->add_option("--data-dir", data_dir, "Session storage (env DD2_DATA_DIR)");

  auto* play = app.add_subcommand("play", "Play a session in the terminal");
  play->add_option("--scenario", scenario, "Scenario JSON")->required();
  play->add_option("--seed", seed, "Session seed");
  play->add_option("--out", out, "Decision log file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_failure(ctx, "Usage", e.what());
    if (!ctx.as_json) std::cerr << "run 'dd2 --help' for usage\n";
    return kUsage;
  }
  ctx.as_json = format == "json";

  try {
    if (*validate) return cmd_validate(ctx, scenario);
    if (*graph) return cmd_graph(ctx, scenario, out);
    if (*cards) return cmd_cards(ctx, scenario, out);
    if (*simulate) return cmd_simulate(ctx, scenario, policy, runs, seed, out, serial);
    if (*serve) return cmd_serve(ctx, scenario, bind, data_dir);
    if (*play) return cmd_play(ctx, scenario, seed, out);
  } catch (const CLI::ValidationError& e) {
    report_failure(ctx, "Usage", e.what());
    return kUsage;
  } catch (const dd2::Error& e) {
    report_failure(ctx, std::string(dd2::error_code_name(e.code())), e.what(), e.details());
    return kRuntime;
  } catch (const std::exception& e) {
    report_failure(ctx, "RuntimeFailure", e.what());
    return kRuntime;
  }
  return kUsage;
}
