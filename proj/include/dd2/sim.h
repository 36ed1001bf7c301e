#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dd2/journal.h"
#include "dd2/view.h"
#include "json.hpp"

namespace dd2 {

// A policy sees the player-facing view and the legal actions only. The Rng
// is a per-playthrough policy stream, separate from the engine's draws.
struct Policy {
  std::string name;
  std::function<Action(const StateView&, std::span<const Action>, Rng&)> decide;
};

Policy ignore_all_policy();
Policy random_legal_policy();
Policy cheapest_first_policy();

// "ignore-all" | "random-legal" | "cheapest-first"; UnknownIdentifier otherwise.
Policy policy_by_name(std::string_view name);
std::vector<std::string> policy_names();

struct PlaythroughResult {
  std::uint64_t seed = 0;
  int rounds_completed = 0;  // rounds that reached end_round
  int final_round = 0;
  Outcome outcome;
  Money final_profit = 0;
  Money final_share = 0;
  std::vector<int> open_per_round;  // open count right after each begin_round
  std::vector<Action> trace;        // every applied action, begin_round included
  std::vector<LogRecord> log;       // only when requested

  bool operator==(const PlaythroughResult& o) const {
    return seed == o.seed && rounds_completed == o.rounds_completed && final_round == o.final_round &&
           outcome == o.outcome && final_profit == o.final_profit && final_share == o.final_share &&
           open_per_round == o.open_per_round && trace == o.trace;
  }
};

struct PlayOptions {
  nlohmann::json overrides = nullptr;
  bool keep_log = false;
};

// Drives a fresh session to a terminal outcome. A policy answer outside the
// legal set raises PolicyIllegalAction.
PlaythroughResult run_playthrough(std::shared_ptr<const Scenario> scenario, const Policy& policy,
                                  std::uint64_t seed, const PlayOptions& opts = {});

struct SummaryStats {
  std::size_t n_runs = 0;
  std::size_t survived = 0;
  double survival_rate = 0.0;
  std::map<std::string, std::size_t> outcome_histogram;  // reason name -> runs
  double mean_profit = 0.0;
  Money min_profit = 0;
  Money max_profit = 0;
  double mean_share = 0.0;
  Money min_share = 0;
  Money max_share = 0;
  double mean_rounds_survived = 0.0;

  bool operator==(const SummaryStats&) const = default;
};

// Order-independent: only integer sums, minima and maxima are accumulated.
SummaryStats summarize(std::span<const PlaythroughResult> results);

// Seeds base_seed .. base_seed + n - 1, results in seed order.
std::vector<PlaythroughResult> run_batch_serial(std::shared_ptr<const Scenario> scenario, const Policy& policy,
                                                std::size_t n, std::uint64_t base_seed, const PlayOptions& opts = {});
std::vector<PlaythroughResult> run_batch_parallel(std::shared_ptr<const Scenario> scenario, const Policy& policy,
                                                  std::size_t n, std::uint64_t base_seed,
                                                  const PlayOptions& opts = {});

SummaryStats monte_carlo(std::shared_ptr<const Scenario> scenario, const Policy& policy, std::size_t n,
                         std::uint64_t base_seed, const PlayOptions& opts = {});

// Fixed column order, see kCsvColumns.
extern const std::vector<std::string> kCsvColumns;
std::string results_to_csv(std::span<const PlaythroughResult> results);
nlohmann::json summary_to_json(const SummaryStats& s, std::string_view policy, std::uint64_t base_seed);

}  // namespace dd2
