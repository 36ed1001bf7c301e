#include <algorithm>
#include <exception>
#include <limits>
#include <sstream>

#include <omp.h>

#include "dd2/sim.h"

namespace dd2 {

using nlohmann::json;

const std::vector<std::string> kCsvColumns = {"seed",         "outcome",     "reason",         "rounds_completed",
                                              "final_round",  "final_profit", "final_share",   "open_per_round",
                                              "action_count"};

SummaryStats summarize(std::span<const PlaythroughResult> results) {
  SummaryStats s;
  s.n_runs = results.size();
  if (results.empty()) return s;
  Money profit_sum = 0, share_sum = 0;
  std::int64_t rounds_sum = 0;
  s.min_profit = s.min_share = std::numeric_limits<Money>::max();
  s.max_profit = s.max_share = std::numeric_limits<Money>::min();
  for (const auto& r : results) {
    if (r.outcome.status == OutcomeStatus::Survived) ++s.survived;
    ++s.outcome_histogram[std::string(r.outcome.status == OutcomeStatus::Survived
                                          ? outcome_status_name(r.outcome.status)
                                          : outcome_reason_name(r.outcome.reason))];
    profit_sum += r.final_profit;
    share_sum += r.final_share;
    rounds_sum += r.rounds_completed;
    s.min_profit = std::min(s.min_profit, r.final_profit);
    s.max_profit = std::max(s.max_profit, r.final_profit);
    s.min_share = std::min(s.min_share, r.final_share);
    s.max_share = std::max(s.max_share, r.final_share);
  }
  const double n = static_cast<double>(s.n_runs);
  s.survival_rate = static_cast<double>(s.survived) / n;
  s.mean_profit = static_cast<double>(profit_sum) / n;
  s.mean_share = static_cast<double>(share_sum) / n;
  s.mean_rounds_survived = static_cast<double>(rounds_sum) / n;
  return s;
}

std::vector<PlaythroughResult> run_batch_serial(std::shared_ptr<const Scenario> scenario, const Policy& policy,
                                                std::size_t n, std::uint64_t base_seed, const PlayOptions& opts) {
  std::vector<PlaythroughResult> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(run_playthrough(scenario, policy, base_seed + i, opts));
  return out;
}

// Each iteration owns its session; results land in seed order, so the output
// is identical to the serial runner whatever the schedule.
std::vector<PlaythroughResult> run_batch_parallel(std::shared_ptr<const Scenario> scenario, const Policy& policy,
                                                  std::size_t n, std::uint64_t base_seed,
                                                  const PlayOptions& opts) {
  std::vector<PlaythroughResult> out(n);
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      out[i] = run_playthrough(scenario, policy, base_seed + static_cast<std::uint64_t>(i), opts);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

SummaryStats monte_carlo(std::shared_ptr<const Scenario> scenario, const Policy& policy, std::size_t n,
                         std::uint64_t base_seed, const PlayOptions& opts) {
  const auto results = run_batch_parallel(std::move(scenario), policy, n, base_seed, opts);
  return summarize(results);
}

std::string results_to_csv(std::span<const PlaythroughResult> results) {
  std::ostringstream os;
  for (std::size_t i = 0; i < kCsvColumns.size(); ++i) os << (i ? "," : "") << kCsvColumns[i];
  os << '\n';
  for (const auto& r : results) {
    os << r.seed << ',' << outcome_status_name(r.outcome.status) << ',' << outcome_reason_name(r.outcome.reason)
       << ',' << r.rounds_completed << ',' << r.final_round << ',' << r.final_profit << ',' << r.final_share << ',';
    for (std::size_t i = 0; i < r.open_per_round.size(); ++i) os << (i ? ";" : "") << r.open_per_round[i];
    os << ',' << r.trace.size() << '\n';
  }
  return os.str();
}

json summary_to_json(const SummaryStats& s, std::string_view policy, std::uint64_t base_seed) {
  return {{"policy", std::string(policy)},
          {"base_seed", base_seed},
          {"n_runs", s.n_runs},
          {"survived", s.survived},
          {"survival_rate", s.survival_rate},
          {"outcome_histogram", s.outcome_histogram},
          {"profit", {{"mean", s.mean_profit}, {"min", s.min_profit}, {"max", s.max_profit}}},
          {"share", {{"mean", s.mean_share}, {"min", s.min_share}, {"max", s.max_share}}},
          {"mean_rounds_survived", s.mean_rounds_survived},
          {"csv_columns", kCsvColumns}};
}

}  // namespace dd2
