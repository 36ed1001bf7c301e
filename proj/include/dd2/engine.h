#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dd2/condition.h"
#include "dd2/rng.h"
#include "dd2/scenario.h"
#include "json.hpp"

namespace dd2 {

inline constexpr std::string_view kEngineVersion = "dd2-engine/1";

enum class OutcomeStatus { Ongoing, Failed, Survived };
enum class OutcomeReason { None, ProfitDepleted, SharePriceDepleted, EventSaturation, RoundLimitSurvived };

struct Outcome {
  OutcomeStatus status = OutcomeStatus::Ongoing;
  OutcomeReason reason = OutcomeReason::None;

  static Outcome ongoing() { return {}; }
  static Outcome failed(OutcomeReason r) { return {OutcomeStatus::Failed, r}; }
  static Outcome survived() { return {OutcomeStatus::Survived, OutcomeReason::RoundLimitSurvived}; }

  bool terminal() const { return status != OutcomeStatus::Ongoing; }
  bool operator==(const Outcome&) const = default;
};

std::string_view outcome_status_name(OutcomeStatus s);
std::string_view outcome_reason_name(OutcomeReason r);

enum class EventSource { Drawn, Triggered, TriggeredBypass };
std::string_view event_source_name(EventSource s);

struct OpenEvent {
  std::string event_id;
  int drawn_round = 0;
  int ignored_count = 0;
  int last_ignored_round = 0;  // 0 = never ignored
  EventSource source = EventSource::Drawn;
  std::string origin;  // "evt/choice" or "evt/ignore" for triggered arrivals
};

struct PendingTrigger {
  TriggerSpec trigger;
  int due_round = 0;
  std::string origin;
  bool operator==(const PendingTrigger&) const = default;
};

// An upgrade enters the attack surface at the start of the round after the
// one it was acquired in (purchase or on-draw forcing).
struct Acquisition {
  std::string upgrade_id;
  int round = 0;
  bool forced = false;
};

struct Occurrence {
  std::string event_id;
  int round = 0;
  EventSource source = EventSource::Drawn;
};

struct GameState {
  std::shared_ptr<const Scenario> scenario;
  std::string scenario_hash;
  ScenarioConfig config;
  std::uint64_t seed = 0;

  int round_index = 0;
  bool round_active = false;
  Hours hours_remaining = 0;
  Money projected_profit = 0;
  Money share_price = 0;

  std::vector<OpenEvent> open_events;
  std::vector<PendingTrigger> pending_triggers;
  std::vector<std::string> purchased_upgrades;  // first-acquisition order, unique
  std::vector<Acquisition> acquisitions;
  std::set<std::string> occurred_events;
  std::vector<Occurrence> occurrences;
  std::set<std::pair<std::string, std::string>> made_choices;
  std::set<std::string> surface_flags;
  std::map<std::string, double> resistance_levels;
  std::uint64_t rng_cursor = 0;
  Outcome outcome;

  const OpenEvent* find_open(std::string_view event_id) const;
  bool is_purchased(std::string_view upgrade_id) const;
};

// Field-for-field via the canonical snapshot.
bool operator==(const GameState& a, const GameState& b);

struct OnDrawApplied {
  std::string event_id;
  Hours hours_delta = 0;
  Money profit_delta = 0;
  Money share_delta = 0;
  std::vector<std::string> forced_upgrades;
};

struct DrawReport {
  int round_index = 0;
  std::vector<std::string> newly_drawn;
  std::vector<std::string> triggered_in;
  std::vector<std::pair<std::string, std::string>> blocked_by_resistance;  // (event, resistance)
  std::vector<OnDrawApplied> on_draw_applied;
  std::vector<std::string> auto_closed;  // on-draw events without choices
  std::size_t eligible_pool_size = 0;
  std::uint64_t rng_draws = 0;
};

struct Feedback {
  std::string text;
  Hours hours_delta = 0;
  Money profit_delta = 0;
  Money share_delta = 0;
  std::vector<PendingTrigger> scheduled_triggers;
};

enum class EndReason { Manual, TimerExpired };
std::string_view end_reason_name(EndReason r);

struct AttackSurface {
  std::set<std::string> flags;
  std::map<std::string, double> resistance_levels;
};

// Fresh session: round 0, no hours until the first round begins.
// Scenario must validate cleanly; `overrides` is a partial config object.
GameState new_session(std::shared_ptr<const Scenario> scenario, std::uint64_t seed,
                      const nlohmann::json& overrides = nullptr);

// Round-start pipeline: surface update, trigger arrival, eligibility and
// resistance filtering, weighted draw, on-draw effects, failure checks.
DrawReport begin_round(GameState& st);

Feedback purchase_upgrade(GameState& st, std::string_view upgrade_id);
Feedback resolve_choice(GameState& st, std::string_view event_id, std::string_view choice_id);
void ignore_event(GameState& st, std::string_view event_id);
void end_round(GameState& st, EndReason reason);

// Blocked with probability `level`; consumes exactly one draw.
bool resistance_roll(double level, Rng& rng);

// Recomputed from acquisition history and the decay schedule, independent of
// the incrementally maintained levels in GameState.
AttackSurface compute_attack_surface(const GameState& st);

Outcome check_outcome(const GameState& st);

WorldView world_view(const GameState& st);

// Canonical JSON with sorted keys; the checksum is FNV-1a over its dump.
nlohmann::json state_to_json(const GameState& st);
std::string state_checksum(const GameState& st);

}  // namespace dd2
