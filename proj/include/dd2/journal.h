#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dd2/engine.h"
#include "json.hpp"

namespace dd2 {

// A single team (or timer) decision fed to the engine.
struct Action {
  enum class Kind { BeginRound, Purchase, Choose, Ignore, EndRound };

  Kind kind = Kind::BeginRound;
  std::string target;  // upgrade id or event id
  std::string choice;  // Choose only
  EndReason reason = EndReason::Manual;

  static Action begin_round() { return {}; }
  static Action purchase(std::string upgrade_id) { return {Kind::Purchase, std::move(upgrade_id), {}, {}}; }
  static Action choose(std::string event_id, std::string choice_id) {
    return {Kind::Choose, std::move(event_id), std::move(choice_id), {}};
  }
  static Action ignore(std::string event_id) { return {Kind::Ignore, std::move(event_id), {}, {}}; }
  static Action end_round(EndReason r = EndReason::Manual) { return {Kind::EndRound, {}, {}, r}; }

  bool operator==(const Action&) const = default;
};

std::string_view action_kind_name(Action::Kind k);
nlohmann::json action_to_json(const Action& a);
Action action_from_json(const nlohmann::json& j);  // BadRequest on malformed input
std::string describe(const Action& a);

struct ActionOutcome {
  std::optional<Feedback> feedback;
  std::optional<DrawReport> draw;
};

// Dispatches to the engine operation for `a`.
ActionOutcome apply_action(GameState& st, const Action& a);

// Every action the engine would currently accept, in a fixed order:
// begin_round | choices (open order, authored choice order) | ignores |
// purchases (authored order) | end_round.
std::vector<Action> legal_actions(const GameState& st);

nlohmann::json feedback_to_json(const Feedback& f);
nlohmann::json draw_report_to_json(const DrawReport& r);

enum class Actor { Team, Engine };

// One line of the append-only decision log. `checksum` is the state checksum
// after the record; wall_time is informational and not part of any checksum.
struct LogRecord {
  std::int64_t revision = 0;
  std::string wall_time;
  int round_index = 0;
  Actor actor = Actor::Team;
  std::string kind;
  nlohmann::json payload;
  std::string checksum;
};

nlohmann::json record_to_json(const LogRecord& r);
LogRecord record_from_json(const nlohmann::json& j);
std::string records_to_jsonl(std::span<const LogRecord> records);
std::vector<LogRecord> records_from_jsonl(std::string_view text);

// Engine state plus the log that produced it. Record kinds:
//   session_created (engine) | begin_round, purchase, choice, ignore,
//   end_round (team or engine) | draw (engine, after begin_round) |
//   outcome (engine, when the session turns terminal).
class Journal {
 public:
  Journal(std::shared_ptr<const Scenario> scenario, std::uint64_t seed, nlohmann::json overrides,
          std::string wall_time);

  // Rebuilds from a log via replay().
  static Journal restore(std::shared_ptr<const Scenario> scenario, std::vector<LogRecord> records);

  // Applies the action and appends its records. Rejected actions throw and
  // leave both state and log untouched. `extra` is merged into the action
  // record's payload (e.g. a round deadline) and ignored by replay.
  ActionOutcome apply(const Action& a, Actor actor, const std::string& wall_time,
                      const nlohmann::json& extra = nullptr);

  const GameState& state() const { return state_; }
  const std::vector<LogRecord>& records() const { return records_; }
  std::int64_t revision() const { return static_cast<std::int64_t>(records_.size()); }

 private:
  Journal() = default;
  void append(const std::string& wall_time, Actor actor, std::string kind, nlohmann::json payload);

  GameState state_;
  std::vector<LogRecord> records_;
};

// Re-executes a decision log. Revisions must run 1..n, the first record must
// be session_created for this engine version and scenario, and every
// record's checksum must match the recomputed state (LogCorrupt otherwise).
GameState replay(std::shared_ptr<const Scenario> scenario, std::span<const LogRecord> records);

}  // namespace dd2
