#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dd2/condition.h"
#include "json.hpp"

namespace dd2 {

inline constexpr std::string_view kScenarioFormat = "dd2/1";

// Hours and money are whole units throughout.
using Hours = std::int64_t;
using Money = std::int64_t;

struct ScenarioConfig {
  int rounds_limit = 7;
  int round_seconds = 1200;
  int staff_count = 10;
  int hours_per_staff = 8;
  Hours starting_hours = 80;
  Money starting_profit = 500000;
  Money starting_share_price = 100;
  int draw_count = 5;
  int open_event_cap = 10;

  bool operator==(const ScenarioConfig&) const = default;
};

// Returns the first violated invariant, or nullopt.
std::optional<std::string> config_violation(const ScenarioConfig& c);

// Applies a partial config object. Unknown keys and broken invariants throw
// InvalidOverride. If staffing changes without an explicit starting_hours,
// starting_hours is recomputed.
ScenarioConfig apply_config_overrides(ScenarioConfig base, const nlohmann::json& overrides);

nlohmann::json config_to_json(const ScenarioConfig& c);

struct ScenarioMeta {
  std::string format{kScenarioFormat};
  std::string name;
  std::string description;
  std::string version;
  bool operator==(const ScenarioMeta&) const = default;
};

struct Asset {
  std::string id;
  std::string name;
  std::string description;
  std::vector<std::string> tags;  // sorted, unique
  bool operator==(const Asset&) const = default;
};

struct Upgrade {
  std::string id;
  std::string name;
  std::string asset_id;
  Hours hours_cost = 0;
  Money profit_cost = 0;
  std::vector<std::string> surface_flags_set;  // sorted, unique
  std::map<std::string, double> resistance_deltas;
  Condition prerequisites;
  bool repeatable = false;
  bool operator==(const Upgrade&) const = default;
};

struct Resistance {
  std::string id;
  std::string name;
  double base_effectiveness = 0.0;
  double decay_per_round = 0.0;
  double floor = 0.0;
  double cap = 1.0;
  bool operator==(const Resistance&) const = default;
};

struct TriggerSpec {
  std::string event_id;
  int delay_rounds = 1;
  bool bypass_criteria = false;
  bool operator==(const TriggerSpec&) const = default;
};

struct Choice {
  std::string id;
  std::string label;
  Hours hours_cost = 0;
  Money profit_delta = 0;
  Money share_delta = 0;
  std::string feedback_text;
  std::vector<TriggerSpec> triggers;
  bool operator==(const Choice&) const = default;
};

struct OnDrawEffects {
  Hours hours_delta = 0;
  Money profit_delta = 0;
  Money share_delta = 0;
  std::vector<std::string> forced_upgrades;
  bool operator==(const OnDrawEffects&) const = default;
};

struct EventSpec {
  std::string id;
  std::string title;
  std::string description;
  std::string category;
  bool on_draw = false;
  Condition eligibility;
  std::vector<std::string> blocked_by;
  double draw_weight = 1.0;
  bool repeatable = false;
  std::vector<Choice> choices;
  std::optional<TriggerSpec> ignore_trigger;
  std::optional<OnDrawEffects> on_draw_effects;

  const Choice* find_choice(std::string_view choice_id) const;
  bool operator==(const EventSpec&) const = default;
};

// Reserved id of the implicit "ignore this round" option on every event.
inline constexpr std::string_view kIgnoreChoiceId = "ignore";

// Immutable content pack. Lookup tables are rebuilt by reindex(); equality
// is structural over the authored content only.
class Scenario {
 public:
  ScenarioMeta meta;
  ScenarioConfig config;
  std::vector<Asset> assets;
  std::vector<Upgrade> upgrades;
  std::vector<Resistance> resistances;
  std::vector<EventSpec> events;

  void reindex();

  const Asset* find_asset(std::string_view id) const;
  const Upgrade* find_upgrade(std::string_view id) const;
  const Resistance* find_resistance(std::string_view id) const;
  const EventSpec* find_event(std::string_view id) const;

  bool operator==(const Scenario& o) const {
    return meta == o.meta && config == o.config && assets == o.assets && upgrades == o.upgrades &&
           resistances == o.resistances && events == o.events;
  }

 private:
  std::unordered_map<std::string, std::size_t> asset_index_;
  std::unordered_map<std::string, std::size_t> upgrade_index_;
  std::unordered_map<std::string, std::size_t> resistance_index_;
  std::unordered_map<std::string, std::size_t> event_index_;
};

// Syntax and schema only (strict keys, types, defaults). Cross references
// are left for validate_scenario so every defect can be reported at once.
Scenario parse_scenario(std::string_view document);

// parse_scenario plus link check: the first unresolved id throws DanglingReference.
Scenario load_scenario(std::string_view document);
Scenario load_scenario_file(const std::filesystem::path& path);

nlohmann::json scenario_to_json(const Scenario& s);
std::string serialize_scenario(const Scenario& s);

// FNV-1a over the canonical serialization, hex encoded.
std::string scenario_hash(const Scenario& s);

struct Finding {
  enum class Severity { Error, Warning };
  Severity severity;
  std::string code;
  std::string subject;
  std::string message;
};

struct ValidationReport {
  std::vector<Finding> findings;

  std::size_t error_count() const;
  std::size_t warning_count() const;
  bool ok() const { return error_count() == 0; }
  std::size_t count(std::string_view code) const;
};

nlohmann::json report_to_json(const ValidationReport& r);

ValidationReport validate_scenario(const Scenario& s);

// Exact satisfiability by enumeration of world states over the atoms the
// condition references (rounds 1..rounds_limit). Choices imply their event
// occurred; non-repeatable events carry at most one choice.
bool condition_satisfiable(const Condition& c, const Scenario& s);

// Whole event -> event trigger relation (choice triggers and ignore triggers).
struct TriggerLink {
  std::string from_event;
  std::string from_choice;  // empty for ignore triggers
  TriggerSpec trigger;
};
std::vector<TriggerLink> trigger_links(const Scenario& s);

// Strongly connected components of the trigger relation that contain a
// cycle, each sorted, listed in ascending order of first member.
std::vector<std::vector<std::string>> trigger_cycles(const Scenario& s);

// Events that can ever be presented: eligibility satisfiable, or targeted by
// a bypass trigger whose source event is itself reachable.
std::vector<std::string> reachable_events(const Scenario& s);

}  // namespace dd2
