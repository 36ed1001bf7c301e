#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace dd2 {

class Scenario;

// Boolean predicate over what a team has done so far. Closed language:
// all / any / not combinators over four atoms plus a constant.
struct Condition {
  enum class Kind { AlwaysTrue, All, Any, Not, UpgradePurchased, EventOccurred, ChoiceMade, RoundAtLeast };

  Kind kind = Kind::AlwaysTrue;
  std::vector<Condition> children;  // All, Any, Not (exactly one)
  std::string id;                   // upgrade id or event id
  std::string choice_id;            // ChoiceMade only
  int round = 0;                    // RoundAtLeast only

  static Condition always() { return {}; }
  static Condition all(std::vector<Condition> xs);
  static Condition any(std::vector<Condition> xs);
  static Condition negate(Condition x);
  static Condition upgrade(std::string upgrade_id);
  static Condition event(std::string event_id);
  static Condition choice(std::string event_id, std::string choice_id);
  static Condition round_at_least(int n);

  bool operator==(const Condition&) const = default;
};

struct WorldView {
  int round_index = 0;
  std::set<std::string> purchased_upgrades;
  std::set<std::string> occurred_events;
  std::set<std::pair<std::string, std::string>> made_choices;
};

// Pure evaluation; ids are not checked.
bool evaluate_condition(const Condition& e, const WorldView& w);

// Same, but every referenced id must resolve in `scope` (UnknownIdentifier otherwise).
bool evaluate_condition(const Condition& e, const WorldView& w, const Scenario& scope);

// Encoded as single-key objects: {"all":[..]}, {"any":[..]}, {"not":x},
// {"upgrade":"id"}, {"event":"id"}, {"choice_made":["evt","ch"]},
// {"round_at_least":n}, {"true":{}}.
Condition condition_from_json(const nlohmann::json& j, const std::string& path);
nlohmann::json condition_to_json(const Condition& c);

// Atoms referenced anywhere in the tree.
struct ConditionRefs {
  std::set<std::string> upgrades;
  std::set<std::string> events;
  std::set<std::pair<std::string, std::string>> choices;
  std::set<int> rounds;
};
ConditionRefs collect_refs(const Condition& c);

// Polarity-aware references: an atom reached under an odd number of `not`s
// is negative. Used for guard edges in the event graph.
struct SignedRef {
  enum class Kind { Upgrade, Event, Choice };
  Kind kind;
  std::string id;
  std::string choice_id;
  bool negated;
  auto operator<=>(const SignedRef&) const = default;
};
std::set<SignedRef> collect_signed_refs(const Condition& c);

bool uses_negation(const Condition& c);

}  // namespace dd2
