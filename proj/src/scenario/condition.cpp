#include "dd2/condition.h"

#include <algorithm>

#include "dd2/error.h"
#include "dd2/scenario.h"

namespace dd2 {

Condition Condition::all(std::vector<Condition> xs) {
  Condition c;
  c.kind = Kind::All;
  c.children = std::move(xs);
  return c;
}

Condition Condition::any(std::vector<Condition> xs) {
  Condition c;
  c.kind = Kind::Any;
  c.children = std::move(xs);
  return c;
}

Condition Condition::negate(Condition x) {
  Condition c;
  c.kind = Kind::Not;
  c.children.push_back(std::move(x));
  return c;
}

Condition Condition::upgrade(std::string upgrade_id) {
  Condition c;
  c.kind = Kind::UpgradePurchased;
  c.id = std::move(upgrade_id);
  return c;
}

Condition Condition::event(std::string event_id) {
  Condition c;
  c.kind = Kind::EventOccurred;
  c.id = std::move(event_id);
  return c;
}

Condition Condition::choice(std::string event_id, std::string choice_id) {
  Condition c;
  c.kind = Kind::ChoiceMade;
  c.id = std::move(event_id);
  c.choice_id = std::move(choice_id);
  return c;
}

Condition Condition::round_at_least(int n) {
  Condition c;
  c.kind = Kind::RoundAtLeast;
  c.round = n;
  return c;
}

namespace {

void check_ids(const Condition& e, const Scenario& scope) {
  using K = Condition::Kind;
  switch (e.kind) {
    case K::UpgradePurchased:
      if (!scope.find_upgrade(e.id))
        throw Error(ErrorCode::UnknownIdentifier, "unknown upgrade '" + e.id + "'", {{"id", e.id}});
      break;
    case K::EventOccurred:
      if (!scope.find_event(e.id))
        throw Error(ErrorCode::UnknownIdentifier, "unknown event '" + e.id + "'", {{"id", e.id}});
      break;
    case K::ChoiceMade: {
      const auto* ev = scope.find_event(e.id);
      if (!ev) throw Error(ErrorCode::UnknownIdentifier, "unknown event '" + e.id + "'", {{"id", e.id}});
      if (!ev->find_choice(e.choice_id))
        throw Error(ErrorCode::UnknownIdentifier, "unknown choice '" + e.id + "/" + e.choice_id + "'",
                    {{"id", e.id + "/" + e.choice_id}});
      break;
    }
    default:
      for (const auto& ch : e.children) check_ids(ch, scope);
  }
}

}  // namespace

bool evaluate_condition(const Condition& e, const WorldView& w) {
  using K = Condition::Kind;
  switch (e.kind) {
    case K::AlwaysTrue: return true;
    case K::All:
      return std::all_of(e.children.begin(), e.children.end(),
                         [&](const Condition& c) { return evaluate_condition(c, w); });
    case K::Any:
      return std::any_of(e.children.begin(), e.children.end(),
                         [&](const Condition& c) { return evaluate_condition(c, w); });
    case K::Not: return !evaluate_condition(e.children.front(), w);
    case K::UpgradePurchased: return w.purchased_upgrades.contains(e.id);
    case K::EventOccurred: return w.occurred_events.contains(e.id);
    case K::ChoiceMade: return w.made_choices.contains({e.id, e.choice_id});
    case K::RoundAtLeast: return w.round_index >= e.round;
  }
  return false;
}

bool evaluate_condition(const Condition& e, const WorldView& w, const Scenario& scope) {
  check_ids(e, scope);
  return evaluate_condition(e, w);
}

Condition condition_from_json(const nlohmann::json& j, const std::string& path) {
  auto schema = [&](const std::string& what) {
    return Error(ErrorCode::SchemaError, path + ": " + what, {{"path", path}});
  };
  if (!j.is_object() || j.size() != 1) throw schema("condition must be a single-key object");
  const std::string key = j.begin().key();
  const nlohmann::json& val = j.begin().value();

  auto list = [&](const std::string& k) {
    if (!val.is_array()) throw schema("'" + k + "' expects an array");
    std::vector<Condition> xs;
    for (std::size_t i = 0; i < val.size(); ++i)
      xs.push_back(condition_from_json(val[i], path + "." + k + "[" + std::to_string(i) + "]"));
    return xs;
  };
  auto str = [&](const std::string& k) {
    if (!val.is_string() || val.get<std::string>().empty()) throw schema("'" + k + "' expects an id string");
    return val.get<std::string>();
  };

  if (key == "true") {
    if (!val.is_object() || !val.empty()) throw schema("'true' expects {}");
    return Condition::always();
  }
  if (key == "all") return Condition::all(list(key));
  if (key == "any") return Condition::any(list(key));
  if (key == "not") return Condition::negate(condition_from_json(val, path + ".not"));
  if (key == "upgrade") return Condition::upgrade(str(key));
  if (key == "event") return Condition::event(str(key));
  if (key == "choice_made") {
    if (!val.is_array() || val.size() != 2 || !val[0].is_string() || !val[1].is_string())
      throw schema("'choice_made' expects [event_id, choice_id]");
    return Condition::choice(val[0].get<std::string>(), val[1].get<std::string>());
  }
  if (key == "round_at_least") {
    if (!val.is_number_integer() || val.get<int>() < 0) throw schema("'round_at_least' expects a count");
    return Condition::round_at_least(val.get<int>());
  }
  throw schema("unknown condition operator '" + key + "'");
}

nlohmann::json condition_to_json(const Condition& c) {
  using K = Condition::Kind;
  auto list = [&] {
    auto arr = nlohmann::json::array();
    for (const auto& ch : c.children) arr.push_back(condition_to_json(ch));
    return arr;
  };
  switch (c.kind) {
    case K::AlwaysTrue: return {{"true", nlohmann::json::object()}};
    case K::All: return {{"all", list()}};
    case K::Any: return {{"any", list()}};
    case K::Not: return {{"not", condition_to_json(c.children.front())}};
    case K::UpgradePurchased: return {{"upgrade", c.id}};
    case K::EventOccurred: return {{"event", c.id}};
    case K::ChoiceMade: return {{"choice_made", {c.id, c.choice_id}}};
    case K::RoundAtLeast: return {{"round_at_least", c.round}};
  }
  return nullptr;
}

namespace {

void walk_refs(const Condition& c, ConditionRefs& out) {
  using K = Condition::Kind;
  switch (c.kind) {
    case K::UpgradePurchased: out.upgrades.insert(c.id); break;
    case K::EventOccurred: out.events.insert(c.id); break;
    case K::ChoiceMade: out.choices.insert({c.id, c.choice_id}); break;
    case K::RoundAtLeast: out.rounds.insert(c.round); break;
    default:
      for (const auto& ch : c.children) walk_refs(ch, out);
  }
}

void walk_signed(const Condition& c, bool negated, std::set<SignedRef>& out) {
  using K = Condition::Kind;
  switch (c.kind) {
    case K::UpgradePurchased: out.insert({SignedRef::Kind::Upgrade, c.id, "", negated}); break;
    case K::EventOccurred: out.insert({SignedRef::Kind::Event, c.id, "", negated}); break;
    case K::ChoiceMade: out.insert({SignedRef::Kind::Choice, c.id, c.choice_id, negated}); break;
    case K::Not: walk_signed(c.children.front(), !negated, out); break;
    default:
      for (const auto& ch : c.children) walk_signed(ch, negated, out);
  }
}

}  // namespace

ConditionRefs collect_refs(const Condition& c) {
  ConditionRefs refs;
  walk_refs(c, refs);
  return refs;
}

std::set<SignedRef> collect_signed_refs(const Condition& c) {
  std::set<SignedRef> out;
  walk_signed(c, false, out);
  return out;
}

bool uses_negation(const Condition& c) {
  if (c.kind == Condition::Kind::Not) return true;
  return std::any_of(c.children.begin(), c.children.end(), uses_negation);
}

}  // namespace dd2
