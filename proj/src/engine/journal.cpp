#include "dd2/journal.h"

#include <sstream>

#include "dd2/error.h"

namespace dd2 {

using nlohmann::json;

std::string_view action_kind_name(Action::Kind k) {
  switch (k) {
    case Action::Kind::BeginRound: return "begin_round";
    case Action::Kind::Purchase: return "purchase";
    case Action::Kind::Choose: return "choice";
    case Action::Kind::Ignore: return "ignore";
    case Action::Kind::EndRound: return "end_round";
  }
  return "?";
}

json action_to_json(const Action& a) {
  json j = {{"kind", std::string(action_kind_name(a.kind))}};
  switch (a.kind) {
    case Action::Kind::BeginRound: break;
    case Action::Kind::Purchase: j["upgrade"] = a.target; break;
    case Action::Kind::Choose:
      j["event"] = a.target;
      j["choice"] = a.choice;
      break;
    case Action::Kind::Ignore: j["event"] = a.target; break;
    case Action::Kind::EndRound: j["reason"] = std::string(end_reason_name(a.reason)); break;
  }
  return j;
}

Action action_from_json(const json& j) {
  auto bad = [](const std::string& what) { return Error(ErrorCode::BadRequest, "malformed action: " + what); };
  if (!j.is_object()) throw bad("expected an object");
  auto str = [&](const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string() || it->get<std::string>().empty()) throw bad(std::string("missing '") + key + "'");
    return it->get<std::string>();
  };
  const std::string kind = str("kind");
  if (kind == "begin_round") return Action::begin_round();
  if (kind == "purchase") return Action::purchase(str("upgrade"));
  if (kind == "choice") return Action::choose(str("event"), str("choice"));
  if (kind == "ignore") return Action::ignore(str("event"));
  if (kind == "end_round") {
    std::string reason = j.contains("reason") ? str("reason") : "manual";
    if (reason == "manual") return Action::end_round(EndReason::Manual);
    if (reason == "timer_expired") return Action::end_round(EndReason::TimerExpired);
    throw bad("unknown end_round reason '" + reason + "'");
  }
  throw bad("unknown kind '" + kind + "'");
}

std::string describe(const Action& a) {
  switch (a.kind) {
    case Action::Kind::BeginRound: return "begin_round";
    case Action::Kind::Purchase: return "purchase " + a.target;
    case Action::Kind::Choose: return "choose " + a.target + "/" + a.choice;
    case Action::Kind::Ignore: return "ignore " + a.target;
    case Action::Kind::EndRound: return "end_round";
  }
  return "?";
}

ActionOutcome apply_action(GameState& st, const Action& a) {
  ActionOutcome out;
  switch (a.kind) {
    case Action::Kind::BeginRound: out.draw = begin_round(st); break;
    case Action::Kind::Purchase: out.feedback = purchase_upgrade(st, a.target); break;
    case Action::Kind::Choose: out.feedback = resolve_choice(st, a.target, a.choice); break;
    case Action::Kind::Ignore: ignore_event(st, a.target); break;
    case Action::Kind::EndRound: end_round(st, a.reason); break;
  }
  return out;
}

std::vector<Action> legal_actions(const GameState& st) {
  std::vector<Action> out;
  if (st.outcome.terminal()) return out;
  if (!st.round_active) {
    out.push_back(Action::begin_round());
    return out;
  }
  const Scenario& s = *st.scenario;
  for (const auto& o : st.open_events) {
    const auto* e = s.find_event(o.event_id);
    for (const auto& c : e->choices)
      if (c.hours_cost <= st.hours_remaining) out.push_back(Action::choose(e->id, c.id));
  }
  for (const auto& o : st.open_events)
    if (o.last_ignored_round != st.round_index) out.push_back(Action::ignore(o.event_id));
  const WorldView w = world_view(st);
  for (const auto& u : s.upgrades) {
    if (st.is_purchased(u.id) && !u.repeatable) continue;
    if (u.hours_cost > st.hours_remaining || st.projected_profit <= u.profit_cost) continue;
    if (!evaluate_condition(u.prerequisites, w)) continue;
    out.push_back(Action::purchase(u.id));
  }
  out.push_back(Action::end_round());
  return out;
}

json feedback_to_json(const Feedback& f) {
  json triggers = json::array();
  for (const auto& t : f.scheduled_triggers)
    triggers.push_back({{"event_id", t.trigger.event_id},
                        {"due_round", t.due_round},
                        {"bypass_criteria", t.trigger.bypass_criteria}});
  return {{"text", f.text},
          {"hours_delta", f.hours_delta},
          {"profit_delta", f.profit_delta},
          {"share_delta", f.share_delta},
          {"scheduled_triggers", triggers}};
}

json draw_report_to_json(const DrawReport& r) {
  json blocked = json::array();
  for (const auto& [e, res] : r.blocked_by_resistance) blocked.push_back({{"event_id", e}, {"resistance_id", res}});
  json applied = json::array();
  for (const auto& a : r.on_draw_applied)
    applied.push_back({{"event_id", a.event_id},
                       {"hours_delta", a.hours_delta},
                       {"profit_delta", a.profit_delta},
                       {"share_delta", a.share_delta},
                       {"forced_upgrades", a.forced_upgrades}});
  return {{"round_index", r.round_index},
          {"newly_drawn", r.newly_drawn},
          {"triggered_in", r.triggered_in},
          {"blocked_by_resistance", blocked},
          {"on_draw_applied", applied},
          {"auto_closed", r.auto_closed},
          {"eligible_pool_size", r.eligible_pool_size},
          {"rng_draws", r.rng_draws}};
}

json record_to_json(const LogRecord& r) {
  return {{"revision", r.revision},
          {"wall_time", r.wall_time},
          {"round_index", r.round_index},
          {"actor", r.actor == Actor::Team ? "team" : "engine"},
          {"kind", r.kind},
          {"payload", r.payload},
          {"checksum", r.checksum}};
}

LogRecord record_from_json(const json& j) {
  try {
    LogRecord r;
    r.revision = j.at("revision").get<std::int64_t>();
    r.wall_time = j.at("wall_time").get<std::string>();
    r.round_index = j.at("round_index").get<int>();
    const auto actor = j.at("actor").get<std::string>();
    if (actor != "team" && actor != "engine") throw std::runtime_error("bad actor");
    r.actor = actor == "team" ? Actor::Team : Actor::Engine;
    r.kind = j.at("kind").get<std::string>();
    r.payload = j.at("payload");
    r.checksum = j.at("checksum").get<std::string>();
    return r;
  } catch (const std::exception& e) {
    const auto rev = j.is_object() && j.contains("revision") && j["revision"].is_number_integer()
                         ? j["revision"].get<std::int64_t>()
                         : 0;
    throw Error(ErrorCode::LogCorrupt, std::string("malformed log record: ") + e.what(), {{"revision", rev}});
  }
}

std::string records_to_jsonl(std::span<const LogRecord> records) {
  std::string out;
  for (const auto& r : records) {
    out += record_to_json(r).dump();
    out += '\n';
  }
  return out;
}

std::vector<LogRecord> records_from_jsonl(std::string_view text) {
  std::vector<LogRecord> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error&) {
      throw Error(ErrorCode::LogCorrupt, "unparseable log line " + std::to_string(out.size() + 1),
                  {{"revision", static_cast<std::int64_t>(out.size() + 1)}});
    }
    out.push_back(record_from_json(j));
  }
  return out;
}

Journal::Journal(std::shared_ptr<const Scenario> scenario, std::uint64_t seed, json overrides,
                 std::string wall_time) {
  const std::string hash = scenario_hash(*scenario);
  state_ = new_session(std::move(scenario), seed, overrides);
  append(wall_time, Actor::Engine, "session_created",
         {{"engine_version", std::string(kEngineVersion)},
          {"scenario_hash", hash},
          {"seed", seed},
          {"overrides", overrides.is_null() ? json::object() : overrides}});
}

void Journal::append(const std::string& wall_time, Actor actor, std::string kind, json payload) {
  LogRecord r;
  r.revision = revision() + 1;
  r.wall_time = wall_time;
  r.round_index = state_.round_index;
  r.actor = actor;
  r.kind = std::move(kind);
  r.payload = std::move(payload);
  r.checksum = state_checksum(state_);
  records_.push_back(std::move(r));
}

ActionOutcome Journal::apply(const Action& a, Actor actor, const std::string& wall_time, const json& extra) {
  GameState next = state_;
  ActionOutcome out = apply_action(next, a);
  const bool was_terminal = state_.outcome.terminal();
  state_ = std::move(next);

  json payload = action_to_json(a);
  if (out.feedback) payload["feedback"] = feedback_to_json(*out.feedback);
  if (extra.is_object())
    for (const auto& [k, v] : extra.items()) payload[k] = v;
  append(wall_time, actor, std::string(action_kind_name(a.kind)), std::move(payload));
  if (out.draw) append(wall_time, Actor::Engine, "draw", draw_report_to_json(*out.draw));
  if (!was_terminal && state_.outcome.terminal())
    append(wall_time, Actor::Engine, "outcome",
           {{"status", std::string(outcome_status_name(state_.outcome.status))},
            {"reason", std::string(outcome_reason_name(state_.outcome.reason))}});
  return out;
}

Journal Journal::restore(std::shared_ptr<const Scenario> scenario, std::vector<LogRecord> records) {
  Journal j;
  j.state_ = replay(std::move(scenario), records);
  j.records_ = std::move(records);
  return j;
}

namespace {

Error corrupt(std::int64_t revision, const std::string& why) {
  return Error(ErrorCode::LogCorrupt, "log corrupt at revision " + std::to_string(revision) + ": " + why,
               {{"revision", revision}});
}

}  // namespace

GameState replay(std::shared_ptr<const Scenario> scenario, std::span<const LogRecord> records) {
  if (records.empty()) throw corrupt(0, "empty log");
  const LogRecord& first = records.front();
  if (first.revision != 1 || first.kind != "session_created") throw corrupt(first.revision, "missing session_created");
  const json& p = first.payload;
  if (!p.is_object() || p.value("engine_version", "") != kEngineVersion)
    throw Error(ErrorCode::VersionMismatch, "log was written by a different engine version",
                {{"expected", std::string(kEngineVersion)}, {"found", p.is_object() ? p.value("engine_version", "") : ""}});
  if (p.value("scenario_hash", "") != scenario_hash(*scenario))
    throw Error(ErrorCode::VersionMismatch, "log was written against a different scenario");

  GameState st;
  try {
    st = new_session(std::move(scenario), p.at("seed").get<std::uint64_t>(), p.value("overrides", json::object()));
  } catch (const Error& e) {
    throw corrupt(1, e.what());
  } catch (const json::exception& e) {
    throw corrupt(1, e.what());
  }
  if (state_checksum(st) != first.checksum) throw corrupt(1, "checksum mismatch");

  std::optional<DrawReport> last_draw;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const LogRecord& r = records[i];
    const auto expected_rev = static_cast<std::int64_t>(i + 1);
    if (r.revision != expected_rev) throw corrupt(expected_rev, "revision out of sequence");

    if (r.kind == "draw") {
      if (!last_draw || draw_report_to_json(*last_draw) != r.payload) throw corrupt(r.revision, "draw report differs");
      last_draw.reset();
    } else if (r.kind == "outcome") {
      if (!st.outcome.terminal() || r.payload.value("status", "") != outcome_status_name(st.outcome.status) ||
          r.payload.value("reason", "") != outcome_reason_name(st.outcome.reason))
        throw corrupt(r.revision, "outcome differs");
    } else {
      Action a;
      try {
        a = action_from_json(r.payload);
      } catch (const Error& e) {
        throw corrupt(r.revision, e.what());
      }
      if (action_kind_name(a.kind) != r.kind) throw corrupt(r.revision, "record kind disagrees with payload");
      try {
        last_draw = apply_action(st, a).draw;
      } catch (const Error& e) {
        throw corrupt(r.revision, std::string("action rejected on replay: ") + e.what());
      }
    }
    if (r.round_index != st.round_index || state_checksum(st) != r.checksum)
      throw corrupt(r.revision, "checksum mismatch");
  }
  return st;
}

}  // namespace dd2
