#include "dd2/engine.h"

#include <algorithm>
#include <numeric>

#include "dd2/error.h"
#include "dd2/hash.h"

namespace dd2 {

using nlohmann::json;

std::string_view outcome_status_name(OutcomeStatus s) {
  switch (s) {
    case OutcomeStatus::Ongoing: return "Ongoing";
    case OutcomeStatus::Failed: return "Failed";
    case OutcomeStatus::Survived: return "Survived";
  }
  return "?";
}

std::string_view outcome_reason_name(OutcomeReason r) {
  switch (r) {
    case OutcomeReason::None: return "None";
    case OutcomeReason::ProfitDepleted: return "ProfitDepleted";
    case OutcomeReason::SharePriceDepleted: return "SharePriceDepleted";
    case OutcomeReason::EventSaturation: return "EventSaturation";
    case OutcomeReason::RoundLimitSurvived: return "RoundLimitSurvived";
  }
  return "?";
}

std::string_view event_source_name(EventSource s) {
  switch (s) {
    case EventSource::Drawn: return "Drawn";
    case EventSource::Triggered: return "Triggered";
    case EventSource::TriggeredBypass: return "TriggeredBypass";
  }
  return "?";
}

std::string_view end_reason_name(EndReason r) { return r == EndReason::Manual ? "manual" : "timer_expired"; }

const OpenEvent* GameState::find_open(std::string_view event_id) const {
  for (const auto& o : open_events)
    if (o.event_id == event_id) return &o;
  return nullptr;
}

bool GameState::is_purchased(std::string_view upgrade_id) const {
  return std::find(purchased_upgrades.begin(), purchased_upgrades.end(), upgrade_id) != purchased_upgrades.end();
}

bool operator==(const GameState& a, const GameState& b) { return state_to_json(a) == state_to_json(b); }

namespace {

void ensure_live(const GameState& st) {
  if (st.outcome.terminal())
    throw Error(ErrorCode::SessionTerminal, "session has ended",
                {{"outcome", std::string(outcome_status_name(st.outcome.status))},
                 {"reason", std::string(outcome_reason_name(st.outcome.reason))}});
}

void ensure_round(const GameState& st) {
  ensure_live(st);
  if (!st.round_active) throw Error(ErrorCode::NoActiveRound, "no round is in progress");
}

double clamp_level(const Resistance& r, double level) { return std::clamp(level, r.floor, r.cap); }

// Start-of-round surface update for round `round`: upgrades acquired during
// round-1 take effect; resistances they did not touch decay.
void apply_surface_update(GameState& st, int round) {
  const Scenario& s = *st.scenario;
  std::set<std::string> touched;
  for (const auto& acq : st.acquisitions) {
    if (acq.round != round - 1) continue;
    const auto* u = s.find_upgrade(acq.upgrade_id);
    for (const auto& [rid, delta] : u->resistance_deltas) {
      touched.insert(rid);
      st.resistance_levels[rid] += delta;
    }
    st.surface_flags.insert(u->surface_flags_set.begin(), u->surface_flags_set.end());
  }
  for (const auto& r : s.resistances) {
    double& level = st.resistance_levels[r.id];
    if (!touched.contains(r.id) && round >= 2) level -= r.decay_per_round;
    level = clamp_level(r, level);
  }
}

double strongest_resistance(const GameState& st, const EventSpec& e) {
  double best = 0.0;
  for (const auto& rid : e.blocked_by) {
    auto it = st.resistance_levels.find(rid);
    if (it != st.resistance_levels.end()) best = std::max(best, it->second);
  }
  return best;
}

void acquire(GameState& st, const std::string& upgrade_id, bool forced) {
  st.acquisitions.push_back({upgrade_id, st.round_index, forced});
  if (!st.is_purchased(upgrade_id)) st.purchased_upgrades.push_back(upgrade_id);
}

}  // namespace

GameState new_session(std::shared_ptr<const Scenario> scenario, std::uint64_t seed, const json& overrides) {
  GameState st;
  st.config = apply_config_overrides(scenario->config, overrides);
  st.scenario_hash = scenario_hash(*scenario);
  st.seed = seed;
  st.projected_profit = st.config.starting_profit;
  st.share_price = st.config.starting_share_price;
  for (const auto& r : scenario->resistances) st.resistance_levels[r.id] = r.base_effectiveness;
  st.scenario = std::move(scenario);
  return st;
}

bool resistance_roll(double level, Rng& rng) { return rng.uniform() < level; }

DrawReport begin_round(GameState& live) {
  ensure_live(live);
  if (live.round_active) throw Error(ErrorCode::RoundAlreadyActive, "a round is already in progress");

  GameState st = live;
  const Scenario& s = *st.scenario;
  DrawReport report;

  // (1)
  st.round_index += 1;
  report.round_index = st.round_index;
  if (st.round_index > st.config.rounds_limit) {
    st.round_index = st.config.rounds_limit;
    st.outcome = Outcome::survived();
    live = std::move(st);
    return report;
  }
  // (2) hours never bank across rounds
  st.hours_remaining = st.config.starting_hours;
  // (3)
  apply_surface_update(st, st.round_index);

  Rng rng = Rng::for_round(st.seed, st.round_index);
  const WorldView world = world_view(st);
  auto drawable = [&](const EventSpec& e) {
    return !st.find_open(e.id) && (e.repeatable || !st.occurred_events.contains(e.id)) &&
           evaluate_condition(e.eligibility, world);
  };
  // An event is rolled for at most once per round; once blocked it stays out
  // of the pool too.
  std::set<std::string> blocked_now;
  auto blocked = [&](const EventSpec& e) {
    if (blocked_now.contains(e.id)) return true;
    if (e.blocked_by.empty()) return false;
    const double level = strongest_resistance(st, e);
    if (!resistance_roll(level, rng)) return false;
    // Report the resistance that supplied the level.
    std::string which = e.blocked_by.front();
    for (const auto& rid : e.blocked_by)
      if (st.resistance_levels[rid] == level) {
        which = rid;
        break;
      }
    report.blocked_by_resistance.emplace_back(e.id, which);
    blocked_now.insert(e.id);
    return true;
  };

  std::vector<OpenEvent> arrivals;
  auto arrived = [&](std::string_view id) {
    return std::any_of(arrivals.begin(), arrivals.end(), [&](const OpenEvent& o) { return o.event_id == id; });
  };

  // (4) due triggers, in scheduling order
  std::vector<PendingTrigger> later;
  for (auto& pt : st.pending_triggers) {
    if (pt.due_round != st.round_index) {
      later.push_back(std::move(pt));
      continue;
    }
    const auto* e = s.find_event(pt.trigger.event_id);
    if (st.find_open(e->id) || arrived(e->id)) continue;  // already on the board
    if (!pt.trigger.bypass_criteria) {
      if (!drawable(*e) || blocked(*e)) continue;
    }
    OpenEvent o;
    o.event_id = e->id;
    o.drawn_round = st.round_index;
    o.source = pt.trigger.bypass_criteria ? EventSource::TriggeredBypass : EventSource::Triggered;
    o.origin = pt.origin;
    arrivals.push_back(std::move(o));
    report.triggered_in.push_back(e->id);
  }
  st.pending_triggers = std::move(later);

  // (5) eligibility, then one resistance roll per blockable candidate
  std::vector<const EventSpec*> pool;
  for (const auto& e : s.events) {
    if (arrived(e.id) || !drawable(e)) continue;
    if (blocked(e)) continue;
    pool.push_back(&e);
  }
  report.eligible_pool_size = pool.size();

  // (6) weighted sampling without replacement: one draw per pick,
  // cumulative-weight inversion over the pool in authored order
  const std::size_t picks = std::min<std::size_t>(static_cast<std::size_t>(st.config.draw_count), pool.size());
  for (std::size_t k = 0; k < picks; ++k) {
    double total = 0.0;
    for (const auto* e : pool) total += e->draw_weight;
    const double target = rng.uniform() * total;
    std::size_t chosen = pool.size() - 1;
    double cumulative = 0.0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      cumulative += pool[i]->draw_weight;
      if (target < cumulative) {
        chosen = i;
        break;
      }
    }
    OpenEvent o;
    o.event_id = pool[chosen]->id;
    o.drawn_round = st.round_index;
    arrivals.push_back(std::move(o));
    report.newly_drawn.push_back(pool[chosen]->id);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(chosen));
  }

  for (const auto& o : arrivals) st.open_events.push_back(o);

  // (7) on-draw effects, ascending event id
  std::vector<std::string> on_draw;
  for (const auto& o : arrivals)
    if (s.find_event(o.event_id)->on_draw) on_draw.push_back(o.event_id);
  std::sort(on_draw.begin(), on_draw.end());
  for (const auto& id : on_draw) {
    const auto* e = s.find_event(id);
    OnDrawApplied applied;
    applied.event_id = id;
    if (e->on_draw_effects) {
      const auto& fx = *e->on_draw_effects;
      const Hours before = st.hours_remaining;
      st.hours_remaining = std::max<Hours>(0, st.hours_remaining + fx.hours_delta);
      applied.hours_delta = st.hours_remaining - before;
      st.projected_profit += fx.profit_delta;
      st.share_price += fx.share_delta;
      applied.profit_delta = fx.profit_delta;
      applied.share_delta = fx.share_delta;
      for (const auto& uid : fx.forced_upgrades) {
        const auto* u = s.find_upgrade(uid);
        if (st.is_purchased(uid) && !u->repeatable) continue;
        acquire(st, uid, true);
        applied.forced_upgrades.push_back(uid);
      }
    }
    report.on_draw_applied.push_back(std::move(applied));
    if (e->choices.empty()) {
      std::erase_if(st.open_events, [&](const OpenEvent& o) { return o.event_id == id; });
      report.auto_closed.push_back(id);
    }
  }

  // (8)
  for (const auto& o : arrivals) {
    st.occurred_events.insert(o.event_id);
    st.occurrences.push_back({o.event_id, st.round_index, o.source});
  }

  // (9)
  st.round_active = true;
  st.outcome = check_outcome(st);
  if (st.outcome.terminal()) st.round_active = false;

  report.rng_draws = rng.draws();
  st.rng_cursor += rng.draws();
  live = std::move(st);
  return report;
}

Feedback purchase_upgrade(GameState& st, std::string_view upgrade_id) {
  ensure_round(st);
  const auto* u = st.scenario->find_upgrade(upgrade_id);
  if (!u) throw Error(ErrorCode::UnknownUpgrade, "unknown upgrade '" + std::string(upgrade_id) + "'");
  if (st.is_purchased(u->id) && !u->repeatable)
    throw Error(ErrorCode::AlreadyPurchased, "'" + u->id + "' is already in place");
  if (!evaluate_condition(u->prerequisites, world_view(st)))
    throw Error(ErrorCode::PrerequisiteUnmet, "prerequisites for '" + u->id + "' are not met");
  if (st.hours_remaining < u->hours_cost)
    throw Error(ErrorCode::InsufficientHours, "needs " + std::to_string(u->hours_cost) + " hours, " +
                                                  std::to_string(st.hours_remaining) + " left");
  if (st.projected_profit <= u->profit_cost)
    throw Error(ErrorCode::InsufficientProfit, "cannot fund '" + u->id + "' from projected profit");

  st.hours_remaining -= u->hours_cost;
  st.projected_profit -= u->profit_cost;
  acquire(st, u->id, false);

  Feedback fb;
  fb.text = "Purchased " + u->name + "; takes effect next round.";
  fb.hours_delta = -u->hours_cost;
  fb.profit_delta = -u->profit_cost;
  return fb;
}

Feedback resolve_choice(GameState& st, std::string_view event_id, std::string_view choice_id) {
  ensure_round(st);
  const auto* open = st.find_open(event_id);
  if (!open) {
    const bool resolved = std::any_of(st.made_choices.begin(), st.made_choices.end(),
                                      [&](const auto& p) { return p.first == event_id; });
    if (resolved)
      throw Error(ErrorCode::ChoiceAlreadyFinal, "a choice was already made for '" + std::string(event_id) + "'");
    throw Error(ErrorCode::EventNotOpen, "'" + std::string(event_id) + "' is not open");
  }
  const auto* e = st.scenario->find_event(event_id);
  const auto* c = choice_id == kIgnoreChoiceId ? nullptr : e->find_choice(choice_id);
  if (!c) throw Error(ErrorCode::UnknownChoice, "'" + std::string(choice_id) + "' is not a choice of '" + e->id + "'");
  if (st.hours_remaining < c->hours_cost)
    throw Error(ErrorCode::InsufficientHours, "needs " + std::to_string(c->hours_cost) + " hours, " +
                                                  std::to_string(st.hours_remaining) + " left");

  Feedback fb;
  fb.text = c->feedback_text;
  fb.hours_delta = -c->hours_cost;
  fb.profit_delta = c->profit_delta;
  fb.share_delta = c->share_delta;

  st.hours_remaining -= c->hours_cost;
  st.projected_profit += c->profit_delta;
  st.share_price += c->share_delta;
  st.made_choices.insert({e->id, c->id});
  std::erase_if(st.open_events, [&](const OpenEvent& o) { return o.event_id == e->id; });
  for (const auto& t : c->triggers) {
    PendingTrigger pt{t, st.round_index + t.delay_rounds, e->id + "/" + c->id};
    st.pending_triggers.push_back(pt);
    fb.scheduled_triggers.push_back(std::move(pt));
  }
  st.outcome = check_outcome(st);
  return fb;
}

void ignore_event(GameState& st, std::string_view event_id) {
  ensure_round(st);
  auto it = std::find_if(st.open_events.begin(), st.open_events.end(),
                         [&](const OpenEvent& o) { return o.event_id == event_id; });
  if (it == st.open_events.end()) throw Error(ErrorCode::EventNotOpen, "'" + std::string(event_id) + "' is not open");
  if (it->last_ignored_round == st.round_index)
    throw Error(ErrorCode::AlreadyIgnored, "'" + std::string(event_id) + "' was already ignored this round");

  it->ignored_count += 1;
  it->last_ignored_round = st.round_index;
  const auto* e = st.scenario->find_event(event_id);
  if (e->ignore_trigger)
    st.pending_triggers.push_back(
        {*e->ignore_trigger, st.round_index + e->ignore_trigger->delay_rounds, e->id + "/ignore"});
}

void end_round(GameState& st, EndReason) {
  ensure_round(st);
  st.round_active = false;
  st.hours_remaining = 0;
  st.outcome = check_outcome(st);
}

AttackSurface compute_attack_surface(const GameState& st) {
  const Scenario& s = *st.scenario;
  AttackSurface surface;
  for (const auto& r : s.resistances) surface.resistance_levels[r.id] = r.base_effectiveness;

  for (int round = 1; round <= st.round_index; ++round) {
    std::set<std::string> maintained;
    for (const auto& acq : st.acquisitions) {
      if (acq.round + 1 != round) continue;
      const auto* u = s.find_upgrade(acq.upgrade_id);
      for (const auto& flag : u->surface_flags_set) surface.flags.insert(flag);
      for (const auto& [rid, delta] : u->resistance_deltas) {
        maintained.insert(rid);
        surface.resistance_levels[rid] += delta;
      }
    }
    for (const auto& r : s.resistances) {
      double level = surface.resistance_levels[r.id];
      if (round > 1 && !maintained.contains(r.id)) level -= r.decay_per_round;
      surface.resistance_levels[r.id] = std::clamp(level, r.floor, r.cap);
    }
  }
  return surface;
}

Outcome check_outcome(const GameState& st) {
  if (st.outcome.terminal()) return st.outcome;
  if (st.open_events.size() >= static_cast<std::size_t>(st.config.open_event_cap))
    return Outcome::failed(OutcomeReason::EventSaturation);
  if (st.projected_profit <= 0) return Outcome::failed(OutcomeReason::ProfitDepleted);
  if (st.share_price <= 0) return Outcome::failed(OutcomeReason::SharePriceDepleted);
  if (!st.round_active && st.round_index >= st.config.rounds_limit) return Outcome::survived();
  return Outcome::ongoing();
}

WorldView world_view(const GameState& st) {
  WorldView w;
  w.round_index = st.round_index;
  w.purchased_upgrades.insert(st.purchased_upgrades.begin(), st.purchased_upgrades.end());
  w.occurred_events = st.occurred_events;
  w.made_choices = st.made_choices;
  return w;
}

json state_to_json(const GameState& st) {
  json open = json::array();
  for (const auto& o : st.open_events)
    open.push_back({{"event_id", o.event_id},
                    {"drawn_round", o.drawn_round},
                    {"ignored_count", o.ignored_count},
                    {"last_ignored_round", o.last_ignored_round},
                    {"source", std::string(event_source_name(o.source))},
                    {"origin", o.origin}});
  json pending = json::array();
  for (const auto& p : st.pending_triggers)
    pending.push_back({{"event_id", p.trigger.event_id},
                       {"delay_rounds", p.trigger.delay_rounds},
                       {"bypass_criteria", p.trigger.bypass_criteria},
                       {"due_round", p.due_round},
                       {"origin", p.origin}});
  json acquisitions = json::array();
  for (const auto& a : st.acquisitions)
    acquisitions.push_back({{"upgrade_id", a.upgrade_id}, {"round", a.round}, {"forced", a.forced}});
  json occurrences = json::array();
  for (const auto& o : st.occurrences)
    occurrences.push_back(
        {{"event_id", o.event_id}, {"round", o.round}, {"source", std::string(event_source_name(o.source))}});
  json choices = json::array();
  for (const auto& [e, c] : st.made_choices) choices.push_back({e, c});
  json levels = json::object();
  for (const auto& [k, v] : st.resistance_levels) levels[k] = v;

  return {{"scenario_hash", st.scenario_hash},
          {"config", config_to_json(st.config)},
          {"seed", st.seed},
          {"round_index", st.round_index},
          {"round_active", st.round_active},
          {"hours_remaining", st.hours_remaining},
          {"projected_profit", st.projected_profit},
          {"share_price", st.share_price},
          {"open_events", open},
          {"pending_triggers", pending},
          {"purchased_upgrades", st.purchased_upgrades},
          {"acquisitions", acquisitions},
          {"occurred_events", st.occurred_events},
          {"occurrences", occurrences},
          {"made_choices", choices},
          {"surface_flags", st.surface_flags},
          {"resistance_levels", levels},
          {"rng_cursor", st.rng_cursor},
          {"outcome",
           {{"status", std::string(outcome_status_name(st.outcome.status))},
            {"reason", std::string(outcome_reason_name(st.outcome.reason))}}}};
}

std::string state_checksum(const GameState& st) { return fnv1a_hex(state_to_json(st).dump()); }

}  // namespace dd2
