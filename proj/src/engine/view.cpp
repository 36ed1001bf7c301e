#include "dd2/view.h"

namespace dd2 {

using nlohmann::json;

StateView make_state_view(const GameState& st) {
  const Scenario& s = *st.scenario;
  StateView v;
  v.round_index = st.round_index;
  v.rounds_limit = st.config.rounds_limit;
  v.round_active = st.round_active;
  v.hours_remaining = st.hours_remaining;
  v.starting_hours = st.config.starting_hours;
  v.projected_profit = st.projected_profit;
  v.share_price = st.share_price;
  v.open_event_cap = st.config.open_event_cap;
  v.outcome = st.outcome;

  const bool can_act = st.round_active && !st.outcome.terminal();
  for (const auto& o : st.open_events) {
    const auto* e = s.find_event(o.event_id);
    StateView::EventView ev;
    ev.id = e->id;
    ev.title = e->title;
    ev.description = e->description;
    ev.category = e->category;
    ev.drawn_round = o.drawn_round;
    ev.ignored_count = o.ignored_count;
    ev.ignored_this_round = o.last_ignored_round == st.round_index;
    for (const auto& c : e->choices)
      ev.choices.push_back(
          {c.id, c.label, c.hours_cost, c.profit_delta, c.share_delta, can_act && c.hours_cost <= st.hours_remaining});
    v.open_events.push_back(std::move(ev));
  }

  const WorldView w = world_view(st);
  for (const auto& u : s.upgrades) {
    StateView::UpgradeView uv;
    uv.id = u.id;
    uv.name = u.name;
    const auto* asset = s.find_asset(u.asset_id);
    uv.asset = asset ? asset->name : u.asset_id;
    uv.hours_cost = u.hours_cost;
    uv.profit_cost = u.profit_cost;
    uv.purchased = st.is_purchased(u.id);
    uv.repeatable = u.repeatable;
    uv.available = evaluate_condition(u.prerequisites, w);
    uv.affordable = can_act && uv.available && (!uv.purchased || u.repeatable) &&
                    u.hours_cost <= st.hours_remaining && st.projected_profit > u.profit_cost;
    v.upgrades.push_back(std::move(uv));
  }
  return v;
}

json view_to_json(const StateView& v) {
  json events = json::array();
  for (const auto& e : v.open_events) {
    json choices = json::array();
    for (const auto& c : e.choices)
      choices.push_back({{"id", c.id},
                         {"label", c.label},
                         {"hours_cost", c.hours_cost},
                         {"profit_delta", c.profit_delta},
                         {"share_delta", c.share_delta},
                         {"affordable", c.affordable}});
    events.push_back({{"id", e.id},
                      {"title", e.title},
                      {"description", e.description},
                      {"category", e.category},
                      {"drawn_round", e.drawn_round},
                      {"ignored_count", e.ignored_count},
                      {"ignored_this_round", e.ignored_this_round},
                      {"choices", choices}});
  }
  json upgrades = json::array();
  for (const auto& u : v.upgrades)
    upgrades.push_back({{"id", u.id},
                        {"name", u.name},
                        {"asset", u.asset},
                        {"hours_cost", u.hours_cost},
                        {"profit_cost", u.profit_cost},
                        {"purchased", u.purchased},
                        {"repeatable", u.repeatable},
                        {"available", u.available},
                        {"affordable", u.affordable}});
  return {{"round_index", v.round_index},
          {"rounds_limit", v.rounds_limit},
          {"round_active", v.round_active},
          {"hours_remaining", v.hours_remaining},
          {"starting_hours", v.starting_hours},
          {"projected_profit", v.projected_profit},
          {"share_price", v.share_price},
          {"open_event_cap", v.open_event_cap},
          {"outcome",
           {{"status", std::string(outcome_status_name(v.outcome.status))},
            {"reason", std::string(outcome_reason_name(v.outcome.reason))}}},
          {"open_events", events},
          {"upgrades", upgrades},
          {"deadline_ms", v.deadline_ms ? json(*v.deadline_ms) : json(nullptr)},
          {"revision", v.revision}};
}

}  // namespace dd2
