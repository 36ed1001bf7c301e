#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dd2/engine.h"
#include "json.hpp"

namespace dd2 {

// What the players are allowed to see. Nothing about pending triggers, RNG
// state, eligibility rules or events that have not been presented.
struct StateView {
  struct ChoiceView {
    std::string id;
    std::string label;
    Hours hours_cost = 0;
    Money profit_delta = 0;
    Money share_delta = 0;
    bool affordable = false;
  };
  struct EventView {
    std::string id;
    std::string title;
    std::string description;
    std::string category;
    int drawn_round = 0;
    int ignored_count = 0;
    bool ignored_this_round = false;
    std::vector<ChoiceView> choices;
  };
  struct UpgradeView {
    std::string id;
    std::string name;
    std::string asset;
    Hours hours_cost = 0;
    Money profit_cost = 0;
    bool purchased = false;
    bool repeatable = false;
    bool available = false;   // prerequisites hold
    bool affordable = false;  // would be accepted right now
  };

  int round_index = 0;
  int rounds_limit = 0;
  bool round_active = false;
  Hours hours_remaining = 0;
  Hours starting_hours = 0;
  Money projected_profit = 0;
  Money share_price = 0;
  int open_event_cap = 0;
  Outcome outcome;
  std::vector<EventView> open_events;
  std::vector<UpgradeView> upgrades;

  // Filled in by the session service.
  std::optional<std::int64_t> deadline_ms;
  std::int64_t revision = 0;
};

StateView make_state_view(const GameState& st);
nlohmann::json view_to_json(const StateView& v);

}  // namespace dd2
