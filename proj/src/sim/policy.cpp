#include <algorithm>

#include "dd2/error.h"
#include "dd2/sim.h"

namespace dd2 {

namespace {

const Action& find_end(std::span<const Action> legal) {
  for (const auto& a : legal)
    if (a.kind == Action::Kind::EndRound) return a;
  return legal.back();
}

Hours choice_hours(const StateView& v, const Action& a) {
  for (const auto& e : v.open_events)
    if (e.id == a.target)
      for (const auto& c : e.choices)
        if (c.id == a.choice) return c.hours_cost;
  return 0;
}

}  // namespace

Policy ignore_all_policy() {
  return {"ignore-all", [](const StateView&, std::span<const Action> legal, Rng&) -> Action {
            for (const auto& a : legal)
              if (a.kind == Action::Kind::Ignore || a.kind == Action::Kind::BeginRound) return a;
            return find_end(legal);
          }};
}

Policy random_legal_policy() {
  return {"random-legal", [](const StateView&, std::span<const Action> legal, Rng& rng) -> Action {
            return legal[rng.below(legal.size())];
          }};
}

// Cheapest choice first (ties keep legal order), then upgrades not yet owned,
// then ignore whatever is left, then end the round.
Policy cheapest_first_policy() {
  return {"cheapest-first", [](const StateView& v, std::span<const Action> legal, Rng&) -> Action {
            const Action* best = nullptr;
            Hours best_h = 0;
            for (const auto& a : legal) {
              if (a.kind == Action::Kind::BeginRound) return a;
              if (a.kind != Action::Kind::Choose) continue;
              Hours h = choice_hours(v, a);
              if (!best || h < best_h) {
                best = &a;
                best_h = h;
              }
            }
            if (best) return *best;
            for (const auto& a : legal) {
              if (a.kind != Action::Kind::Purchase) continue;
              auto it = std::find_if(v.upgrades.begin(), v.upgrades.end(),
                                     [&](const auto& u) { return u.id == a.target; });
              if (it != v.upgrades.end() && !it->purchased) return a;
            }
            for (const auto& a : legal)
              if (a.kind == Action::Kind::Ignore) return a;
            return find_end(legal);
          }};
}

std::vector<std::string> policy_names() { return {"ignore-all", "random-legal", "cheapest-first"}; }

Policy policy_by_name(std::string_view name) {
  if (name == "ignore-all") return ignore_all_policy();
  if (name == "random-legal") return random_legal_policy();
  if (name == "cheapest-first") return cheapest_first_policy();
  throw Error(ErrorCode::UnknownIdentifier, "unknown policy '" + std::string(name) + "'",
              {{"known", policy_names()}});
}

}  // namespace dd2
