#include <algorithm>
#include <functional>
#include <map>

#include "dd2/scenario.h"

namespace dd2 {

namespace {

// Beyond this many enumerated worlds the check gives up and reports the
// condition as satisfiable (never a false "unsatisfiable").
constexpr std::uint64_t kMaxWorlds = std::uint64_t{1} << 22;

}  // namespace

bool condition_satisfiable(const Condition& c, const Scenario& s) {
  const ConditionRefs refs = collect_refs(c);

  std::vector<std::string> upgrades(refs.upgrades.begin(), refs.upgrades.end());

  // Per event: the referenced choices; occurrence states are
  // {absent, occurred with no referenced choice, occurred + choice subset}.
  std::map<std::string, std::vector<std::string>> event_choices;
  for (const auto& e : refs.events) event_choices[e];
  for (const auto& [e, ch] : refs.choices) event_choices[e].push_back(ch);

  struct EventAtom {
    std::string id;
    std::vector<std::string> choices;
    bool repeatable;
    std::uint64_t states;
  };
  std::vector<EventAtom> events;
  std::uint64_t total = std::uint64_t{1} << std::min<std::size_t>(upgrades.size(), 40);
  for (auto& [id, chs] : event_choices) {
    const auto* spec = s.find_event(id);
    const bool repeatable = spec && spec->repeatable;
    std::uint64_t states = 0;
    if (repeatable) {
      if (chs.size() > 20) return true;
      states = 1 + (std::uint64_t{1} << chs.size());
    } else {
      states = 2 + chs.size();
    }
    events.push_back({id, chs, repeatable, states});
    total *= states;
    if (total > kMaxWorlds) return true;
  }
  const int max_round = std::max(1, s.config.rounds_limit);
  if (total * static_cast<std::uint64_t>(max_round) > kMaxWorlds) return true;

  WorldView w;
  std::function<bool(std::size_t)> over_events = [&](std::size_t i) -> bool {
    if (i == events.size()) {
      for (int r = 1; r <= max_round; ++r) {
        w.round_index = r;
        if (evaluate_condition(c, w)) return true;
      }
      return false;
    }
    const auto& ev = events[i];
    for (std::uint64_t st = 0; st < ev.states; ++st) {
      std::vector<std::pair<std::string, std::string>> added;
      if (st > 0) {
        w.occurred_events.insert(ev.id);
        if (ev.repeatable) {
          std::uint64_t mask = st - 1;
          for (std::size_t k = 0; k < ev.choices.size(); ++k)
            if (mask & (std::uint64_t{1} << k)) added.emplace_back(ev.id, ev.choices[k]);
        } else if (st >= 2) {
          added.emplace_back(ev.id, ev.choices[st - 2]);
        }
        for (const auto& p : added) w.made_choices.insert(p);
      }
      const bool hit = over_events(i + 1);
      for (const auto& p : added) w.made_choices.erase(p);
      w.occurred_events.erase(ev.id);
      if (hit) return true;
    }
    return false;
  };

  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << upgrades.size()); ++mask) {
    w.purchased_upgrades.clear();
    for (std::size_t k = 0; k < upgrades.size(); ++k)
      if (mask & (std::uint64_t{1} << k)) w.purchased_upgrades.insert(upgrades[k]);
    if (over_events(0)) return true;
  }
  return false;
}

std::vector<TriggerLink> trigger_links(const Scenario& s) {
  std::vector<TriggerLink> links;
  for (const auto& e : s.events) {
    for (const auto& ch : e.choices)
      for (const auto& t : ch.triggers) links.push_back({e.id, ch.id, t});
    if (e.ignore_trigger) links.push_back({e.id, "", *e.ignore_trigger});
  }
  return links;
}

std::vector<std::vector<std::string>> trigger_cycles(const Scenario& s) {
  std::map<std::string, std::vector<std::string>> adj;
  for (const auto& e : s.events) adj[e.id];
  for (const auto& l : trigger_links(s)) {
    if (adj.contains(l.trigger.event_id)) adj[l.from_event].push_back(l.trigger.event_id);
  }

  // Tarjan's SCC over the event graph, visiting nodes in id order.
  std::map<std::string, int> index, low;
  std::map<std::string, bool> on_stack;
  std::vector<std::string> stack;
  std::vector<std::vector<std::string>> out;
  int counter = 0;

  std::function<void(const std::string&)> connect = [&](const std::string& v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (const auto& w : adj[v]) {
      if (!index.contains(w)) {
        connect(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<std::string> comp;
      std::string w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp.push_back(w);
      } while (w != v);
      const bool self_loop = std::find(adj[v].begin(), adj[v].end(), v) != adj[v].end();
      if (comp.size() > 1 || self_loop) {
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
      }
    }
  };
  for (const auto& [v, _] : adj)
    if (!index.contains(v)) connect(v);

  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> reachable_events(const Scenario& s) {
  std::set<std::string> reach;
  for (const auto& e : s.events)
    if (condition_satisfiable(e.eligibility, s)) reach.insert(e.id);

  const auto links = trigger_links(s);
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& l : links) {
      if (!l.trigger.bypass_criteria) continue;
      if (reach.contains(l.from_event) && s.find_event(l.trigger.event_id) &&
          reach.insert(l.trigger.event_id).second)
        grew = true;
    }
  }

  std::vector<std::string> out;
  for (const auto& e : s.events)
    if (reach.contains(e.id)) out.push_back(e.id);
  return out;
}

}  // namespace dd2
