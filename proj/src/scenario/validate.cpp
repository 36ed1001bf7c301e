#include <algorithm>
#include <map>
#include <set>

#include "dd2/scenario.h"

namespace dd2 {

std::size_t ValidationReport::error_count() const {
  return static_cast<std::size_t>(std::count_if(findings.begin(), findings.end(), [](const Finding& f) {
    return f.severity == Finding::Severity::Error;
  }));
}

std::size_t ValidationReport::warning_count() const { return findings.size() - error_count(); }

std::size_t ValidationReport::count(std::string_view code) const {
  return static_cast<std::size_t>(
      std::count_if(findings.begin(), findings.end(), [&](const Finding& f) { return f.code == code; }));
}

nlohmann::json report_to_json(const ValidationReport& r) {
  auto errors = nlohmann::json::array();
  auto warnings = nlohmann::json::array();
  for (const auto& f : r.findings) {
    nlohmann::json j = {{"code", f.code}, {"subject", f.subject}, {"message", f.message}};
    (f.severity == Finding::Severity::Error ? errors : warnings).push_back(std::move(j));
  }
  return {{"ok", r.ok()}, {"errors", errors}, {"warnings", warnings}};
}

namespace {

class Checker {
 public:
  explicit Checker(const Scenario& s) : s_(s) {}

  ValidationReport run() {
    check_ids();
    check_upgrades();
    check_events();
    if (report_.ok()) check_reachability();
    return std::move(report_);
  }

 private:
  void error(std::string code, std::string subject, std::string message) {
    report_.findings.push_back({Finding::Severity::Error, std::move(code), std::move(subject), std::move(message)});
  }
  void warn(std::string code, std::string subject, std::string message) {
    report_.findings.push_back({Finding::Severity::Warning, std::move(code), std::move(subject), std::move(message)});
  }

  void dangling(const std::string& id, const std::string& referrer, const std::string& what) {
    error("DanglingReference", referrer, referrer + " refers to unknown " + what + " '" + id + "'");
  }

  // Asset, upgrade, resistance and event ids share one namespace.
  void check_ids() {
    std::map<std::string, std::string> owner;
    auto claim = [&](const std::string& id, const std::string& kind) {
      auto [it, fresh] = owner.emplace(id, kind);
      if (!fresh) error("DuplicateId", id, "id '" + id + "' defined as " + it->second + " and again as " + kind);
    };
    for (const auto& a : s_.assets) claim(a.id, "asset");
    for (const auto& u : s_.upgrades) claim(u.id, "upgrade");
    for (const auto& r : s_.resistances) claim(r.id, "resistance");
    for (const auto& e : s_.events) claim(e.id, "event");
  }

  void check_condition(const Condition& c, const std::string& referrer) {
    auto refs = collect_refs(c);
    for (const auto& u : refs.upgrades)
      if (!s_.find_upgrade(u)) dangling(u, referrer, "upgrade");
    for (const auto& e : refs.events)
      if (!s_.find_event(e)) dangling(e, referrer, "event");
    for (const auto& [e, ch] : refs.choices) {
      const auto* ev = s_.find_event(e);
      if (!ev) dangling(e, referrer, "event");
      else if (!ev->find_choice(ch)) dangling(e + "/" + ch, referrer, "choice");
    }
  }

  void check_trigger(const TriggerSpec& t, const std::string& referrer) {
    if (!s_.find_event(t.event_id)) dangling(t.event_id, referrer, "event");
  }

  void check_upgrades() {
    for (const auto& u : s_.upgrades) {
      if (!s_.find_asset(u.asset_id)) dangling(u.asset_id, u.id, "asset");
      for (const auto& [rid, delta] : u.resistance_deltas) {
        if (!s_.find_resistance(rid)) dangling(rid, u.id, "resistance");
        if (delta < -1.0 || delta > 1.0)
          error("DeltaOutOfRange", u.id, "resistance delta for '" + rid + "' outside [-1, 1]");
      }
      check_condition(u.prerequisites, u.id);
      if (u.repeatable && u.hours_cost == 0 && u.profit_cost == 0)
        error("FreeRepeatableUpgrade", u.id, "repeatable upgrade must cost hours or profit");
    }
  }

  void check_events() {
    for (const auto& e : s_.events) {
      check_condition(e.eligibility, e.id);
      for (const auto& rid : e.blocked_by)
        if (!s_.find_resistance(rid)) dangling(rid, e.id, "resistance");
      if (!(e.draw_weight > 0.0)) error("NonPositiveWeight", e.id, "draw_weight must be > 0");
      if (e.choices.empty() && !e.on_draw)
        error("MissingChoices", e.id, "event needs at least one choice besides ignore unless it is on-draw");

      std::set<std::string> seen;
      for (const auto& ch : e.choices) {
        const std::string ref = e.id + "/" + ch.id;
        if (ch.id == kIgnoreChoiceId) error("ReservedChoiceId", ref, "choice id 'ignore' is reserved");
        if (!seen.insert(ch.id).second) error("DuplicateChoiceId", ref, "duplicate choice id");
        for (const auto& t : ch.triggers) check_trigger(t, ref);
      }
      if (e.ignore_trigger) check_trigger(*e.ignore_trigger, e.id + "/ignore");
      if (e.on_draw_effects) {
        if (!e.on_draw) warn("UnusedOnDrawEffects", e.id, "on_draw_effects only apply to on-draw events");
        for (const auto& u : e.on_draw_effects->forced_upgrades)
          if (!s_.find_upgrade(u)) dangling(u, e.id, "upgrade");
      }
    }
  }

  void check_reachability() {
    // The first draw happens at round 1 with nothing purchased or occurred.
    WorldView empty;
    empty.round_index = 1;
    const auto eligible = std::count_if(s_.events.begin(), s_.events.end(), [&](const EventSpec& e) {
      return evaluate_condition(e.eligibility, empty);
    });
    if (eligible < s_.config.draw_count)
      warn("PoolInsufficient", "config.draw_count",
           std::to_string(eligible) + " events eligible at the start, fewer than draw_count " +
               std::to_string(s_.config.draw_count));

    for (const auto& u : s_.upgrades)
      if (!condition_satisfiable(u.prerequisites, s_))
        warn("UnsatisfiableCondition", u.id, "prerequisites can never hold");
    for (const auto& e : s_.events)
      if (!condition_satisfiable(e.eligibility, s_))
        warn("UnsatisfiableCondition", e.id, "eligibility can never hold");

    const auto reach = reachable_events(s_);
    const std::set<std::string> reachable(reach.begin(), reach.end());
    for (const auto& e : s_.events)
      if (!reachable.contains(e.id)) warn("UnreachableEvent", e.id, "event can never be presented");

    for (const auto& cycle : trigger_cycles(s_)) {
      std::string joined;
      for (const auto& id : cycle) joined += (joined.empty() ? "" : ",") + id;
      warn("TriggerCycle", cycle.front(), "trigger cycle through [" + joined + "]");
    }
  }

  const Scenario& s_;
  ValidationReport report_;
};

}  // namespace

ValidationReport validate_scenario(const Scenario& s) { return Checker(s).run(); }

}  // namespace dd2
