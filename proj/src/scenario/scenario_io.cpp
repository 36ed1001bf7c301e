#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "dd2/error.h"
#include "dd2/hash.h"
#include "dd2/scenario.h"

namespace dd2 {

using nlohmann::json;

namespace {

Error schema_error(const std::string& path, const std::string& what) {
  return Error(ErrorCode::SchemaError, path + ": " + what, {{"path", path}});
}

// Strict object reader: every key must be consumed, otherwise SchemaError.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw schema_error(path_, "expected an object");
  }

  ~ObjectReader() = default;

  void finish() const {
    for (const auto& [k, _] : j_.items()) {
      if (!seen_.contains(k)) throw schema_error(field(k), "unknown key");
    }
  }

  std::string field(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }
  const std::string& path() const { return path_; }

  const json* get(const std::string& k) {
    seen_.insert(k);
    auto it = j_.find(k);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string id(const std::string& k) {
    const json* v = get(k);
    if (!v) throw schema_error(field(k), "required");
    if (!v->is_string() || v->get<std::string>().empty()) throw schema_error(field(k), "expected a non-empty string");
    return v->get<std::string>();
  }

  std::string text(const std::string& k, bool required, std::string fallback = {}) {
    const json* v = get(k);
    if (!v) {
      if (required) throw schema_error(field(k), "required");
      return fallback;
    }
    if (!v->is_string()) throw schema_error(field(k), "expected a string");
    return v->get<std::string>();
  }

  std::int64_t integer(const std::string& k, std::int64_t fallback, std::int64_t min_value = INT64_MIN) {
    const json* v = get(k);
    if (!v) return fallback;
    if (!v->is_number_integer()) throw schema_error(field(k), "expected an integer");
    auto x = v->get<std::int64_t>();
    if (x < min_value) throw schema_error(field(k), "must be >= " + std::to_string(min_value));
    return x;
  }

  double number(const std::string& k, double fallback) {
    const json* v = get(k);
    if (!v) return fallback;
    if (!v->is_number()) throw schema_error(field(k), "expected a number");
    return v->get<double>();
  }

  bool boolean(const std::string& k, bool fallback) {
    const json* v = get(k);
    if (!v) return fallback;
    if (!v->is_boolean()) throw schema_error(field(k), "expected a boolean");
    return v->get<bool>();
  }

  std::vector<std::string> id_list(const std::string& k) {
    std::vector<std::string> out;
    const json* v = get(k);
    if (!v) return out;
    if (!v->is_array()) throw schema_error(field(k), "expected an array");
    for (std::size_t i = 0; i < v->size(); ++i) {
      const auto& x = (*v)[i];
      if (!x.is_string() || x.get<std::string>().empty())
        throw schema_error(field(k) + "[" + std::to_string(i) + "]", "expected a non-empty string");
      out.push_back(x.get<std::string>());
    }
    return out;
  }

  template <typename F>
  void each(const std::string& k, F&& fn) {
    const json* v = get(k);
    if (!v) return;
    if (!v->is_array()) throw schema_error(field(k), "expected an array");
    for (std::size_t i = 0; i < v->size(); ++i) fn((*v)[i], field(k) + "[" + std::to_string(i) + "]");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<std::string> sorted_unique(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

TriggerSpec read_trigger(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  TriggerSpec t;
  t.event_id = r.id("event_id");
  t.delay_rounds = static_cast<int>(r.integer("delay_rounds", 1, 1));
  t.bypass_criteria = r.boolean("bypass_criteria", false);
  r.finish();
  return t;
}

ScenarioConfig read_config(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  ScenarioConfig c;
  c.rounds_limit = static_cast<int>(r.integer("rounds_limit", c.rounds_limit));
  c.round_seconds = static_cast<int>(r.integer("round_seconds", c.round_seconds));
  c.staff_count = static_cast<int>(r.integer("staff_count", c.staff_count));
  c.hours_per_staff = static_cast<int>(r.integer("hours_per_staff", c.hours_per_staff));
  c.starting_hours = r.integer("starting_hours", Hours{c.staff_count} * c.hours_per_staff);
  c.starting_profit = r.integer("starting_profit", c.starting_profit);
  c.starting_share_price = r.integer("starting_share_price", c.starting_share_price);
  c.draw_count = static_cast<int>(r.integer("draw_count", c.draw_count));
  c.open_event_cap = static_cast<int>(r.integer("open_event_cap", c.open_event_cap));
  r.finish();
  if (auto bad = config_violation(c)) throw schema_error(path, *bad);
  return c;
}

EventSpec read_event(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  EventSpec e;
  e.id = r.id("id");
  e.title = r.text("title", true);
  e.description = r.text("description", false);
  e.category = r.text("category", false);
  e.on_draw = r.boolean("on_draw", false);
  if (const json* c = r.get("eligibility")) e.eligibility = condition_from_json(*c, r.field("eligibility"));
  e.blocked_by = r.id_list("blocked_by");
  e.draw_weight = r.number("draw_weight", 1.0);
  e.repeatable = r.boolean("repeatable", false);
  r.each("choices", [&](const json& cj, const std::string& cpath) {
    ObjectReader cr(cj, cpath);
    Choice ch;
    ch.id = cr.id("id");
    ch.label = cr.text("label", true);
    ch.hours_cost = cr.integer("hours_cost", 0, 0);
    ch.profit_delta = cr.integer("profit_delta", 0);
    ch.share_delta = cr.integer("share_delta", 0);
    ch.feedback_text = cr.text("feedback_text", false);
    cr.each("triggers", [&](const json& tj, const std::string& tpath) { ch.triggers.push_back(read_trigger(tj, tpath)); });
    cr.finish();
    e.choices.push_back(std::move(ch));
  });
  if (const json* t = r.get("ignore_trigger"); t && !t->is_null())
    e.ignore_trigger = read_trigger(*t, r.field("ignore_trigger"));
  if (const json* o = r.get("on_draw_effects"); o && !o->is_null()) {
    ObjectReader orr(*o, r.field("on_draw_effects"));
    OnDrawEffects fx;
    fx.hours_delta = orr.integer("hours_delta", 0);
    fx.profit_delta = orr.integer("profit_delta", 0);
    fx.share_delta = orr.integer("share_delta", 0);
    fx.forced_upgrades = orr.id_list("forced_upgrades");
    orr.finish();
    e.on_draw_effects = std::move(fx);
  }
  r.finish();
  return e;
}

json trigger_to_json(const TriggerSpec& t) {
  return {{"event_id", t.event_id}, {"delay_rounds", t.delay_rounds}, {"bypass_criteria", t.bypass_criteria}};
}

void require(bool ok, const std::string& id, const std::string& referrer) {
  if (!ok)
    throw Error(ErrorCode::DanglingReference, "'" + referrer + "' refers to unknown id '" + id + "'",
                {{"id", id}, {"referrer", referrer}});
}

void require_condition(const Condition& c, const Scenario& s, const std::string& referrer) {
  auto refs = collect_refs(c);
  for (const auto& u : refs.upgrades) require(s.find_upgrade(u) != nullptr, u, referrer);
  for (const auto& e : refs.events) require(s.find_event(e) != nullptr, e, referrer);
  for (const auto& [e, ch] : refs.choices) {
    const auto* ev = s.find_event(e);
    require(ev != nullptr, e, referrer);
    require(ev->find_choice(ch) != nullptr, e + "/" + ch, referrer);
  }
}

}  // namespace

std::optional<std::string> config_violation(const ScenarioConfig& c) {
  if (c.rounds_limit < 1) return "rounds_limit must be >= 1";
  if (c.round_seconds < 1) return "round_seconds must be >= 1";
  if (c.staff_count < 1) return "staff_count must be >= 1";
  if (c.hours_per_staff < 1) return "hours_per_staff must be >= 1";
  if (c.starting_hours < 1) return "starting_hours must be >= 1";
  if (c.starting_profit < 1) return "starting_profit must be >= 1";
  if (c.starting_share_price < 1) return "starting_share_price must be >= 1";
  if (c.draw_count < 1) return "draw_count must be >= 1";
  if (c.open_event_cap < 1) return "open_event_cap must be >= 1";
  if (c.starting_hours != Hours{c.staff_count} * c.hours_per_staff)
    return "starting_hours must equal staff_count * hours_per_staff";
  if (c.open_event_cap <= c.draw_count) return "open_event_cap must exceed draw_count";
  return std::nullopt;
}

ScenarioConfig apply_config_overrides(ScenarioConfig c, const json& overrides) {
  if (overrides.is_null()) return c;
  if (!overrides.is_object()) throw Error(ErrorCode::InvalidOverride, "overrides must be an object");
  auto bad = [](const std::string& what) { return Error(ErrorCode::InvalidOverride, what); };
  bool staffing_changed = false;
  bool hours_given = false;
  for (const auto& [k, v] : overrides.items()) {
    if (!v.is_number_integer()) throw bad("override '" + k + "' must be an integer");
    auto x = v.get<std::int64_t>();
    if (k == "rounds_limit") c.rounds_limit = static_cast<int>(x);
    else if (k == "round_seconds") c.round_seconds = static_cast<int>(x);
    else if (k == "staff_count") c.staff_count = static_cast<int>(x), staffing_changed = true;
    else if (k == "hours_per_staff") c.hours_per_staff = static_cast<int>(x), staffing_changed = true;
    else if (k == "starting_hours") c.starting_hours = x, hours_given = true;
    else if (k == "starting_profit") c.starting_profit = x;
    else if (k == "starting_share_price") c.starting_share_price = x;
    else if (k == "draw_count") c.draw_count = static_cast<int>(x);
    else if (k == "open_event_cap") c.open_event_cap = static_cast<int>(x);
    else throw bad("unknown config key '" + k + "'");
  }
  if (staffing_changed && !hours_given) c.starting_hours = Hours{c.staff_count} * c.hours_per_staff;
  if (auto v = config_violation(c)) throw bad(*v);
  return c;
}

json config_to_json(const ScenarioConfig& c) {
  return {{"rounds_limit", c.rounds_limit},       {"round_seconds", c.round_seconds},
          {"staff_count", c.staff_count},         {"hours_per_staff", c.hours_per_staff},
          {"starting_hours", c.starting_hours},   {"starting_profit", c.starting_profit},
          {"starting_share_price", c.starting_share_price}, {"draw_count", c.draw_count},
          {"open_event_cap", c.open_event_cap}};
}

const Choice* EventSpec::find_choice(std::string_view choice_id) const {
  for (const auto& c : choices)
    if (c.id == choice_id) return &c;
  return nullptr;
}

void Scenario::reindex() {
  asset_index_.clear();
  upgrade_index_.clear();
  resistance_index_.clear();
  event_index_.clear();
  // First definition wins; duplicates are reported by the validator.
  for (std::size_t i = 0; i < assets.size(); ++i) asset_index_.emplace(assets[i].id, i);
  for (std::size_t i = 0; i < upgrades.size(); ++i) upgrade_index_.emplace(upgrades[i].id, i);
  for (std::size_t i = 0; i < resistances.size(); ++i) resistance_index_.emplace(resistances[i].id, i);
  for (std::size_t i = 0; i < events.size(); ++i) event_index_.emplace(events[i].id, i);
}

const Asset* Scenario::find_asset(std::string_view id) const {
  auto it = asset_index_.find(std::string(id));
  return it == asset_index_.end() ? nullptr : &assets[it->second];
}
const Upgrade* Scenario::find_upgrade(std::string_view id) const {
  auto it = upgrade_index_.find(std::string(id));
  return it == upgrade_index_.end() ? nullptr : &upgrades[it->second];
}
const Resistance* Scenario::find_resistance(std::string_view id) const {
  auto it = resistance_index_.find(std::string(id));
  return it == resistance_index_.end() ? nullptr : &resistances[it->second];
}
const EventSpec* Scenario::find_event(std::string_view id) const {
  auto it = event_index_.find(std::string(id));
  return it == event_index_.end() ? nullptr : &events[it->second];
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Scenario parse_scenario(std::string_view document) {
  json root;
  try {
    root = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what(), {{"position", e.byte}});
  }

  Scenario s;
  ObjectReader top(root, "");
  {
    const json* m = top.get("meta");
    if (!m) throw schema_error("meta", "required");
    ObjectReader mr(*m, "meta");
    s.meta.format = mr.text("format", true);
    if (s.meta.format != kScenarioFormat)
      throw schema_error("meta.format", "unsupported format '" + s.meta.format + "'");
    s.meta.name = mr.text("name", false);
    s.meta.description = mr.text("description", false);
    s.meta.version = mr.text("version", false);
    mr.finish();
  }
  if (const json* c = top.get("config")) s.config = read_config(*c, "config");

  top.each("assets", [&](const json& j, const std::string& path) {
    ObjectReader r(j, path);
    Asset a;
    a.id = r.id("id");
    a.name = r.text("name", true);
    a.description = r.text("description", false);
    a.tags = sorted_unique(r.id_list("tags"));
    r.finish();
    s.assets.push_back(std::move(a));
  });

  top.each("upgrades", [&](const json& j, const std::string& path) {
    ObjectReader r(j, path);
    Upgrade u;
    u.id = r.id("id");
    u.name = r.text("name", true);
    u.asset_id = r.id("asset_id");
    u.hours_cost = r.integer("hours_cost", 0, 0);
    u.profit_cost = r.integer("profit_cost", 0, 0);
    u.surface_flags_set = sorted_unique(r.id_list("surface_flags_set"));
    if (const json* d = r.get("resistance_deltas")) {
      if (!d->is_object()) throw schema_error(r.field("resistance_deltas"), "expected an object");
      for (const auto& [rid, delta] : d->items()) {
        if (!delta.is_number()) throw schema_error(r.field("resistance_deltas") + "." + rid, "expected a number");
        u.resistance_deltas[rid] = delta.get<double>();
      }
    }
    if (const json* p = r.get("prerequisites")) u.prerequisites = condition_from_json(*p, r.field("prerequisites"));
    u.repeatable = r.boolean("repeatable", false);
    r.finish();
    s.upgrades.push_back(std::move(u));
  });

  top.each("resistances", [&](const json& j, const std::string& path) {
    ObjectReader r(j, path);
    Resistance x;
    x.id = r.id("id");
    x.name = r.text("name", true);
    x.base_effectiveness = r.number("base_effectiveness", 0.0);
    x.decay_per_round = r.number("decay_per_round", 0.0);
    x.floor = r.number("floor", 0.0);
    x.cap = r.number("cap", 1.0);
    r.finish();
    auto frac = [&](double v) { return v >= 0.0 && v <= 1.0; };
    if (!frac(x.base_effectiveness) || !frac(x.floor) || !frac(x.cap))
      throw schema_error(path, "effectiveness, floor and cap must lie in [0,1]");
    if (x.decay_per_round < 0.0) throw schema_error(path + ".decay_per_round", "must be >= 0");
    if (!(x.floor <= x.base_effectiveness && x.base_effectiveness <= x.cap))
      throw schema_error(path, "require floor <= base_effectiveness <= cap");
    s.resistances.push_back(std::move(x));
  });

  top.each("events", [&](const json& j, const std::string& path) { s.events.push_back(read_event(j, path)); });
  top.finish();

  s.reindex();
  return s;
}

Scenario load_scenario(std::string_view document) {
  Scenario s = parse_scenario(document);
  for (const auto& u : s.upgrades) {
    require(s.find_asset(u.asset_id) != nullptr, u.asset_id, u.id);
    for (const auto& [rid, _] : u.resistance_deltas) require(s.find_resistance(rid) != nullptr, rid, u.id);
    require_condition(u.prerequisites, s, u.id);
  }
  for (const auto& e : s.events) {
    require_condition(e.eligibility, s, e.id);
    for (const auto& rid : e.blocked_by) require(s.find_resistance(rid) != nullptr, rid, e.id);
    for (const auto& ch : e.choices)
      for (const auto& t : ch.triggers) require(s.find_event(t.event_id) != nullptr, t.event_id, e.id + "/" + ch.id);
    if (e.ignore_trigger) require(s.find_event(e.ignore_trigger->event_id) != nullptr, e.ignore_trigger->event_id, e.id);
    if (e.on_draw_effects)
      for (const auto& u : e.on_draw_effects->forced_upgrades) require(s.find_upgrade(u) != nullptr, u, e.id);
  }
  return s;
}

Scenario load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot read " + path.string(), {{"position", 0}});
  std::stringstream ss;
  ss << in.rdbuf();
  return load_scenario(ss.str());
}

json scenario_to_json(const Scenario& s) {
  json meta = {{"format", s.meta.format}};
  if (!s.meta.name.empty()) meta["name"] = s.meta.name;
  if (!s.meta.description.empty()) meta["description"] = s.meta.description;
  if (!s.meta.version.empty()) meta["version"] = s.meta.version;

  json assets = json::array();
  for (const auto& a : s.assets)
    assets.push_back({{"id", a.id}, {"name", a.name}, {"description", a.description}, {"tags", a.tags}});

  json upgrades = json::array();
  for (const auto& u : s.upgrades) {
    json deltas = json::object();
    for (const auto& [k, v] : u.resistance_deltas) deltas[k] = v;
    upgrades.push_back({{"id", u.id},
                        {"name", u.name},
                        {"asset_id", u.asset_id},
                        {"hours_cost", u.hours_cost},
                        {"profit_cost", u.profit_cost},
                        {"surface_flags_set", u.surface_flags_set},
                        {"resistance_deltas", deltas},
                        {"prerequisites", condition_to_json(u.prerequisites)},
                        {"repeatable", u.repeatable}});
  }

  json resistances = json::array();
  for (const auto& r : s.resistances)
    resistances.push_back({{"id", r.id},
                           {"name", r.name},
                           {"base_effectiveness", r.base_effectiveness},
                           {"decay_per_round", r.decay_per_round},
                           {"floor", r.floor},
                           {"cap", r.cap}});

  json events = json::array();
  for (const auto& e : s.events) {
    json choices = json::array();
    for (const auto& c : e.choices) {
      json trig = json::array();
      for (const auto& t : c.triggers) trig.push_back(trigger_to_json(t));
      choices.push_back({{"id", c.id},
                         {"label", c.label},
                         {"hours_cost", c.hours_cost},
                         {"profit_delta", c.profit_delta},
                         {"share_delta", c.share_delta},
                         {"feedback_text", c.feedback_text},
                         {"triggers", trig}});
    }
    json ej = {{"id", e.id},
               {"title", e.title},
               {"description", e.description},
               {"category", e.category},
               {"on_draw", e.on_draw},
               {"eligibility", condition_to_json(e.eligibility)},
               {"blocked_by", e.blocked_by},
               {"draw_weight", e.draw_weight},
               {"repeatable", e.repeatable},
               {"choices", choices}};
    if (e.ignore_trigger) ej["ignore_trigger"] = trigger_to_json(*e.ignore_trigger);
    if (e.on_draw_effects) {
      const auto& fx = *e.on_draw_effects;
      ej["on_draw_effects"] = {{"hours_delta", fx.hours_delta},
                               {"profit_delta", fx.profit_delta},
                               {"share_delta", fx.share_delta},
                               {"forced_upgrades", fx.forced_upgrades}};
    }
    events.push_back(std::move(ej));
  }

  return {{"meta", meta},
          {"config", config_to_json(s.config)},
          {"assets", assets},
          {"upgrades", upgrades},
          {"resistances", resistances},
          {"events", events}};
}

std::string serialize_scenario(const Scenario& s) { return scenario_to_json(s).dump(2); }

std::string scenario_hash(const Scenario& s) { return fnv1a_hex(scenario_to_json(s).dump()); }

}  // namespace dd2
