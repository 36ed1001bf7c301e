#include "dd2/error.h"
#include "dd2/scenario.h"
#include "doctest.h"
#include "support/fixtures.h"

using namespace dd2;
using nlohmann::json;

namespace {

ErrorCode parse_error_code(const std::string& doc, std::string* message = nullptr) {
  try {
    parse_scenario(doc);
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.code();
  }
  return ErrorCode::BadRequest;
}

json minimal() {
  return json{{"meta", {{"format", "dd2/1"}, {"name", "m"}}},
              {"assets", json::array({{{"id", "a"}, {"name", "A"}}})},
              {"events", json::array({{{"id", "e1"}, {"title", "E1"}, {"choices", json::array({{{"id", "c"}, {"label", "C"}}})}}})}};
}

}  // namespace

TEST_SUITE("scenario") {
  TEST_CASE("config defaults are the published game constants") {
    const Scenario s = parse_scenario(minimal().dump());
    CHECK(s.config.rounds_limit == 7);
    CHECK(s.config.round_seconds == 1200);
    CHECK(s.config.staff_count == 10);
    CHECK(s.config.hours_per_staff == 8);
    CHECK(s.config.starting_hours == 80);
    CHECK(s.config.starting_profit == 500000);
    CHECK(s.config.starting_share_price == 100);
    CHECK(s.config.draw_count == 5);
    CHECK(s.config.open_event_cap == 10);
  }

  TEST_CASE("defaults fill optional fields") {
    const Scenario s = parse_scenario(minimal().dump());
    const auto& e = s.events.at(0);
    CHECK(e.draw_weight == 1.0);
    CHECK_FALSE(e.repeatable);
    CHECK_FALSE(e.on_draw);
    CHECK(e.eligibility.kind == Condition::Kind::AlwaysTrue);
    CHECK(e.choices.at(0).hours_cost == 0);
    CHECK_FALSE(e.ignore_trigger.has_value());
  }

  TEST_CASE("unknown keys are rejected with their path") {
    json j = minimal();
    j["events"][0]["colour"] = "red";
    std::string msg;
    CHECK(parse_error_code(j.dump(), &msg) == ErrorCode::SchemaError);
    CHECK(msg.find("events[0].colour") != std::string::npos);
  }

  TEST_CASE("syntax and schema errors") {
    std::string msg;
    CHECK(parse_error_code("{\"meta\": ", &msg) == ErrorCode::ParseError);
    CHECK(parse_error_code("{}") == ErrorCode::SchemaError);
    json j = minimal();
    j["meta"]["format"] = "dd2/0";
    CHECK(parse_error_code(j.dump()) == ErrorCode::SchemaError);
    j = minimal();
    j["resistances"] = json::array({{{"id", "r"}, {"name", "R"}, {"base_effectiveness", 1.5}}});
    CHECK(parse_error_code(j.dump()) == ErrorCode::SchemaError);
    j = minimal();
    j["events"][0]["choices"][0]["hours_cost"] = -1;
    CHECK(parse_error_code(j.dump()) == ErrorCode::SchemaError);
    j = minimal();
    j["config"] = {{"staff_count", 10}, {"hours_per_staff", 8}, {"starting_hours", 81}};
    CHECK(parse_error_code(j.dump()) != ErrorCode::BadRequest);
  }

  TEST_CASE("serialization round trip is exact and idempotent") {
    for (auto path : {fx::demo_path(), fx::fixture_path("oracle4.json"), fx::fixture_path("defective.json")}) {
      const Scenario a = parse_scenario(fx::slurp(path));
      const std::string once = serialize_scenario(a);
      const Scenario b = parse_scenario(once);
      CHECK(a == b);
      CHECK(serialize_scenario(b) == once);
      CHECK(scenario_hash(a) == scenario_hash(b));
    }
  }

  TEST_CASE("hash changes with content") {
    Scenario a = parse_scenario(fx::slurp(fx::demo_path()));
    Scenario b = a;
    b.events[0].choices[0].hours_cost += 1;
    CHECK(scenario_hash(a) != scenario_hash(b));
  }

  TEST_CASE("overrides") {
    const ScenarioConfig base;
    auto c = apply_config_overrides(base, json{{"round_seconds", 60}});
    CHECK(c.round_seconds == 60);
    ScenarioConfig expect = base;
    expect.round_seconds = 60;
    CHECK(c == expect);

    c = apply_config_overrides(base, json{{"staff_count", 5}});
    CHECK(c.starting_hours == 40);

    auto code = [&](const json& o) {
      try {
        apply_config_overrides(base, o);
      } catch (const Error& e) {
        return e.code();
      }
      return ErrorCode::BadRequest;
    };
    CHECK(code(json{{"colour", 1}}) == ErrorCode::InvalidOverride);
    CHECK(code(json{{"open_event_cap", 5}}) == ErrorCode::InvalidOverride);
    CHECK(code(json{{"rounds_limit", 0}}) == ErrorCode::InvalidOverride);
    CHECK(code(json{{"round_seconds", "fast"}}) == ErrorCode::InvalidOverride);
    CHECK(code(json::array()) == ErrorCode::InvalidOverride);
    CHECK(apply_config_overrides(base, json{{"open_event_cap", 11}}).open_event_cap == 11);
  }

  TEST_CASE("load_scenario stops at the first dangling reference") {
    try {
      load_scenario(fx::slurp(fx::fixture_path("defective.json")));
      FAIL("expected DanglingReference");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DanglingReference);
    }
  }

  TEST_CASE("validator reports every defect in the defective fixture") {
    const auto r = validate_scenario(parse_scenario(fx::slurp(fx::fixture_path("defective.json"))));
    CHECK_FALSE(r.ok());
    CHECK(r.count("DanglingReference") == 4);
    CHECK(r.count("DuplicateId") == 1);
    CHECK(r.count("FreeRepeatableUpgrade") == 1);
    CHECK(r.count("NonPositiveWeight") == 1);
    CHECK(r.count("MissingChoices") == 1);
    CHECK(r.count("ReservedChoiceId") == 1);
    CHECK(r.count("DuplicateChoiceId") == 1);
    const json j = report_to_json(r);
    CHECK(j["errors"].size() == r.error_count());
  }

  TEST_CASE("demo scenario validates cleanly") {
    const auto r = validate_scenario(*fx::demo());
    CHECK(r.error_count() == 0);
    CHECK(r.count("PoolInsufficient") == 0);
    CHECK(r.warning_count() == 0);
  }

  TEST_CASE("demo content, counted from the raw file") {
    const json j = json::parse(fx::slurp(fx::demo_path()));
    std::set<std::string> event_ids;
    for (const auto& e : j["events"]) event_ids.insert(e["id"].get<std::string>());
    CHECK(event_ids.size() == j["events"].size());
    CHECK(j["events"].size() >= 30);

    // Enough always-eligible, unblockable, non-on-draw events that round 2
    // always has at least draw_count candidates.
    int steady = 0;
    for (const auto& e : j["events"])
      if (!e.contains("eligibility") && !e.contains("blocked_by") && !e.value("on_draw", false)) ++steady;
    CHECK(steady >= 2 * 5 + 2);

    // No choice id collides with an event id, and ignore triggers wait at
    // least two rounds.
    for (const auto& e : j["events"]) {
      for (const auto& c : e["choices"]) CHECK(event_ids.count(c["id"].get<std::string>()) == 0);
      if (e.contains("ignore_trigger")) CHECK(e["ignore_trigger"]["delay_rounds"].get<int>() >= 2);
    }

    // Firewall starts at 0.60; its tuning upgrade adds 0.15.
    bool firewall = false, tuning = false;
    for (const auto& r : j["resistances"])
      if (r["id"] == "firewall") firewall = r["base_effectiveness"].get<double>() == 0.60;
    for (const auto& u : j["upgrades"])
      if (u["id"] == "firewall_tuning") tuning = u["resistance_deltas"]["firewall"].get<double>() == 0.15;
    CHECK(firewall);
    CHECK(tuning);
  }

  TEST_CASE("pool sufficiency is checked against draw_count") {
    Scenario s = *fx::fixture("pool12.json");
    CHECK(validate_scenario(s).count("PoolInsufficient") == 0);
    s.events.resize(4);
    s.reindex();
    CHECK(validate_scenario(s).count("PoolInsufficient") == 1);
  }

  TEST_CASE("satisfiability and reachability") {
    const auto cyc = fx::fixture("cycles.json");
    CHECK_FALSE(condition_satisfiable(cyc->find_event("z")->eligibility, *cyc));
    CHECK(condition_satisfiable(cyc->find_event("b")->eligibility, *cyc));
    auto reach = reachable_events(*cyc);
    CHECK(std::find(reach.begin(), reach.end(), "z") == reach.end());
    CHECK(trigger_cycles(*cyc) == std::vector<std::vector<std::string>>{{"a", "b"}});

    const auto byp = fx::fixture("bypass.json");
    CHECK_FALSE(condition_satisfiable(byp->find_event("target")->eligibility, *byp));
    reach = reachable_events(*byp);
    CHECK(std::find(reach.begin(), reach.end(), "target") != reach.end());

    Scenario nob = *byp;
    nob.events[0].choices[0].triggers[0].bypass_criteria = false;
    nob.reindex();
    reach = reachable_events(nob);
    CHECK(std::find(reach.begin(), reach.end(), "target") == reach.end());
  }

  TEST_CASE("satisfiability respects event and choice coupling") {
    Scenario s = *fx::fixture("oracle4.json");
    // A choice implies its event occurred.
    CHECK_FALSE(condition_satisfiable(
        Condition::all({Condition::choice("alpha", "fix"), Condition::negate(Condition::event("alpha"))}), s));
    // A non-repeatable event takes one choice at most.
    CHECK_FALSE(condition_satisfiable(
        Condition::all({Condition::choice("alpha", "fix"), Condition::choice("alpha", "skip")}), s));
    CHECK(condition_satisfiable(Condition::round_at_least(3), s));
    CHECK_FALSE(condition_satisfiable(Condition::round_at_least(4), s));
  }
}
