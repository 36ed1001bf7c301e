#include <random>

#include "dd2/condition.h"
#include "dd2/error.h"
#include "dd2/scenario.h"
#include "doctest.h"
#include "support/truth_table.h"

using namespace dd2;

namespace {

using tt::table_of;
using tt::worlds;

// Random expression over the three atoms plus round_at_least, any arity.
Condition random_expr(std::mt19937_64& rng, int depth, bool allow_not = true) {
  std::uniform_int_distribution<int> pick(0, depth > 0 ? 7 : 3);
  switch (pick(rng)) {
    case 0: return Condition::upgrade("u");
    case 1: return Condition::event("e");
    case 2: return Condition::choice("e", "c");
    case 3: return Condition::round_at_least(static_cast<int>(rng() % 4));
    case 4:
      if (allow_not) return Condition::negate(random_expr(rng, depth - 1, allow_not));
      [[fallthrough]];
    case 5: {
      std::vector<Condition> xs(rng() % 4);
      for (auto& x : xs) x = random_expr(rng, depth - 1, allow_not);
      return Condition::all(std::move(xs));
    }
    default: {
      std::vector<Condition> xs(rng() % 4);
      for (auto& x : xs) x = random_expr(rng, depth - 1, allow_not);
      return Condition::any(std::move(xs));
    }
  }
}

WorldView random_world(std::mt19937_64& rng) {
  WorldView w;
  w.round_index = static_cast<int>(rng() % 5);
  if (rng() & 1) w.purchased_upgrades.insert("u");
  if (rng() & 1) w.occurred_events.insert("e");
  if (rng() & 1) w.made_choices.insert({"e", "c"});
  return w;
}

WorldView superset_of(const WorldView& a, std::mt19937_64& rng) {
  WorldView b = a;
  b.round_index += static_cast<int>(rng() % 3);
  if (rng() & 1) b.purchased_upgrades.insert("u");
  if (rng() & 1) b.occurred_events.insert("e");
  if (rng() & 1) b.made_choices.insert({"e", "c"});
  return b;
}

}  // namespace

TEST_SUITE("condition") {
  TEST_CASE("truth-table oracle agrees for every expression up to depth 2") {
    const auto w = worlds();
    const auto exprs = tt::up_to_depth(2);
    CHECK(exprs.size() == 1200);
    std::size_t bad = 0;
    for (const auto& e : exprs)
      if (table_of(e.cond, w) != e.mask) ++bad;
    CHECK(bad == 0);
  }

  TEST_CASE("truth-table oracle agrees for every depth-3 expression") {
    const auto w = worlds();
    const auto below = tt::up_to_depth(2);
    std::size_t checked = 0, bad = 0;
    for (const auto& a : below) {
      if (table_of(Condition::negate(a.cond), w) != static_cast<std::uint8_t>(~a.mask)) ++bad;
      ++checked;
    }
    for (const auto& a : below)
      for (const auto& b : below) {
        if (table_of(Condition::all({a.cond, b.cond}), w) != (a.mask & b.mask)) ++bad;
        if (table_of(Condition::any({a.cond, b.cond}), w) != (a.mask | b.mask)) ++bad;
        checked += 2;
      }
    CHECK(checked == 1200 + 2 * 1200 * 1200);
    CHECK(bad == 0);
  }

  TEST_CASE("empty and n-ary connectives") {
    WorldView w = tt::world(0b011);
    CHECK(evaluate_condition(Condition::all({}), w));
    CHECK_FALSE(evaluate_condition(Condition::any({}), w));
    CHECK(evaluate_condition(Condition::always(), w));
    auto u = Condition::upgrade("u"), e = Condition::event("e"), c = Condition::choice("e", "c");
    CHECK_FALSE(evaluate_condition(Condition::all({u, e, c}), w));
    CHECK(evaluate_condition(Condition::any({c, c, e}), w));
  }

  TEST_CASE("round_at_least") {
    WorldView w;
    w.round_index = 3;
    CHECK(evaluate_condition(Condition::round_at_least(3), w));
    CHECK_FALSE(evaluate_condition(Condition::round_at_least(4), w));
  }

  TEST_CASE("De Morgan and double negation hold on random expressions") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 2000; ++i) {
      auto a = random_expr(rng, 4), b = random_expr(rng, 4);
      auto w = random_world(rng);
      CHECK(evaluate_condition(Condition::negate(Condition::all({a, b})), w) ==
            evaluate_condition(Condition::any({Condition::negate(a), Condition::negate(b)}), w));
      CHECK(evaluate_condition(Condition::negate(Condition::any({a, b})), w) ==
            evaluate_condition(Condition::all({Condition::negate(a), Condition::negate(b)}), w));
      CHECK(evaluate_condition(Condition::negate(Condition::negate(a)), w) == evaluate_condition(a, w));
    }
  }

  TEST_CASE("negation-free expressions are monotone in the world") {
    std::mt19937_64 rng(12);
    for (int i = 0; i < 3000; ++i) {
      auto c = random_expr(rng, 4, false);
      CHECK_FALSE(uses_negation(c));
      auto lo = random_world(rng);
      auto hi = superset_of(lo, rng);
      if (evaluate_condition(c, lo)) CHECK(evaluate_condition(c, hi));
    }
  }

  TEST_CASE("JSON round trip preserves structure and meaning") {
    std::mt19937_64 rng(13);
    for (int i = 0; i < 500; ++i) {
      auto c = random_expr(rng, 5);
      auto back = condition_from_json(condition_to_json(c), "x");
      CHECK(back == c);
      CHECK(condition_to_json(back) == condition_to_json(c));
    }
  }

  TEST_CASE("malformed conditions are schema errors with a path") {
    using nlohmann::json;
    auto code_of = [](const json& j) {
      try {
        condition_from_json(j, "events[0].eligibility");
      } catch (const Error& e) {
        CHECK(std::string(e.what()).find("events[0].eligibility") != std::string::npos);
        return e.code();
      }
      return ErrorCode::BadRequest;
    };
    CHECK(code_of(json{{"xor", json::array()}}) == ErrorCode::SchemaError);
    CHECK(code_of(json{{"upgrade", 3}}) == ErrorCode::SchemaError);
    CHECK(code_of(json{{"choice_made", {"e"}}}) == ErrorCode::SchemaError);
    CHECK(code_of(json{{"all", json::array()}, {"any", json::array()}}) == ErrorCode::SchemaError);
    CHECK(code_of(json::array()) == ErrorCode::SchemaError);
  }

  TEST_CASE("scoped evaluation rejects unknown identifiers") {
    Scenario s;
    s.upgrades.push_back({});
    s.upgrades.back().id = "u";
    s.reindex();
    WorldView w;
    CHECK_NOTHROW(evaluate_condition(Condition::upgrade("u"), w, s));
    try {
      evaluate_condition(Condition::all({Condition::upgrade("u"), Condition::event("nope")}), w, s);
      FAIL("expected UnknownIdentifier");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::UnknownIdentifier);
    }
  }

  TEST_CASE("signed references track polarity") {
    auto c = Condition::all({Condition::upgrade("u"), Condition::negate(Condition::any({Condition::event("e")}))});
    auto refs = collect_signed_refs(c);
    CHECK(refs.size() == 2);
    CHECK(refs.count({SignedRef::Kind::Upgrade, "u", "", false}) == 1);
    CHECK(refs.count({SignedRef::Kind::Event, "e", "", true}) == 1);
  }
}
