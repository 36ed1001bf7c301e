#include <filesystem>
#include <fstream>
#include <random>
#include <thread>
#include <unistd.h>

#include "dd2/error.h"
#include "dd2/service.h"
#include "doctest.h"
#include "support/fixtures.h"

using namespace dd2;
using namespace std::chrono_literals;
using nlohmann::json;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    static int n = 0;
    path = std::filesystem::temp_directory_path() /
           ("dd2-svc-" + std::to_string(::getpid()) + "-" + std::to_string(n++));
    std::filesystem::remove_all(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::BadRequest;
}

std::shared_ptr<ManualClock> manual() { return std::make_shared<ManualClock>(); }

std::pair<std::string, std::string> first_choice(const Snapshot& s) {
  const auto& e = s.view.open_events.at(0);
  return {e.id, e.choices.at(0).id};
}

}  // namespace

TEST_SUITE("service") {
  TEST_CASE("create, begin and act advance the revision") {
    GameMaster gm({{}, manual()});
    const auto id = gm.create_session(fx::demo(), 1);
    CHECK(id.size() == 16);
    CHECK(gm.get_state(id)->revision == 1);
    auto r = gm.begin_round(id, 1);
    CHECK(r.snapshot->revision == 3);  // begin_round + draw
    CHECK(r.draw);
    CHECK(r.snapshot->view.open_events.size() == 5);
    auto [e, c] = first_choice(*r.snapshot);
    auto a = gm.act(id, 3, Action::choose(e, c));
    CHECK(a.snapshot->revision == 4);
    CHECK(a.feedback);
    CHECK(gm.session_ids() == std::vector<std::string>{id});
    CHECK(code_of([&] { gm.get_state("0000000000000000"); }) == ErrorCode::SessionNotFound);
  }

  TEST_CASE("a choice is final and a rejected action keeps the revision") {
    GameMaster gm({{}, manual()});
    const auto id = gm.create_session(fx::demo(), 2);
    gm.begin_round(id, std::nullopt);
    auto [e, c] = first_choice(*gm.get_state(id));
    const auto rev = gm.act(id, std::nullopt, Action::choose(e, c)).snapshot->revision;
    CHECK(code_of([&] { gm.act(id, rev, Action::choose(e, c)); }) == ErrorCode::ChoiceAlreadyFinal);
    CHECK(gm.get_state(id)->revision == rev);
    CHECK(gm.get_records(id).size() == static_cast<std::size_t>(rev));
  }

  TEST_CASE("stale revisions conflict") {
    GameMaster gm({{}, manual()});
    const auto id = gm.create_session(fx::demo(), 3);
    gm.begin_round(id, 1);
    try {
      gm.act(id, 1, Action::end_round());
      FAIL("expected conflict");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ConcurrentConflict);
      CHECK(e.details()["current_revision"] == 3);
    }
    CHECK(code_of([&] { gm.act(id, 3, Action::end_round(EndReason::TimerExpired)); }) == ErrorCode::BadRequest);
  }

  TEST_CASE("only one of two racing writers wins") {
    for (int k = 0; k < 20; ++k) {
      GameMaster gm({{}, manual()});
      const auto id = gm.create_session(fx::demo(), k);
      gm.begin_round(id, std::nullopt);
      const auto rev = gm.get_state(id)->revision;
      std::atomic<int> ok{0}, conflict{0};
      auto racer = [&](Action a) {
        try {
          gm.act(id, rev, a);
          ++ok;
        } catch (const Error& e) {
          if (e.code() == ErrorCode::ConcurrentConflict) ++conflict;
        }
      };
      const auto& open = gm.get_state(id)->view.open_events;
      std::thread t1(racer, Action::ignore(open[0].id)), t2(racer, Action::ignore(open[1].id));
      t1.join();
      t2.join();
      CHECK(ok == 1);
      CHECK(conflict == 1);
      CHECK(gm.get_state(id)->revision == rev + 1);
    }
  }

  TEST_CASE("the deadline is set by begin_round only") {
    auto clock = manual();
    GameMaster gm({{}, clock});
    const auto id = gm.create_session(fx::demo(), 4, json{{"round_seconds", 60}});
    CHECK_FALSE(gm.get_state(id)->view.deadline_ms);
    gm.begin_round(id, std::nullopt);
    const auto deadline = clock->now_ms() + 60'000;
    CHECK(gm.get_state(id)->view.deadline_ms == deadline);
    clock->advance(10'000);
    auto [e, c] = first_choice(*gm.get_state(id));
    gm.act(id, std::nullopt, Action::choose(e, c));
    CHECK(gm.get_state(id)->view.deadline_ms == deadline);
    gm.act(id, std::nullopt, Action::end_round());
    CHECK_FALSE(gm.get_state(id)->view.deadline_ms);
  }

  TEST_CASE("timer expiry advances the round with no client call") {
    auto clock = manual();
    GameMaster gm({{}, clock});
    const auto id = gm.create_session(fx::fixture("pool12.json"), 5);
    gm.begin_round(id, std::nullopt);
    for (const auto& e : std::vector(gm.get_state(id)->view.open_events))
      gm.act(id, std::nullopt, Action::choose(e.id, e.choices[1].id));
    const auto rev = gm.get_state(id)->revision;
    gm.start_timer(5ms);
    std::this_thread::sleep_for(30ms);
    CHECK(gm.get_state(id)->revision == rev);  // not due yet
    clock->advance(1200 * 1000);
    auto snap = gm.wait_for(id, rev, 5s);
    REQUIRE(snap);
    // end_round and the new begin_round arrive as one transition
    snap = gm.wait_for(id, rev + 2, 5s);
    gm.stop_timer();
    REQUIRE(snap);
    CHECK(snap->view.round_index == 2);
    CHECK(snap->view.round_active);
    auto recs = gm.get_records(id);
    const auto& end = recs.at(static_cast<std::size_t>(rev));
    CHECK(end.kind == "end_round");
    CHECK(end.actor == Actor::Engine);
    CHECK(end.payload["reason"] == "timer_expired");
    CHECK(recs.at(static_cast<std::size_t>(rev) + 1).kind == "begin_round");
    CHECK(snap->view.deadline_ms == clock->now_ms() + 1200 * 1000);
  }

  TEST_CASE("duplicate expiry signals make one transition") {
    auto clock = manual();
    GameMaster gm({{}, clock});
    const auto id = gm.create_session(fx::fixture("pool12.json"), 6);
    gm.begin_round(id, std::nullopt);
    CHECK_FALSE(gm.expire_round(id, 1));  // deadline not reached
    clock->advance(1200 * 1000);
    std::atomic<int> fired{0};
    std::vector<std::thread> ts;
    for (int i = 0; i < 4; ++i) ts.emplace_back([&] { fired += gm.expire_round(id, 1) ? 1 : 0; });
    for (auto& t : ts) t.join();
    fired += static_cast<int>(gm.tick());
    CHECK(fired == 1);
    CHECK(gm.get_state(id)->view.round_index == 2);
    CHECK_FALSE(gm.expire_round(id, 1));
  }

  TEST_CASE("a client ending the round first beats the timer") {
    auto clock = manual();
    GameMaster gm({{}, clock});
    const auto id = gm.create_session(fx::fixture("pool12.json"), 7);
    gm.begin_round(id, std::nullopt);
    clock->advance(1200 * 1000);
    gm.act(id, std::nullopt, Action::end_round());
    CHECK_FALSE(gm.expire_round(id, 1));
    CHECK(gm.tick() == 0);
    CHECK_FALSE(gm.get_state(id)->view.round_active);
  }

  TEST_CASE("restart replays the log to the same checksum") {
    TempDir dir;
    std::string id, sum;
    std::int64_t rev = 0, deadline = 0;
    auto clock = manual();
    {
      GameMaster gm({dir.path, clock});
      id = gm.create_session(fx::demo(), 8);
      Rng pick(99);
      gm.begin_round(id, std::nullopt);
      for (int i = 0; i < 12; ++i) {
        auto st = gm.get_state(id);
        if (st->view.outcome.terminal()) break;
        if (!st->view.round_active) {
          gm.begin_round(id, st->revision);
          continue;
        }
        std::vector<Action> acts{Action::end_round()};
        for (const auto& e : st->view.open_events)
          for (const auto& c : e.choices)
            if (c.affordable) acts.push_back(Action::choose(e.id, c.id));
        gm.act(id, st->revision, acts[pick.below(acts.size())]);
      }
      sum = gm.state_checksum_of(id);
      rev = gm.get_state(id)->revision;
      deadline = gm.get_state(id)->view.deadline_ms.value_or(0);
    }
    GameMaster again({dir.path, clock});
    CHECK(again.recovery_failures().empty());
    REQUIRE(again.session_ids() == std::vector<std::string>{id});
    CHECK(again.state_checksum_of(id) == sum);
    CHECK(again.get_state(id)->revision == rev);
    CHECK(again.get_state(id)->view.deadline_ms.value_or(0) == deadline);
    CHECK(again.get_log(id) == records_to_jsonl(again.get_records(id)));
  }

  TEST_CASE("a damaged session on disk is reported, not loaded") {
    TempDir dir;
    std::string id;
    {
      GameMaster gm({dir.path, manual()});
      id = gm.create_session(fx::demo(), 9);
      gm.begin_round(id, std::nullopt);
    }
    {
      std::ofstream f(dir.path / id / "log.jsonl", std::ios::app);
      f << "{\"broken\": true}\n";
    }
    GameMaster again({dir.path, manual()});
    CHECK(again.session_ids().empty());
    REQUIRE(again.recovery_failures().size() == 1);
    CHECK(again.recovery_failures()[0].first == id);
  }

  TEST_CASE("subscribers see every later revision") {
    GameMaster gm({{}, manual()});
    const auto id = gm.create_session(fx::demo(), 10);
    CHECK(gm.wait_for(id, -1, 0ms)->revision == 1);
    CHECK(gm.wait_for(id, 1, 20ms) == nullptr);
    std::thread writer([&] {
      std::this_thread::sleep_for(20ms);
      gm.begin_round(id, std::nullopt);
    });
    auto snap = gm.wait_for(id, 1, 5s);
    writer.join();
    REQUIRE(snap);
    CHECK(snap->revision > 1);
    // begin_round and its draw record publish as one snapshot
    CHECK(snap->revision == 3);
    CHECK(gm.wait_for(id, 2, 0ms)->revision == 3);
  }

  TEST_CASE("the log holds every accepted mutation") {
    GameMaster gm({{}, manual()});
    const auto id = gm.create_session(fx::demo(), 11);
    gm.begin_round(id, std::nullopt);
    auto [e, c] = first_choice(*gm.get_state(id));
    gm.act(id, std::nullopt, Action::choose(e, c));
    gm.act(id, std::nullopt, Action::ignore(gm.get_state(id)->view.open_events.at(0).id));
    const auto text = gm.get_log(id);
    const auto recs = records_from_jsonl(text);
    CHECK(recs.size() >= 4);
    CHECK(state_checksum(replay(fx::demo(), recs)) == gm.state_checksum_of(id));
  }

  TEST_CASE("invalid scenarios are refused") {
    GameMaster gm({{}, manual()});
    auto bad = std::make_shared<Scenario>(*fx::demo());
    bad->events[0].draw_weight = 0;
    CHECK(code_of([&] { gm.create_session(bad, 1); }) == ErrorCode::ScenarioInvalid);
    CHECK(code_of([&] { gm.create_session(fx::demo(), 1, json{{"bogus", 1}}); }) == ErrorCode::InvalidOverride);
  }

  TEST_CASE("redaction: no unpresented event id leaks over 1000 random steps") {
    auto clock = manual();
    GameMaster gm({{}, clock});
    const auto s = fx::demo();
    std::mt19937_64 g(1234);
    std::string id = gm.create_session(s, 0);
    std::size_t steps = 0, sessions = 1;
    while (steps < 1000) {
      auto snap = gm.get_state(id);
      std::vector<std::string> payloads{snap->view_json.dump()};
      if (snap->view.outcome.terminal()) {
        id = gm.create_session(s, g());
        ++sessions;
        continue;
      }
      if (!snap->view.round_active) {
        auto r = gm.begin_round(id, snap->revision);
        payloads.push_back(r.snapshot->view_json.dump());
        payloads.push_back(public_draw_json(*r.draw).dump());
      } else if (g() % 17 == 0) {
        clock->advance(1200 * 1000);
        gm.tick();
      } else {
        std::vector<Action> acts{Action::end_round()};
        for (const auto& e : snap->view.open_events) {
          for (const auto& c : e.choices) acts.push_back(Action::choose(e.id, c.id));
          if (!e.ignored_this_round) acts.push_back(Action::ignore(e.id));
        }
        for (const auto& u : snap->view.upgrades) acts.push_back(Action::purchase(u.id));
        try {
          auto r = gm.act(id, snap->revision, acts[g() % acts.size()]);
          payloads.push_back(r.snapshot->view_json.dump());
          if (r.feedback) payloads.push_back(public_feedback_json(*r.feedback).dump());
        } catch (const Error&) {
        }
      }
      ++steps;
      const auto occurred = replay(s, gm.get_records(id)).occurred_events;
      for (const auto& e : s->events) {
        if (occurred.count(e.id)) continue;
        const std::string quoted = "\"" + e.id + "\"";
        for (const auto& p : payloads) CHECK_MESSAGE(p.find(quoted) == std::string::npos, e.id << " leaked");
      }
    }
    CHECK(sessions >= 2);
  }
}
