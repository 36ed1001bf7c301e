#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include "dd2/journal.h"
#include "dd2/view.h"
#include "json.hpp"

namespace dd2 {

class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::int64_t now_ms() const = 0;  // milliseconds since the Unix epoch
  std::string wall_time() const;            // ISO-8601 UTC of now_ms()
};

class SystemClock final : public Clock {
 public:
  std::int64_t now_ms() const override;
};

// Test clock; only moves when told to.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(std::int64_t start_ms = 1'700'000'000'000) : now_(start_ms) {}
  std::int64_t now_ms() const override { return now_.load(); }
  void set(std::int64_t ms) { now_.store(ms); }
  void advance(std::int64_t ms) { now_.fetch_add(ms); }

 private:
  std::atomic<std::int64_t> now_;
};

// Immutable published state of one session at one revision.
struct Snapshot {
  std::int64_t revision = 0;
  StateView view;
  nlohmann::json view_json;
  std::string checksum;
};
using SnapshotPtr = std::shared_ptr<const Snapshot>;

struct MutationResult {
  SnapshotPtr snapshot;
  std::optional<Feedback> feedback;
  std::optional<DrawReport> draw;
};

// Owns all live sessions. Mutations on one session go through that session's
// writer lock in log order; reads take the latest published snapshot and
// never wait for a writer.
class GameMaster {
 public:
  struct Options {
    std::filesystem::path data_dir;  // empty: memory only
    std::shared_ptr<Clock> clock;    // default SystemClock
  };

  explicit GameMaster(Options opts);
  ~GameMaster();
  GameMaster(const GameMaster&) = delete;
  GameMaster& operator=(const GameMaster&) = delete;

  // Returns the new session id. ScenarioInvalid if the scenario has errors.
  std::string create_session(std::shared_ptr<const Scenario> scenario, std::uint64_t seed,
                             const nlohmann::json& overrides = nullptr);

  // expected_revision, when given, must equal the current revision
  // (ConcurrentConflict otherwise).
  MutationResult begin_round(const std::string& id, std::optional<std::int64_t> expected_revision);
  MutationResult act(const std::string& id, std::optional<std::int64_t> expected_revision, const Action& a);

  // Timer path: ends round `round_index` with TimerExpired and begins the
  // next one. A no-op (false) unless that round is still active and its
  // deadline has passed, so duplicate signals collapse into one transition.
  bool expire_round(const std::string& id, int round_index);

  // Fires expire_round for every session whose deadline has passed.
  std::size_t tick();
  void start_timer(std::chrono::milliseconds poll = std::chrono::milliseconds(100));
  void stop_timer();

  SnapshotPtr get_state(const std::string& id) const;
  std::string get_log(const std::string& id) const;  // JSON Lines
  std::vector<LogRecord> get_records(const std::string& id) const;
  std::string state_checksum_of(const std::string& id) const;

  // First snapshot with revision > after_revision, waiting up to `timeout`.
  // after_revision < 0 returns the current snapshot immediately.
  SnapshotPtr wait_for(const std::string& id, std::int64_t after_revision, std::chrono::milliseconds timeout) const;

  std::vector<std::string> session_ids() const;
  // Sessions found on disk that could not be replayed, with the reason.
  const std::vector<std::pair<std::string, std::string>>& recovery_failures() const { return recovery_failures_; }

  Clock& clock() const { return *clock_; }

 private:
  struct Session;

  std::shared_ptr<Session> find(const std::string& id) const;
  MutationResult mutate(Session& s, std::optional<std::int64_t> expected_revision, const Action& a, Actor actor);
  void publish(Session& s);
  void persist(Session& s, std::size_t from_record);
  void recover();

  Options opts_;
  std::shared_ptr<Clock> clock_;
  mutable std::shared_mutex sessions_mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::vector<std::pair<std::string, std::string>> recovery_failures_;

  std::atomic<bool> timer_running_{false};
  std::thread timer_;
  std::mutex timer_mu_;
  std::condition_variable timer_cv_;
};

// Client-facing payloads. Only ids of events that have been presented may
// appear, so pending trigger targets and resistance-blocked events are
// reduced to counts.
nlohmann::json public_feedback_json(const Feedback& f);
nlohmann::json public_draw_json(const DrawReport& r);

}  // namespace dd2
