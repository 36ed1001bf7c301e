#include <algorithm>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "dd2/error.h"
#include "dd2/service.h"

namespace dd2 {

using nlohmann::json;
namespace fs = std::filesystem;

struct GameMaster::Session {
  std::string id;
  std::shared_ptr<const Scenario> scenario;
  fs::path dir;

  std::mutex write_mu;  // single writer
  std::optional<Journal> journal;
  std::optional<std::int64_t> deadline_ms;

  mutable std::mutex pub_mu;  // guards history only, never held across engine work
  mutable std::condition_variable pub_cv;
  std::vector<SnapshotPtr> history;
};

namespace {

std::string new_session_id() {
  static std::mutex mu;
  static std::random_device rd;
  std::lock_guard lock(mu);
  std::uint64_t x = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(splitmix64(x)));
  return buf;
}

bool valid_session_id(std::string_view id) {
  if (id.empty() || id.size() > 64) return false;
  for (char c : id)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')) return false;
  return true;
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw Error(ErrorCode::StoreUnavailable, "cannot read " + p.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

GameMaster::GameMaster(Options opts) : opts_(std::move(opts)), clock_(opts_.clock) {
  if (!clock_) clock_ = std::make_shared<SystemClock>();
  if (!opts_.data_dir.empty()) {
    std::error_code ec;
    fs::create_directories(opts_.data_dir, ec);
    if (ec) throw Error(ErrorCode::StoreUnavailable, "cannot create data dir " + opts_.data_dir.string());
    recover();
  }
}

GameMaster::~GameMaster() { stop_timer(); }

void GameMaster::recover() {
  for (const auto& entry : fs::directory_iterator(opts_.data_dir)) {
    if (!entry.is_directory()) continue;
    const std::string id = entry.path().filename().string();
    if (!valid_session_id(id)) continue;
    try {
      auto scenario = std::make_shared<const Scenario>(load_scenario(read_file(entry.path() / "scenario.json")));
      auto records = records_from_jsonl(read_file(entry.path() / "log.jsonl"));
      auto s = std::make_shared<Session>();
      s->id = id;
      s->scenario = scenario;
      s->dir = entry.path();
      s->journal.emplace(Journal::restore(scenario, std::move(records)));
      if (s->journal->state().round_active) {
        for (auto it = s->journal->records().rbegin(); it != s->journal->records().rend(); ++it)
          if (it->kind == "begin_round") {
            if (it->payload.contains("deadline_ms")) s->deadline_ms = it->payload["deadline_ms"].get<std::int64_t>();
            break;
          }
      }
      publish(*s);
      sessions_.emplace(id, std::move(s));
    } catch (const std::exception& e) {
      recovery_failures_.emplace_back(id, e.what());
    }
  }
}

std::shared_ptr<GameMaster::Session> GameMaster::find(const std::string& id) const {
  std::shared_lock lock(sessions_mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end())
    throw Error(ErrorCode::SessionNotFound, "no session '" + id + "'", {{"session_id", id}});
  return it->second;
}

void GameMaster::publish(Session& s) {
  auto snap = std::make_shared<Snapshot>();
  const GameState& st = s.journal->state();
  snap->revision = s.journal->revision();
  snap->view = make_state_view(st);
  snap->view.revision = snap->revision;
  snap->view.deadline_ms = s.deadline_ms;
  snap->view_json = view_to_json(snap->view);
  snap->checksum = state_checksum(st);
  {
    std::lock_guard lock(s.pub_mu);
    s.history.push_back(std::move(snap));
  }
  s.pub_cv.notify_all();
}

void GameMaster::persist(Session& s, std::size_t from_record) {
  if (s.dir.empty()) return;
  std::ofstream f(s.dir / "log.jsonl", std::ios::binary | std::ios::app);
  const auto& recs = s.journal->records();
  for (std::size_t i = from_record; i < recs.size(); ++i) f << record_to_json(recs[i]).dump() << '\n';
  f.flush();
  if (!f) throw Error(ErrorCode::StoreUnavailable, "cannot append to " + (s.dir / "log.jsonl").string());
}

std::string GameMaster::create_session(std::shared_ptr<const Scenario> scenario, std::uint64_t seed,
                                       const json& overrides) {
  const auto report = validate_scenario(*scenario);
  if (!report.ok())
    throw Error(ErrorCode::ScenarioInvalid, "scenario has validation errors", report_to_json(report));

  auto s = std::make_shared<Session>();
  s->id = new_session_id();
  s->scenario = scenario;
  s->journal.emplace(scenario, seed, overrides, clock_->wall_time());
  if (!opts_.data_dir.empty()) {
    s->dir = opts_.data_dir / s->id;
    std::error_code ec;
    fs::create_directories(s->dir, ec);
    std::ofstream f(s->dir / "scenario.json", std::ios::binary);
    f << serialize_scenario(*scenario);
    if (ec || !f) throw Error(ErrorCode::StoreUnavailable, "cannot write session directory " + s->dir.string());
    f.close();
    persist(*s, 0);
  }
  publish(*s);
  std::unique_lock lock(sessions_mu_);
  sessions_.emplace(s->id, s);
  return s->id;
}

// Caller holds s.write_mu.
MutationResult GameMaster::mutate(Session& s, std::optional<std::int64_t> expected_revision, const Action& a,
                                  Actor actor) {
  const std::int64_t rev = s.journal->revision();
  if (expected_revision && *expected_revision != rev)
    throw Error(ErrorCode::ConcurrentConflict, "state changed since revision " + std::to_string(*expected_revision),
                {{"expected_revision", *expected_revision}, {"current_revision", rev}});

  const std::string now = clock_->wall_time();
  json extra = nullptr;
  std::optional<std::int64_t> deadline = s.deadline_ms;
  if (a.kind == Action::Kind::BeginRound) {
    deadline = clock_->now_ms() + static_cast<std::int64_t>(s.journal->state().config.round_seconds) * 1000;
    extra = {{"deadline_ms", *deadline}};
  }

  Journal before = *s.journal;
  ActionOutcome out = s.journal->apply(a, actor, now, extra);
  try {
    persist(s, before.records().size());
  } catch (...) {
    s.journal = std::move(before);
    throw;
  }
  s.deadline_ms = s.journal->state().round_active ? deadline : std::nullopt;
  publish(s);

  MutationResult r;
  r.feedback = std::move(out.feedback);
  r.draw = std::move(out.draw);
  r.snapshot = get_state(s.id);
  return r;
}

MutationResult GameMaster::begin_round(const std::string& id, std::optional<std::int64_t> expected_revision) {
  auto s = find(id);
  std::lock_guard lock(s->write_mu);
  return mutate(*s, expected_revision, Action::begin_round(), Actor::Team);
}

MutationResult GameMaster::act(const std::string& id, std::optional<std::int64_t> expected_revision, const Action& a) {
  if (a.kind == Action::Kind::EndRound && a.reason == EndReason::TimerExpired)
    throw Error(ErrorCode::BadRequest, "only the timer may end a round with reason timer_expired");
  auto s = find(id);
  std::lock_guard lock(s->write_mu);
  return mutate(*s, expected_revision, a, Actor::Team);
}

bool GameMaster::expire_round(const std::string& id, int round_index) {
  auto s = find(id);
  std::lock_guard lock(s->write_mu);
  const GameState& st = s->journal->state();
  if (!st.round_active || st.round_index != round_index || st.outcome.terminal()) return false;
  if (!s->deadline_ms || clock_->now_ms() < *s->deadline_ms) return false;
  try {
    mutate(*s, std::nullopt, Action::end_round(EndReason::TimerExpired), Actor::Engine);
    if (!s->journal->state().outcome.terminal()) mutate(*s, std::nullopt, Action::begin_round(), Actor::Engine);
  } catch (const std::exception& e) {
    std::cerr << "dd2: timer transition for session " << id << " failed: " << e.what() << '\n';
    return false;
  }
  return true;
}

std::size_t GameMaster::tick() {
  std::vector<std::pair<std::string, int>> due;
  {
    std::shared_lock lock(sessions_mu_);
    const std::int64_t now = clock_->now_ms();
    for (const auto& [id, s] : sessions_) {
      SnapshotPtr snap;
      {
        std::lock_guard pl(s->pub_mu);
        snap = s->history.back();
      }
      if (snap->view.round_active && snap->view.deadline_ms && *snap->view.deadline_ms <= now)
        due.emplace_back(id, snap->view.round_index);
    }
  }
  std::size_t fired = 0;
  for (const auto& [id, round] : due)
    if (expire_round(id, round)) ++fired;
  return fired;
}

void GameMaster::start_timer(std::chrono::milliseconds poll) {
  if (timer_running_.exchange(true)) return;
  timer_ = std::thread([this, poll] {
    std::unique_lock lock(timer_mu_);
    while (timer_running_) {
      lock.unlock();
      tick();
      lock.lock();
      timer_cv_.wait_for(lock, poll, [this] { return !timer_running_; });
    }
  });
}

void GameMaster::stop_timer() {
  {
    std::lock_guard lock(timer_mu_);
    if (!timer_running_.exchange(false)) return;
  }
  timer_cv_.notify_all();
  if (timer_.joinable()) timer_.join();
}

SnapshotPtr GameMaster::get_state(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->pub_mu);
  return s->history.back();
}

std::vector<LogRecord> GameMaster::get_records(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->write_mu);
  return s->journal->records();
}

std::string GameMaster::get_log(const std::string& id) const {
  const auto recs = get_records(id);
  return records_to_jsonl(recs);
}

std::string GameMaster::state_checksum_of(const std::string& id) const { return get_state(id)->checksum; }

SnapshotPtr GameMaster::wait_for(const std::string& id, std::int64_t after_revision,
                                 std::chrono::milliseconds timeout) const {
  auto s = find(id);
  std::unique_lock lock(s->pub_mu);
  if (after_revision < 0) return s->history.back();
  auto first_after = [&]() -> SnapshotPtr {
    auto it = std::upper_bound(s->history.begin(), s->history.end(), after_revision,
                               [](std::int64_t r, const SnapshotPtr& p) { return r < p->revision; });
    return it == s->history.end() ? nullptr : *it;
  };
  SnapshotPtr found;
  s->pub_cv.wait_for(lock, timeout, [&] { return (found = first_after()) != nullptr; });
  return found;
}

std::vector<std::string> GameMaster::session_ids() const {
  std::shared_lock lock(sessions_mu_);
  std::vector<std::string> out;
  for (const auto& [id, _] : sessions_) out.push_back(id);
  return out;
}

json public_feedback_json(const Feedback& f) {
  return {{"text", f.text},
          {"hours_delta", f.hours_delta},
          {"profit_delta", f.profit_delta},
          {"share_delta", f.share_delta},
          {"consequences_queued", f.scheduled_triggers.size()}};
}

json public_draw_json(const DrawReport& r) {
  json applied = json::array();
  for (const auto& a : r.on_draw_applied)
    applied.push_back({{"event_id", a.event_id},
                       {"hours_delta", a.hours_delta},
                       {"profit_delta", a.profit_delta},
                       {"share_delta", a.share_delta},
                       {"forced_upgrades", a.forced_upgrades}});
  return {{"round_index", r.round_index},
          {"newly_drawn", r.newly_drawn},
          {"triggered_in", r.triggered_in},
          {"blocked_count", r.blocked_by_resistance.size()},
          {"on_draw_applied", applied},
          {"auto_closed", r.auto_closed}};
}

}  // namespace dd2
