#include <algorithm>
#include <sstream>

#include "dd2/error.h"
#include "dd2/sim.h"

namespace dd2 {

namespace {

// Enough for any scenario: every action either spends hours, closes an
// event, or is an ignore (once per open event per round).
constexpr std::size_t kStepLimit = 1'000'000;

class Driver {
 public:
  Driver(std::shared_ptr<const Scenario> s, std::uint64_t seed, const PlayOptions& opts) {
    if (opts.keep_log)
      journal_.emplace(std::move(s), seed, opts.overrides, "sim");
    else
      state_ = new_session(std::move(s), seed, opts.overrides);
  }
  const GameState& state() const { return journal_ ? journal_->state() : state_; }
  void apply(const Action& a) {
    if (journal_)
      journal_->apply(a, Actor::Team, "sim");
    else
      apply_action(state_, a);
  }
  std::vector<LogRecord> log() const { return journal_ ? journal_->records() : std::vector<LogRecord>{}; }

 private:
  GameState state_;
  std::optional<Journal> journal_;
};

}  // namespace

PlaythroughResult run_playthrough(std::shared_ptr<const Scenario> scenario, const Policy& policy,
                                  std::uint64_t seed, const PlayOptions& opts) {
  Driver d(std::move(scenario), seed, opts);
  Rng rng = Rng::derive(seed, Rng::Stream::Policy, 0);
  PlaythroughResult r;
  r.seed = seed;

  for (std::size_t step = 0; !d.state().outcome.terminal(); ++step) {
    if (step >= kStepLimit)
      throw Error(ErrorCode::PolicyIllegalAction, "policy '" + policy.name + "' did not finish the session");
    const auto legal = legal_actions(d.state());
    const Action a = policy.decide(make_state_view(d.state()), legal, rng);
    if (std::find(legal.begin(), legal.end(), a) == legal.end())
      throw Error(ErrorCode::PolicyIllegalAction,
                  "policy '" + policy.name + "' chose an illegal action: " + describe(a),
                  {{"action", action_to_json(a)}, {"round_index", d.state().round_index}});
    d.apply(a);
    r.trace.push_back(a);
    if (a.kind == Action::Kind::BeginRound)
      r.open_per_round.push_back(static_cast<int>(d.state().open_events.size()));
    if (a.kind == Action::Kind::EndRound) ++r.rounds_completed;
  }

  const GameState& st = d.state();
  r.final_round = st.round_index;
  r.outcome = st.outcome;
  r.final_profit = st.projected_profit;
  r.final_share = st.share_price;
  if (opts.keep_log) r.log = d.log();
  return r;
}

}  // namespace dd2
