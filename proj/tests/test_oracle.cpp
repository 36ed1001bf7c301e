#include "dd2/analysis.h"
#include "doctest.h"
#include "support/fixtures.h"
#include "support/oracle_check.h"

namespace {

void agree(const std::string& fixture, std::uint64_t seed, int depth, std::size_t min_states) {
  auto s = fx::fixture(fixture);
  auto a = ref::check_agreement(s, seed, depth);
  INFO(fixture << " seed " << seed);
  for (const auto& m : a.mismatches) FAIL_CHECK(m);
  CHECK(a.states >= min_states);

  // Anything the exhaustive search ever saw arrive must not be reported dead.
  const auto rep = dd2::reachability_report(*s);
  for (const auto& id : a.ever_occurred)
    CHECK(std::find(rep.unreachable_events.begin(), rep.unreachable_events.end(), id) == rep.unreachable_events.end());
}

}  // namespace

TEST_SUITE("oracle") {
  TEST_CASE("engine agrees with the reference model on every path of oracle4") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 42ull, 1000ull}) agree("oracle4.json", seed, 3, 50);
  }

  TEST_CASE("engine agrees with the reference model on the bypass and usb fixtures") {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      agree("bypass.json", seed, 3, 5);
      agree("usb.json", seed, 3, 5);
    }
  }

  TEST_CASE("the search reaches the conditional and bypass events") {
    std::set<std::string> all;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      auto a = ref::check_agreement(fx::fixture("oracle4.json"), seed, 3);
      all.insert(a.ever_occurred.begin(), a.ever_occurred.end());
    }
    CHECK(all == std::set<std::string>{"alpha", "beta", "delta", "gamma"});
    auto b = ref::check_agreement(fx::fixture("bypass.json"), 0, 3);
    CHECK(b.ever_occurred.count("target") == 1);
  }
}
