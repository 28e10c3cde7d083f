#include "reacritic/autodiff/mac_counter.hpp"

#include <numeric>

namespace reacritic::ad {
namespace {

constexpr auto kBuckets = static_cast<std::size_t>(MacCategory::kCount);

struct State {
  std::array<std::uint64_t, kBuckets> counts{};
  MacCategory current = MacCategory::kOther;
};

State& state() {
  thread_local State s;
  return s;
}

}  // namespace

void MacCounter::add(std::uint64_t macs) { state().counts[static_cast<std::size_t>(state().current)] += macs; }

std::uint64_t MacCounter::get(MacCategory category) { return state().counts[static_cast<std::size_t>(category)]; }

std::uint64_t MacCounter::total() {
  const auto& c = state().counts;
  return std::accumulate(c.begin(), c.end(), std::uint64_t{0});
}

void MacCounter::reset() { state().counts.fill(0); }

MacCategory MacCounter::current() { return state().current; }
void MacCounter::set_current(MacCategory category) { state().current = category; }

}  // namespace reacritic::ad
