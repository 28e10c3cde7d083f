#pragma once

#include <array>
#include <cstdint>

namespace reacritic::ad {

/// Buckets for the multiply-accumulate tally kept by the matmul kernels.
enum class MacCategory : std::size_t {
  kOther = 0,
  kEmbedding,
  kAttentionProjection,
  kAttentionScores,
  kFeedForward,
  kAggregation,
  kHead,
  kCount,
};

/// Per-thread tally of multiply-accumulates executed by forward matmuls.
/// Backward kernels do not count.
class MacCounter {
 public:
  static void add(std::uint64_t macs);
  static std::uint64_t get(MacCategory category);
  static std::uint64_t total();
  static void reset();
  static MacCategory current();
  static void set_current(MacCategory category);
};

/// Attributes matmuls in scope to `category`.
class MacScope {
 public:
  explicit MacScope(MacCategory category) : previous_(MacCounter::current()) {
    MacCounter::set_current(category);
  }
  ~MacScope() { MacCounter::set_current(previous_); }
  MacScope(const MacScope&) = delete;
  MacScope& operator=(const MacScope&) = delete;

 private:
  MacCategory previous_;
};

}  // namespace reacritic::ad
