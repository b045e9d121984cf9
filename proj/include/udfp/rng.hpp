#ifndef UDFP_RNG_HPP
#define UDFP_RNG_HPP

#include <cstdint>
#include <limits>

namespace udfp {

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) noexcept {
  return mix64(a + kGolden + mix64(b ^ 0x6A09E667F3BCC909ULL));
}

}  // namespace detail

/**
 * Counter-based random stream.
 *
 * The output sequence is a pure function of (master_seed, stream_id): the
 * k-th draw is mix64(key + (k + 1) * golden) with key = hash(master_seed,
 * stream_id). Each manager, period or experiment owns its own stream, so
 * results never depend on how work is split over threads.
 *
 * Satisfies UniformRandomBitGenerator. Not safe to share between threads.
 */
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t master_seed, std::uint64_t stream_id) noexcept
      : master_seed_(master_seed),
        stream_id_(stream_id),
        key_(detail::hash_combine(master_seed, stream_id)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    ++counter_;
    return detail::mix64(key_ + counter_ * detail::kGolden);
  }

  /// Uniform double in (0, 1]; never 0 so log() is always finite.
  double uniform_open0() noexcept {
    return (static_cast<double>((*this)() >> 11) + 1.0) * 0x1.0p-53;
  }

  /// Child stream whose identity depends on this stream's (seed, id) and `id`,
  /// not on how many draws have been taken from this one.
  RngStream substream(std::uint64_t id) const noexcept {
    return RngStream(detail::hash_combine(master_seed_, stream_id_), id);
  }

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  std::uint64_t draws() const noexcept { return counter_; }

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace udfp

#endif  // UDFP_RNG_HPP
