#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace robsense {

namespace detail {

// SplitMix64 finalizer; used only to decorrelate seed words.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Combine a master seed with a tag into a new master seed.  Used to give
/// each hypothesis / noise family its own family of streams.
constexpr std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t tag) noexcept {
  return detail::splitmix64(detail::splitmix64(master_seed) ^ detail::splitmix64(~tag));
}

/**
 * Deterministic random stream identified by (master_seed, stream_id).
 *
 * The pair is hashed into a 256-bit seed sequence for a 64-bit Mersenne
 * Twister.  The same pair always reproduces the same sequence; distinct
 * stream ids give practically independent sequences.  Satisfies
 * UniformRandomBitGenerator so it can drive the <random> distributions.
 */
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
      : master_seed_(master_seed), stream_id_(stream_id) {
    const std::uint64_t a = detail::splitmix64(master_seed);
    const std::uint64_t b = detail::splitmix64(stream_id ^ 0x6a09e667f3bcc909ULL);
    const std::uint64_t c = detail::splitmix64(a ^ b);
    const std::uint64_t d = detail::splitmix64(c + b);
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                      static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32),
                      static_cast<std::uint32_t>(d), static_cast<std::uint32_t>(d >> 32)};
    engine_.seed(seq);
  }

  static constexpr result_type min() noexcept { return std::mt19937_64::min(); }
  static constexpr result_type max() noexcept { return std::mt19937_64::max(); }

  result_type operator()() { return engine_(); }

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

}  // namespace robsense
