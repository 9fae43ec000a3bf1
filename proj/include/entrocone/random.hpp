#pragma once

#include <array>
#include <cstdint>

namespace entrocone {

/// Philox4x32-10 counter-based generator (Salmon et al., "Parallel random
/// numbers: as easy as 1, 2, 3").
///
/// Every draw is a pure function of (key, counter), so independent streams
/// are addressed rather than advanced. The library uses the following
/// stream layout, with the 64-bit user seed as the key:
///
///   counter word 0..1 : draw index within the stream
///   counter word 2    : stream id (experiment / sample / resample index)
///   counter word 3    : stream family (see StreamFamily)
///
/// Splitting work across threads by stream id therefore reproduces a
/// single-threaded run bit for bit.
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;

  static Block generate(Block counter, std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
      counter = single_round(counter, key);
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return counter;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static Block single_round(const Block& c, const std::array<std::uint32_t, 2>& k) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

/// Stream families. Distinct families never share counters for one seed.
enum class StreamFamily : std::uint32_t {
  kSample = 1,      // structural-model sampling, stream = sample index
  kExperiment = 2,  // Monte Carlo experiments, stream = run index
  kBootstrap = 3,   // bootstrap resampling, stream = resample index
  kFuzz = 4,        // test-side random model generation
};

/// Sequential view of one Philox stream. Satisfies UniformRandomBitGenerator.
class StreamRng {
 public:
  using result_type = std::uint32_t;

  StreamRng(std::uint64_t seed, StreamFamily family, std::uint32_t stream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        family_(static_cast<std::uint32_t>(family)),
        stream_(stream) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return 0xFFFFFFFFu; }

  result_type operator()() {
    if (pos_ == 4) refill();
    return block_[pos_++];
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    const std::uint64_t hi = (*this)() >> 5;
    const std::uint64_t lo = (*this)() >> 6;
    return static_cast<double>(hi * 67108864ull + lo) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound) by rejection, bound > 0.
  std::uint32_t below(std::uint32_t bound) {
    const std::uint32_t limit = max() - (max() % bound + 1) % bound;
    for (;;) {
      const std::uint32_t r = (*this)();
      if (r <= limit) return r % bound;
    }
  }

 private:
  void refill() {
    block_ = Philox4x32::generate(
        {static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32), stream_,
         family_},
        key_);
    ++counter_;
    pos_ = 0;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint32_t family_;
  std::uint32_t stream_;
  std::uint64_t counter_ = 0;
  Philox4x32::Block block_{};
  int pos_ = 4;
};

/// Derives a child seed so nested procedures (e.g. bootstrap inside an
/// experiment) get their own key space.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t tag, std::uint32_t index) {
  const auto b = Philox4x32::generate({index, tag, 0x5eedu, 0xC0FFEEu},
                                      {static_cast<std::uint32_t>(seed),
                                       static_cast<std::uint32_t>(seed >> 32)});
  return (static_cast<std::uint64_t>(b[0]) << 32) | b[1];
}

}  // namespace entrocone
