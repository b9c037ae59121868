#pragma once

#include <array>
#include <cstdint>

namespace mangled {

// Philox4x32-10 (Salmon et al., SC'11). A counter-based generator: output is a
// pure function of (counter, key), so path i of a Monte Carlo run draws the
// same numbers no matter which worker simulates it.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr std::uint32_t kM0 = 0xD2511F53u;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kW0 = 0x9E3779B9u;
  static constexpr std::uint32_t kW1 = 0xBB67AE85u;
  static constexpr int kRounds = 10;

  static constexpr Counter generate(Counter c, Key k) {
    for (int r = 0; r < kRounds; ++r) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * c[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * c[2];
      c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
      k[0] += kW0;
      k[1] += kW1;
    }
    return c;
  }

  static constexpr Key key_from_seed(std::uint64_t seed) {
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  }

  // Counter layout used by the walk kernels: word 0 is the block of four
  // events, word 1 a stream tag, words 2-3 the 64-bit path index.
  static constexpr Counter walk_counter(std::uint64_t path, std::uint32_t block,
                                        std::uint32_t stream = 0) {
    return {block, stream, static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)};
  }
};

}  // namespace mangled
