// Compiled with -mavx2; only reached through run_walk after a CPU check.
#include "mangled/errors.hpp"
#include "mangled/philox.hpp"
#include "mangled/walk_kernel.hpp"

#if defined(__AVX2__)
#include <immintrin.h>
#endif

namespace mangled::mc {

#if defined(__AVX2__)

namespace {

constexpr int kLanes = 8;

// 32x32 -> 64 multiply of every lane by a constant, split into high and low words.
inline void mulhilo(__m256i a, __m256i m, __m256i& hi, __m256i& lo) {
  const __m256i even = _mm256_mul_epu32(a, m);
  const __m256i odd = _mm256_mul_epu32(_mm256_srli_epi64(a, 32), m);
  lo = _mm256_blend_epi32(even, _mm256_slli_epi64(odd, 32), 0xAA);
  hi = _mm256_blend_epi32(_mm256_srli_epi64(even, 32), odd, 0xAA);
}

// Eight independent Philox4x32-10 evaluations, one per lane.
inline void philox8(__m256i& c0, __m256i& c1, __m256i& c2, __m256i& c3, Philox4x32::Key key) {
  const __m256i m0 = _mm256_set1_epi32(static_cast<int>(Philox4x32::kM0));
  const __m256i m1 = _mm256_set1_epi32(static_cast<int>(Philox4x32::kM1));
  std::uint32_t k0 = key[0];
  std::uint32_t k1 = key[1];
  for (int r = 0; r < Philox4x32::kRounds; ++r) {
    __m256i hi0, lo0, hi1, lo1;
    mulhilo(c0, m0, hi0, lo0);
    mulhilo(c2, m1, hi1, lo1);
    const __m256i n0 = _mm256_xor_si256(_mm256_xor_si256(hi1, c1), _mm256_set1_epi32(static_cast<int>(k0)));
    const __m256i n2 = _mm256_xor_si256(_mm256_xor_si256(hi0, c3), _mm256_set1_epi32(static_cast<int>(k1)));
    c0 = n0;
    c1 = lo1;
    c2 = n2;
    c3 = lo0;
    k0 += Philox4x32::kW0;
    k1 += Philox4x32::kW1;
  }
}

}  // namespace

// Lanes advance in lockstep blocks of four events (one Philox call). A lane
// whose path is absorbed idles until the block ends, then takes the next path
// index; refills only happen at block boundaries so every lane's event count
// stays a multiple of four at the start of a block.
void run_walk_avx2(const WalkProgram& program, std::uint64_t begin, std::uint64_t end,
                   std::span<std::uint64_t> survivors_by_k) {
  const std::int32_t n_events = program.n_events;
  const Philox4x32::Key key = Philox4x32::key_from_seed(program.seed);
  const int* threshold = reinterpret_cast<const int*>(program.absorb_threshold.data());

  alignas(32) std::uint32_t path_lo[kLanes];
  alignas(32) std::uint32_t path_hi[kLanes];
  alignas(32) std::int32_t k_arr[kLanes];
  alignas(32) std::int32_t n_arr[kLanes];
  alignas(32) std::int32_t live_arr[kLanes];  // -1 running, 0 absorbed or idle
  bool occupied[kLanes];

  std::uint64_t next = begin;
  int busy = 0;
  for (int l = 0; l < kLanes; ++l) {
    k_arr[l] = 0;
    n_arr[l] = 0;
    occupied[l] = next < end;
    live_arr[l] = occupied[l] ? -1 : 0;
    path_lo[l] = static_cast<std::uint32_t>(next);
    path_hi[l] = static_cast<std::uint32_t>(next >> 32);
    if (occupied[l]) {
      ++next;
      ++busy;
    }
  }

  const __m256i sign = _mm256_set1_epi32(static_cast<int>(0x80000000u));
  const __m256i up_limit = _mm256_xor_si256(_mm256_set1_epi32(static_cast<int>(program.up_threshold)), sign);
  const __m256i last_event = _mm256_set1_epi32(n_events);
  const __m256i stream = _mm256_set1_epi32(static_cast<int>(program.stream));

  while (busy > 0) {
    __m256i k = _mm256_load_si256(reinterpret_cast<const __m256i*>(k_arr));
    __m256i n = _mm256_load_si256(reinterpret_cast<const __m256i*>(n_arr));
    __m256i live = _mm256_load_si256(reinterpret_cast<const __m256i*>(live_arr));

    __m256i r0 = _mm256_srli_epi32(n, 2);
    __m256i r1 = stream;
    __m256i r2 = _mm256_load_si256(reinterpret_cast<const __m256i*>(path_lo));
    __m256i r3 = _mm256_load_si256(reinterpret_cast<const __m256i*>(path_hi));
    philox8(r0, r1, r2, r3, key);
    const __m256i draws[4] = {r0, r1, r2, r3};

    for (const __m256i& u : draws) {
      // Lanes that already completed all events stay put.
      const __m256i active = _mm256_and_si256(live, _mm256_cmpgt_epi32(last_event, n));
      const __m256i up = _mm256_cmpgt_epi32(up_limit, _mm256_xor_si256(u, sign));
      k = _mm256_sub_epi32(k, _mm256_and_si256(up, active));
      n = _mm256_sub_epi32(n, active);
      const __m256i limit = _mm256_i32gather_epi32(threshold, n, 4);
      const __m256i absorbed = _mm256_andnot_si256(_mm256_cmpgt_epi32(k, limit), active);
      live = _mm256_andnot_si256(absorbed, live);
    }

    _mm256_store_si256(reinterpret_cast<__m256i*>(k_arr), k);
    _mm256_store_si256(reinterpret_cast<__m256i*>(n_arr), n);
    _mm256_store_si256(reinterpret_cast<__m256i*>(live_arr), live);

    for (int l = 0; l < kLanes; ++l) {
      if (!occupied[l]) continue;
      const bool absorbed = live_arr[l] == 0;
      const bool finished = !absorbed && n_arr[l] == n_events;
      if (!absorbed && !finished) continue;
      if (finished) ++survivors_by_k[static_cast<std::size_t>(k_arr[l])];
      if (next < end) {
        path_lo[l] = static_cast<std::uint32_t>(next);
        path_hi[l] = static_cast<std::uint32_t>(next >> 32);
        ++next;
        k_arr[l] = 0;
        n_arr[l] = 0;
        live_arr[l] = -1;
      } else {
        occupied[l] = false;
        live_arr[l] = 0;
        --busy;
      }
    }
  }
}

#else

void run_walk_avx2(const WalkProgram&, std::uint64_t, std::uint64_t, std::span<std::uint64_t>) {
  throw DomainError("run_walk_avx2: built without AVX2 support");
}

#endif

}  // namespace mangled::mc
