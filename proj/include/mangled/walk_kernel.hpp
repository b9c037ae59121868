#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

// Inner loop of the branching-walk Monte Carlo, reduced to integers.
//
// A path is the sequence of branch choices of one world. Its state after n
// events is k, the number of times it took the larger branch; its log-size is
// an affine function of (n, k), and absorption at event n is exactly the test
// k <= absorb_threshold[n]. The kernels only draw bits and compare integers,
// so the scalar and SIMD variants produce identical outcomes path by path.
namespace mangled::mc {

struct WalkProgram {
  std::int32_t n_events = 0;
  // Larger branch iff the 32-bit uniform draw is < up_threshold.
  std::uint32_t up_threshold = 0x80000000u;
  // Indexed by event n (entry 0 unused), padded past n_events for gathers.
  // -1 means no value of k is absorbed at that event.
  std::vector<std::int32_t> absorb_threshold;
  std::uint64_t seed = 0;
  std::uint32_t stream = 0;
};

// Padding after absorb_threshold[n_events] required by the SIMD kernel.
inline constexpr std::size_t kThresholdPadding = 8;

enum class KernelKind { Scalar, Avx2 };

std::string_view kernel_name(KernelKind kind);

// Runtime CPU check.
bool avx2_available();

// Fastest kernel this CPU supports.
KernelKind best_kernel();

// Simulates paths [begin, end) and adds each survivor to survivors_by_k[k]
// (size n_events + 1).
void run_walk_scalar(const WalkProgram& program, std::uint64_t begin, std::uint64_t end,
                     std::span<std::uint64_t> survivors_by_k);
void run_walk_avx2(const WalkProgram& program, std::uint64_t begin, std::uint64_t end,
                   std::span<std::uint64_t> survivors_by_k);

// Dispatches; throws DomainError if Avx2 is requested on a CPU without it.
void run_walk(KernelKind kind, const WalkProgram& program, std::uint64_t begin, std::uint64_t end,
              std::span<std::uint64_t> survivors_by_k);

}  // namespace mangled::mc
