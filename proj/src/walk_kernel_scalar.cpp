#include "mangled/errors.hpp"
#include "mangled/philox.hpp"
#include "mangled/walk_kernel.hpp"

namespace mangled::mc {

std::string_view kernel_name(KernelKind kind) {
  switch (kind) {
    case KernelKind::Scalar:
      return "scalar";
    case KernelKind::Avx2:
      return "avx2";
  }
  return "unknown";
}

bool avx2_available() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

KernelKind best_kernel() { return avx2_available() ? KernelKind::Avx2 : KernelKind::Scalar; }

void run_walk_scalar(const WalkProgram& program, std::uint64_t begin, std::uint64_t end,
                     std::span<std::uint64_t> survivors_by_k) {
  const std::int32_t n_events = program.n_events;
  const std::int32_t* threshold = program.absorb_threshold.data();
  const Philox4x32::Key key = Philox4x32::key_from_seed(program.seed);

  for (std::uint64_t path = begin; path < end; ++path) {
    std::int32_t k = 0;
    std::int32_t n = 0;
    bool alive = true;
    for (std::uint32_t block = 0; alive && n < n_events; ++block) {
      const auto draws = Philox4x32::generate(Philox4x32::walk_counter(path, block, program.stream), key);
      for (int j = 0; j < 4 && n < n_events; ++j) {
        ++n;
        k += draws[static_cast<std::size_t>(j)] < program.up_threshold ? 1 : 0;
        if (k <= threshold[n]) {
          alive = false;
          break;
        }
      }
    }
    if (alive) ++survivors_by_k[static_cast<std::size_t>(k)];
  }
}

void run_walk(KernelKind kind, const WalkProgram& program, std::uint64_t begin, std::uint64_t end,
              std::span<std::uint64_t> survivors_by_k) {
  if (program.absorb_threshold.size() < static_cast<std::size_t>(program.n_events) + 1 + kThresholdPadding) {
    throw DomainError("run_walk: threshold table is not padded");
  }
  if (survivors_by_k.size() < static_cast<std::size_t>(program.n_events) + 1) {
    throw DomainError("run_walk: histogram too small");
  }
  switch (kind) {
    case KernelKind::Scalar:
      run_walk_scalar(program, begin, end, survivors_by_k);
      return;
    case KernelKind::Avx2:
      if (!avx2_available()) throw DomainError("run_walk: AVX2 not supported on this CPU");
      run_walk_avx2(program, begin, end, survivors_by_k);
      return;
  }
}

}  // namespace mangled::mc
