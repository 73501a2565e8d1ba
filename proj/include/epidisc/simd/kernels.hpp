#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

// Data-parallel inner loops shared by the transition builder and the batch
// rollouts. Every kernel has a scalar reference implementation; vector
// variants must produce bit-identical results (no FMA contraction, same
// operation order), so the selected ISA never changes a computed artifact.
namespace epidisc::simd {

enum class Isa { scalar, avx2 };

struct KernelTable {
  Isa isa;

  /// In-place SIR update on structure-of-arrays storage.
  ///   inf = min(beta*s*i, s), rec = min(gamma*i, i)
  ///   s -= inf; i = (i + inf) - rec; r += rec
  void (*sir_step)(double* s, double* i, double* r, std::size_t count, double beta,
                   double gamma);

  /// Row-major region index accumulation for one component:
  ///   flat[p] = flat[p] * (breakpoint_count - 1) + j(values[p])
  /// where j(v) counts interior breakpoints <= v. Values below the first
  /// interior breakpoint (and NaN) land in interval 0, values >= the last
  /// interior breakpoint land in the final interval.
  void (*locate_accumulate)(const double* values, std::size_t count, const double* breakpoints,
                            std::size_t breakpoint_count, std::uint64_t* flat);
};

const KernelTable& scalar_kernels();

/// nullptr when the binary or the CPU lacks AVX2.
const KernelTable* avx2_kernels();

/// Kernels selected at first use: AVX2 when available, unless the
/// EPIDISC_SIMD environment variable is set to "scalar".
const KernelTable& kernels();

/// Overrides the runtime choice (tests and benchmarks).
void select_isa(Isa isa);

std::string_view isa_name(Isa isa);

}  // namespace epidisc::simd
