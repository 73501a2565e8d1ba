#include "epidisc/simd/kernels.hpp"
#include "kernels_internal.hpp"

#include <atomic>
#include <cstdlib>
#include <string_view>

namespace epidisc::simd {

namespace {

const KernelTable kScalar{Isa::scalar, &detail::sir_step_scalar, &detail::locate_accumulate_scalar};

#if defined(EPIDISC_HAVE_AVX2)
const KernelTable kAvx2{Isa::avx2, &detail::sir_step_avx2, &detail::locate_accumulate_avx2};
#endif

const KernelTable* detect() {
  if (const char* env = std::getenv("EPIDISC_SIMD"); env && std::string_view(env) == "scalar") {
    return &kScalar;
  }
  if (const KernelTable* avx2 = avx2_kernels()) return avx2;
  return &kScalar;
}

std::atomic<const KernelTable*>& active() {
  static std::atomic<const KernelTable*> table{detect()};
  return table;
}

}  // namespace

const KernelTable& scalar_kernels() { return kScalar; }

const KernelTable* avx2_kernels() {
#if defined(EPIDISC_HAVE_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &kAvx2 : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& kernels() { return *active().load(std::memory_order_acquire); }

void select_isa(Isa isa) {
  const KernelTable* table = &kScalar;
  if (isa == Isa::avx2) {
    table = avx2_kernels();
    if (table == nullptr) table = &kScalar;
  }
  active().store(table, std::memory_order_release);
}

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
  }
  return "unknown";
}

}  // namespace epidisc::simd
