// Compiled with -mavx2 (no -mfma): multiplies and adds stay separately
// rounded, matching the scalar kernels bit for bit.
#include "kernels_internal.hpp"

#include <immintrin.h>

namespace epidisc::simd::detail {

void sir_step_avx2(double* s, double* i, double* r, std::size_t count, double beta,
                   double gamma) {
  const __m256d vbeta = _mm256_set1_pd(beta);
  const __m256d vgamma = _mm256_set1_pd(gamma);
  std::size_t p = 0;
  for (; p + 4 <= count; p += 4) {
    const __m256d vs = _mm256_loadu_pd(s + p);
    const __m256d vi = _mm256_loadu_pd(i + p);
    const __m256d vr = _mm256_loadu_pd(r + p);
    // _mm256_min_pd(a, b) is (a < b ? a : b), the scalar select.
    const __m256d inf = _mm256_min_pd(_mm256_mul_pd(_mm256_mul_pd(vbeta, vs), vi), vs);
    const __m256d rec = _mm256_min_pd(_mm256_mul_pd(vgamma, vi), vi);
    _mm256_storeu_pd(s + p, _mm256_sub_pd(vs, inf));
    _mm256_storeu_pd(i + p, _mm256_sub_pd(_mm256_add_pd(vi, inf), rec));
    _mm256_storeu_pd(r + p, _mm256_add_pd(vr, rec));
  }
  sir_step_scalar(s + p, i + p, r + p, count - p, beta, gamma);
}

namespace {

// Counting compares beat a per-lane binary search up to a few dozen
// breakpoints; beyond that fall back to the scalar search.
constexpr std::size_t kMaxCountingBreakpoints = 64;

}  // namespace

void locate_accumulate_avx2(const double* values, std::size_t count, const double* breakpoints,
                            std::size_t breakpoint_count, std::uint64_t* flat) {
  if (breakpoint_count > kMaxCountingBreakpoints) {
    locate_accumulate_scalar(values, count, breakpoints, breakpoint_count, flat);
    return;
  }
  const std::uint64_t intervals = breakpoint_count - 1;
  const __m256i vintervals = _mm256_set1_epi64x(static_cast<long long>(intervals));
  std::size_t p = 0;
  for (; p + 4 <= count; p += 4) {
    const __m256d v = _mm256_loadu_pd(values + p);
    __m256i j = _mm256_setzero_si256();
    for (std::size_t k = 1; k + 1 < breakpoint_count; ++k) {
      const __m256d le = _mm256_cmp_pd(_mm256_set1_pd(breakpoints[k]), v, _CMP_LE_OQ);
      // all-ones lanes are -1 as integers
      j = _mm256_sub_epi64(j, _mm256_castpd_si256(le));
    }
    const __m256i prev = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(flat + p));
    // 64-bit prev * 32-bit intervals from two 32x32 multiplies.
    const __m256i lo = _mm256_mul_epu32(prev, vintervals);
    const __m256i hi = _mm256_slli_epi64(_mm256_mul_epu32(_mm256_srli_epi64(prev, 32), vintervals), 32);
    const __m256i next = _mm256_add_epi64(_mm256_add_epi64(lo, hi), j);
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(flat + p), next);
  }
  locate_accumulate_scalar(values + p, count - p, breakpoints, breakpoint_count, flat + p);
}

}  // namespace epidisc::simd::detail
