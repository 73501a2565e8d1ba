#pragma once

#include <cstddef>
#include <cstdint>

namespace epidisc::simd::detail {

void sir_step_scalar(double* s, double* i, double* r, std::size_t count, double beta,
                     double gamma);
void locate_accumulate_scalar(const double* values, std::size_t count, const double* breakpoints,
                              std::size_t breakpoint_count, std::uint64_t* flat);
std::uint32_t interval_index(const double* breakpoints, std::size_t breakpoint_count, double v);

#if defined(EPIDISC_HAVE_AVX2)
void sir_step_avx2(double* s, double* i, double* r, std::size_t count, double beta, double gamma);
void locate_accumulate_avx2(const double* values, std::size_t count, const double* breakpoints,
                            std::size_t breakpoint_count, std::uint64_t* flat);
#endif

}  // namespace epidisc::simd::detail
