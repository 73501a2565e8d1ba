#include "epidisc/simd/kernels.hpp"
#include "kernels_internal.hpp"

#include <algorithm>

namespace epidisc::simd::detail {

void sir_step_scalar(double* s, double* i, double* r, std::size_t count, double beta,
                     double gamma) {
  for (std::size_t p = 0; p < count; ++p) {
    double inf = beta * s[p] * i[p];
    inf = inf < s[p] ? inf : s[p];
    double rec = gamma * i[p];
    rec = rec < i[p] ? rec : i[p];
    s[p] = s[p] - inf;
    i[p] = (i[p] + inf) - rec;
    r[p] = r[p] + rec;
  }
}

std::uint32_t interval_index(const double* breakpoints, std::size_t breakpoint_count, double v) {
  const double* first = breakpoints + 1;
  const double* last = breakpoints + (breakpoint_count - 1);
  return static_cast<std::uint32_t>(
      std::partition_point(first, last, [v](double b) { return b <= v; }) - first);
}

void locate_accumulate_scalar(const double* values, std::size_t count, const double* breakpoints,
                              std::size_t breakpoint_count, std::uint64_t* flat) {
  const std::uint64_t intervals = breakpoint_count - 1;
  for (std::size_t p = 0; p < count; ++p) {
    flat[p] = flat[p] * intervals + interval_index(breakpoints, breakpoint_count, values[p]);
  }
}

}  // namespace epidisc::simd::detail
