#include <cstddef>

#include "congestion/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#define CONGESTION_HAVE_X86 1
#else
#define CONGESTION_HAVE_X86 0
#endif

namespace congestion::kernels {

#if CONGESTION_HAVE_X86

namespace {

__attribute__((target("avx2,fma"))) void horner_avx2_impl(
    const double* coeffs, std::size_t n_coeffs, const double* ts, double* out,
    std::size_t n) {
  std::size_t i = 0;
  const __m256d top = _mm256_set1_pd(coeffs[n_coeffs - 1]);
  for (; i + 4 <= n; i += 4) {
    const __m256d t = _mm256_loadu_pd(ts + i);
    __m256d acc = top;
    for (std::size_t k = n_coeffs - 1; k-- > 0;) {
      acc = _mm256_fmadd_pd(acc, t, _mm256_set1_pd(coeffs[k]));
    }
    _mm256_storeu_pd(out + i, acc);
  }
  // tail
  if (i < n) {
    horner_scalar({coeffs, n_coeffs}, {ts + i, n - i}, {out + i, n - i});
  }
}

}  // namespace

void horner_avx2(std::span<const double> coeffs, std::span<const double> ts,
                 std::span<double> out) {
  if (detected_isa() != Isa::Avx2 || coeffs.empty()) {
    horner_scalar(coeffs, ts, out);
    return;
  }
  horner_avx2_impl(coeffs.data(), coeffs.size(), ts.data(), out.data(),
                   ts.size());
}

#else

void horner_avx2(std::span<const double> coeffs, std::span<const double> ts,
                 std::span<double> out) {
  horner_scalar(coeffs, ts, out);
}

#endif

}  // namespace congestion::kernels
