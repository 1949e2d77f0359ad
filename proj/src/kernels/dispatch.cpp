#include "congestion/kernels.hpp"

namespace congestion::kernels {

namespace {

Isa probe() {
#if defined(__x86_64__) || defined(_M_X64)
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
    return Isa::Avx2;
  }
#endif
  return Isa::Scalar;
}

}  // namespace

Isa detected_isa() {
  static const Isa isa = probe();
  return isa;
}

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Avx2:
      return "avx2";
    case Isa::Scalar:
      break;
  }
  return "scalar";
}

void horner(std::span<const double> coeffs, std::span<const double> ts,
            std::span<double> out, Isa isa) {
  if (isa == Isa::Avx2) {
    horner_avx2(coeffs, ts, out);
  } else {
    horner_scalar(coeffs, ts, out);
  }
}

}  // namespace congestion::kernels
