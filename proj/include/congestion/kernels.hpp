#pragma once

// Batched polynomial evaluation used for dense sampling of arc costs and their
// derivatives. A scalar reference kernel and an AVX2/FMA kernel are provided;
// `horner` picks one at runtime. Both use fused multiply-add in the same
// order, so their outputs are bitwise identical.

#include <span>
#include <string_view>

namespace congestion::kernels {

enum class Isa { Scalar, Avx2 };

// Best instruction set usable on this CPU (cached after the first call).
Isa detected_isa();
std::string_view isa_name(Isa isa);

// out[i] = sum_k coeffs[k] * ts[i]^k  (ascending coefficients).
// `out` must have the same size as `ts`.
void horner_scalar(std::span<const double> coeffs, std::span<const double> ts,
                   std::span<double> out);

// Available only when detected_isa() == Isa::Avx2; otherwise forwards to the
// scalar kernel.
void horner_avx2(std::span<const double> coeffs, std::span<const double> ts,
                 std::span<double> out);

void horner(std::span<const double> coeffs, std::span<const double> ts,
            std::span<double> out, Isa isa);

inline void horner(std::span<const double> coeffs, std::span<const double> ts,
                   std::span<double> out) {
  horner(coeffs, ts, out, detected_isa());
}

}  // namespace congestion::kernels
