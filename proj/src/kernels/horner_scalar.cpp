#include <cmath>
#include <cstddef>

#include "congestion/kernels.hpp"

namespace congestion::kernels {

void horner_scalar(std::span<const double> coeffs, std::span<const double> ts,
                   std::span<double> out) {
  const std::size_t degree_plus_one = coeffs.size();
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (degree_plus_one == 0) {
      out[i] = 0.0;
      continue;
    }
    double acc = coeffs[degree_plus_one - 1];
    for (std::size_t k = degree_plus_one - 1; k-- > 0;) {
      acc = std::fma(acc, ts[i], coeffs[k]);
    }
    out[i] = acc;
  }
}

}  // namespace congestion::kernels
