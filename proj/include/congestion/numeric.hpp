#pragma once

// Small numerical building blocks shared by the solvers: monotone root
// bracketing, golden-section minimization and a deterministic parallel map.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <utility>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "congestion/errors.hpp"

namespace congestion::numeric {

inline constexpr double kDefaultRootTolerance = 1e-12;

// Root of a non-increasing function on [lo, hi] with f(lo) >= 0 >= f(hi).
// Midpoint bisection until the bracket is narrower than `tol`.
template <class F>
double root_of_decreasing(F&& f, double lo, double hi,
                          double tol = kDefaultRootTolerance) {
  const double f_lo = f(lo);
  if (f_lo <= 0.0) {
    if (f_lo == 0.0) return lo;
    throw BracketingError("root_of_decreasing: f(lo) < 0, value below image");
  }
  const double f_hi = f(hi);
  if (f_hi >= 0.0) {
    if (f_hi == 0.0) return hi;
    throw BracketingError("root_of_decreasing: f(hi) > 0, value above image");
  }
  auto width_ok = [tol](double a, double b) { return std::abs(b - a) <= tol; };
  std::uintmax_t max_iter = 400;
  auto bracket = boost::math::tools::bisect(std::forward<F>(f), lo, hi,
                                            width_ok, max_iter);
  return 0.5 * (bracket.first + bracket.second);
}

struct Minimum {
  double argmin;
  double value;
};

// Golden-section search on [a, b]; assumes unimodality on the interval and
// keeps the best evaluated point, including the endpoints.
template <class F>
Minimum golden_section(F&& f, double a, double b, double tol) {
  constexpr double kInvPhi = 0.6180339887498949;
  Minimum best{a, f(a)};
  const double fb = f(b);
  if (fb < best.value) best = {b, fb};
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
    if (fc < best.value) best = {c, fc};
    if (fd < best.value) best = {d, fd};
  }
  return best;
}

// Evaluates fn(i) for i in [0, n) and stores the results by index. Work is
// split in contiguous chunks; output order never depends on scheduling.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n, Fn&& fn) {
  std::vector<T> out(n);
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(
                                   std::thread::hardware_concurrency(), n / 64));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        const std::size_t end = std::min(n, (w + 1) * chunk);
        for (std::size_t i = w * chunk; i < end; ++i) out[i] = fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

// Uniform grid of `count` points spanning [lo, hi] (count >= 2).
inline std::vector<double> uniform_grid(double lo, double hi, std::size_t count) {
  std::vector<double> g(count);
  for (std::size_t i = 0; i < count; ++i) {
    g[i] = (i + 1 == count) ? hi
                            : lo + (hi - lo) * static_cast<double>(i) /
                                       static_cast<double>(count - 1);
  }
  return g;
}

}  // namespace congestion::numeric
