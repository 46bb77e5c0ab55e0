#pragma once

// Real roots of real-coefficient cubics.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>

namespace plc {

/// Up to three real roots in ascending order.
struct RealRoots {
  std::array<double, 3> values{};
  std::size_t count = 0;

  [[nodiscard]] const double* begin() const { return values.data(); }
  [[nodiscard]] const double* end() const { return values.data() + count; }
  void push(double r) { values[count++] = r; }
};

namespace detail {

inline double eval_monic(double b, double c, double d, double x) { return ((x + b) * x + c) * x + d; }

/// Newton refinement on the monic cubic; keeps the iterate only while the
/// residual improves.
inline double polish_monic(double b, double c, double d, double x) {
  double fx = eval_monic(b, c, d, x);
  for (int it = 0; it < 8 && fx != 0.0; ++it) {
    const double dfx = (3.0 * x + 2.0 * b) * x + c;
    if (dfx == 0.0 || !std::isfinite(dfx)) break;
    const double next = x - fx / dfx;
    const double fnext = eval_monic(b, c, d, next);
    if (!(std::abs(fnext) < std::abs(fx))) break;
    x = next;
    fx = fnext;
  }
  return x;
}

/// One real root of x^3 + b x^2 + c x + d with the largest magnitude among
/// the real roots, from the depressed form t^3 + p t + q (x = t - b/3).
inline double dominant_real_root(double b, double c, double d) {
  const double shift = b / 3.0;
  const double p = c - b * shift;
  const double q = d - c * shift + 2.0 * shift * shift * shift;
  const double half_q = q / 2.0;
  const double third_p = p / 3.0;
  const double disc = half_q * half_q + third_p * third_p * third_p;
  if (disc > 0.0) {
    // Single real root; choose the cube-root branch that avoids cancellation.
    const double s = std::sqrt(disc);
    const double u = std::cbrt(-half_q + (half_q > 0.0 ? -s : s));
    const double t = (u != 0.0) ? u - third_p / u : 0.0;
    return t - shift;
  }
  if (third_p == 0.0) return -shift;
  // Three real roots (possibly repeated): trigonometric form.
  const double m = 2.0 * std::sqrt(-third_p);
  const double arg = std::clamp(3.0 * q / (p * m), -1.0, 1.0);
  const double theta = std::acos(arg) / 3.0;
  double best = 0.0;
  bool have = false;
  for (int k = 0; k < 3; ++k) {
    const double x = m * std::cos(theta - 2.0 * std::numbers::pi * k / 3.0) - shift;
    if (!have || std::abs(x) > std::abs(best)) {
      best = x;
      have = true;
    }
  }
  return best;
}

}  // namespace detail

/// All real roots of a x^3 + b x^2 + c x + d = 0 with a != 0.
///
/// The dominant real root comes from the closed form; the remaining two are
/// obtained by deflation (product-of-roots form for the constant term) and a
/// cancellation-free quadratic formula. Every root gets a Newton polish.
inline RealRoots solve_cubic(double a, double b, double c, double d) {
  RealRoots out;
  if (a == 0.0 || !std::isfinite(a)) return out;
  const double nb = b / a, nc = c / a, nd = d / a;
  const double r1 = detail::polish_monic(nb, nc, nd, detail::dominant_real_root(nb, nc, nd));
  out.push(r1);

  // x^2 + e1 x + e0 carries the other two roots.
  const double e1 = nb + r1;
  const double e0 = (r1 != 0.0) ? -nd / r1 : nc + e1 * r1;
  const double disc = e1 * e1 - 4.0 * e0;
  if (disc >= 0.0) {
    const double sq = std::sqrt(disc);
    const double qq = -0.5 * (e1 + (e1 >= 0.0 ? sq : -sq));
    if (qq != 0.0) {
      out.push(detail::polish_monic(nb, nc, nd, qq));
      out.push(detail::polish_monic(nb, nc, nd, e0 / qq));
    } else {
      out.push(0.0);
      out.push(0.0);
    }
  }
  std::sort(out.values.begin(), out.values.begin() + static_cast<std::ptrdiff_t>(out.count));
  return out;
}

}  // namespace plc
