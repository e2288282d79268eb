#pragma once

#include <array>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace qnm {

// Gauss-Legendre rule with N nodes on [-1, 1].
template <int N>
struct GaussLegendre {
  std::array<double, N> x{};
  std::array<double, N> w{};

  GaussLegendre() {
    for (int i = 0; i < (N + 1) / 2; ++i) {
      double z = std::cos(std::numbers::pi * (i + 0.75) / (N + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = z;
        for (int k = 2; k <= N; ++k) {
          const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = N * (z * p1 - p0) / (z * z - 1.0);
        const double dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      x[i] = -z;
      x[N - 1 - i] = z;
      w[i] = w[N - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
  }

  template <typename F>
  auto apply(F&& f, double lo, double hi) const {
    const double c = 0.5 * (lo + hi), r = 0.5 * (hi - lo);
    auto sum = f(c + r * x[0]) * w[0];
    for (int i = 1; i < N; ++i) sum += f(c + r * x[i]) * w[i];
    return sum * r;
  }
};

inline const GaussLegendre<16>& gauss16() {
  static const GaussLegendre<16> rule;
  return rule;
}

struct QuadratureOptions {
  double abs_tol = 1e-14;
  double rel_tol = 1e-13;
  int max_depth = 40;
};

namespace detail {
template <typename F, typename T>
T adaptive_step(F& f, double lo, double hi, T whole, const QuadratureOptions& opt, int depth,
                double tol, double floor) {
  const double mid = 0.5 * (lo + hi);
  const T left = gauss16().apply(f, lo, mid);
  const T right = gauss16().apply(f, mid, hi);
  const T both = left + right;
  using std::abs;
  if (depth >= opt.max_depth || abs(both - whole) <= tol) return both;
  const double sub = std::max(0.5 * tol, floor);
  return adaptive_step(f, lo, mid, left, opt, depth + 1, sub, floor) +
         adaptive_step(f, mid, hi, right, opt, depth + 1, sub, floor);
}
}  // namespace detail

// Adaptive 16-point Gauss-Legendre on [lo, hi]; f must be smooth inside.
template <typename F>
auto integrate(F&& f, double lo, double hi, const QuadratureOptions& opt = {}) {
  auto whole = gauss16().apply(f, lo, hi);
  using std::abs;
  // rounding floor from the integral of |f|
  const double mass = gauss16().apply([&](double x) { return static_cast<double>(abs(f(x))); }, lo, hi);
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * abs(mass);
  const double tol = std::max({opt.abs_tol, opt.rel_tol * abs(whole), floor});
  return detail::adaptive_step(f, lo, hi, whole, opt, 0, tol, floor);
}

// Sum of integrals over consecutive intervals of `breaks` (sorted).
template <typename F>
auto integrate_pieces(F&& f, const std::vector<double>& breaks, const QuadratureOptions& opt = {}) {
  decltype(integrate(f, 0.0, 1.0, opt)) sum{};
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
    if (breaks[i + 1] > breaks[i]) sum += integrate(f, breaks[i], breaks[i + 1], opt);
  return sum;
}

}  // namespace qnm
