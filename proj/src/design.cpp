#include "qnm/design.hpp"

#include <algorithm>
#include <cmath>

#include "qnm/errors.hpp"
#include "qnm/parallel.hpp"
#include "qnm/quadrature.hpp"
#include "qnm/spectral.hpp"

namespace qnm {

namespace {

constexpr int kPanels = 32;
const QuadratureOptions kQuad{1e-13, 1e-12, 40};

std::vector<double> panel_breaks() {
  std::vector<double> b(kPanels + 1);
  for (int i = 0; i <= kPanels; ++i) b[static_cast<std::size_t>(i)] = double(i) / kPanels;
  return b;
}

// G(x) = int_0^x g, from panel sums plus one partial panel
class Cumulative {
 public:
  explicit Cumulative(std::function<double(double)> g) : g_(std::move(g)), breaks_(panel_breaks()) {
    sums_.assign(breaks_.size(), 0.0);
    for (std::size_t i = 1; i < breaks_.size(); ++i)
      sums_[i] = sums_[i - 1] + integrate(g_, breaks_[i - 1], breaks_[i], kQuad);
  }
  double operator()(double x) const {
    const auto i = std::min<std::size_t>(static_cast<std::size_t>(x * kPanels), kPanels - 1);
    return sums_[i] + integrate(g_, breaks_[i], x, kQuad);
  }
  double total() const { return sums_.back(); }

 private:
  std::function<double(double)> g_;
  std::vector<double> breaks_;
  std::vector<double> sums_;
};

double outer(const std::function<double(double)>& h) { return integrate_pieces(h, panel_breaks(), kQuad); }

}  // namespace

Profile sinh_profile(double K) {
  if (!(K > 0.0)) throw ValidationError("sinh profile needs K > 0");
  return {"sinh", [K](double x) { return std::sinh(K * x); }, [K](double x) { return K * std::cosh(K * x); },
          [K](double x) { return K * K * std::sinh(K * x); }};
}

Profile linear_profile() {
  return {"linear", [](double x) { return x; }, [](double) { return 1.0; }, [](double) { return 0.0; }};
}

Profile power_profile(double alpha, int n) {
  if (n < 2) throw ValidationError("power profile needs n >= 2");
  return {"power", [alpha, n](double x) { return x + alpha * std::pow(x, n); },
          [alpha, n](double x) { return 1.0 + alpha * n * std::pow(x, n - 1); },
          [alpha, n](double x) { return alpha * n * (n - 1) * std::pow(x, n - 2); }};
}

Profile scaled_profile(const Profile& p, double c) {
  auto f = p.f, df = p.df, d2f = p.d2f;
  return {p.name, [f, c](double x) { return c * f(x); }, [df, c](double x) { return c * df(x); },
          [d2f, c](double x) { return c * d2f(x); }};
}

bool profile_admissible_shape(const Profile& p, std::string* why) {
  auto fail = [why](const char* msg) {
    if (why) *why = msg;
    return false;
  };
  if (std::abs(p.f(0.0)) > 1e-14) return fail("profile must vanish at x = 0");
  if (!(p.df(0.0) > 0.0)) return fail("profile must start with positive slope");
  for (int i = 1; i <= 1000; ++i)
    if (!(p.d2f(i / 1000.0) > 0.0)) return fail("profile must be strictly convex on (0, 1]");
  return true;
}

double gamma_from_profile(const Profile& p) {
  const double f1 = p.f(1.0);
  if (f1 == 0.0 || !std::isfinite(f1)) throw ValidationError("degenerate profile: f(1) = 0");
  const double s = outer([&](double x) { return p.df(x) * p.df(x); });
  return 2.0 * s / (f1 * f1);
}

double point_mass_from_profile(const Profile& p, double gamma) {
  return 1.0 / gamma - p.df(1.0) / (gamma * gamma * p.f(1.0));
}

SystemModel rho_from_profile(const Profile& p, double gamma, const ConstructOptions& opt) {
  std::string why;
  if (!profile_admissible_shape(p, &why)) throw ValidationError(why);
  if (!(gamma > 0.0)) throw ValidationError("gamma must be positive");
  if (opt.segments < 1) throw ValidationError("segment count must be positive");
  const double mu = point_mass_from_profile(p, gamma);
  if (mu < 0.0) throw ValidationError("inadmissible profile: the point mass at x = 1 would be negative");
  SystemModel m;
  m.kind = Kind::Wave;
  m.a = 1.0;
  const int N = opt.segments;
  for (int i = 0; i < N; ++i) {
    const double lo = double(i) / N, hi = double(i + 1) / N, mid = 0.5 * (lo + hi);
    const double rho = p.d2f(mid) / (gamma * gamma * p.f(mid));
    if (!m.segments.empty() &&
        std::abs(m.segments.back().value - rho) <= opt.merge_tolerance * std::abs(rho))
      m.segments.back().x_hi = hi;
    else
      m.segments.push_back({lo, hi, rho});
  }
  if (mu > 0.0) m.deltas.push_back({1.0, mu});
  require_valid(m);
  return m;
}

double w02_functional(const Profile& p) {
  const Cumulative P([&](double y) { return p.d2f(y) * p.f(y); });
  const double first = outer([&](double x) {
    const double v = P(x) / p.f(x);
    return v * v;
  });
  const double second = outer([&](double x) { return p.df(x) * p.df(x); });
  return 4.0 * first - second;
}

double w03_functional(const Profile& p) {
  const Cumulative P([&](double y) { return p.d2f(y) * p.f(y); });
  auto ratio = [&](double y) {
    const double f = p.f(y);
    return P(y) / (f * f);
  };
  const Cumulative R(ratio);
  const double total = R.total();
  const double first = outer([&](double x) {
    const double q = total - R(x);
    return p.d2f(x) * p.f(x) * q * q;
  });
  const double second = outer([&](double x) {
    const double v = P(x) / p.f(x);
    return v * v;
  });
  return 8.0 * first - 4.0 * second;
}

MultiplicityCheck verify_multiplicity(const Profile& p, double gamma, const ConstructOptions& opt) {
  const cdouble center(0.0, -gamma);
  ConstructOptions fine = opt;
  fine.segments = 2 * opt.segments;
  const Propagator coarse(rho_from_profile(p, gamma, opt));
  const auto t1 = wronskian_taylor(coarse, center, 3);
  const auto t2 = wronskian_taylor(Propagator(rho_from_profile(p, gamma, fine)), center, 3);
  MultiplicityCheck r;
  double spread = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double raw = std::abs(t1[k] / t1[3]);
    r.relative_raw.push_back(raw);
    const cdouble ex = (4.0 * t2[k] - t1[k]) / 3.0, ex3 = (4.0 * t2[3] - t1[3]) / 3.0;
    r.relative.push_back(std::abs(ex / ex3));
    spread = std::max(spread, std::pow(raw, 1.0 / (3 - k)));
  }
  r.radius = std::max(4.0 * spread, 1e-3 * gamma);
  r.winding = winding_on_circle(coarse, center, r.radius);
  return r;
}

std::vector<ThirdOrderRoot> third_order_search(int n, double alpha_lo, double alpha_hi, const SearchOptions& opt) {
  if (n <= 2) throw ValidationError("third-order search needs n > 2");
  if (!(alpha_hi > alpha_lo)) throw ValidationError("empty alpha range");
  if (opt.grid < 2) throw ValidationError("search grid needs at least two points");
  auto w02 = [n](double a) { return w02_functional(power_profile(a, n)); };

  std::vector<double> grid(static_cast<std::size_t>(opt.grid));
  for (int i = 0; i < opt.grid; ++i)
    grid[static_cast<std::size_t>(i)] = alpha_lo + (alpha_hi - alpha_lo) * i / (opt.grid - 1);
  const auto values = parallel_map(grid.size(), [&](std::size_t i) { return w02(grid[i]); });

  std::vector<std::pair<double, double>> brackets;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    if ((values[i] < 0.0) != (values[i + 1] < 0.0)) brackets.emplace_back(grid[i], grid[i + 1]);

  auto polish = [&](std::pair<double, double> br) {
    double a = br.first, b = br.second, fa = w02(a), fb = w02(b);
    // bisection down to a short bracket, then secant steps kept inside it
    while (b - a > 1e-4 * std::max(1.0, std::abs(a))) {
      const double m = 0.5 * (a + b), fm = w02(m);
      if ((fm < 0.0) == (fa < 0.0)) {
        a = m;
        fa = fm;
      } else {
        b = m;
        fb = fm;
      }
    }
    double x = a - fa * (b - a) / (fb - fa);
    for (int it = 0; it < 60 && b - a > opt.alpha_tolerance; ++it) {
      const double fx = w02(x);
      if (fx == 0.0) return x;
      if ((fx < 0.0) == (fa < 0.0)) {
        a = x;
        fa = fx;
      } else {
        b = x;
        fb = fx;
      }
      const double next = a - fa * (b - a) / (fb - fa);
      const double prev = x;
      x = (next > a && next < b) ? next : 0.5 * (a + b);
      if (std::abs(x - prev) <= opt.alpha_tolerance) break;
    }
    return x;
  };

  auto roots = parallel_map(brackets.size(), [&](std::size_t i) {
    ThirdOrderRoot r;
    r.alpha = polish(brackets[i]);
    const Profile prof = power_profile(r.alpha, n);
    r.w02 = w02_functional(prof);
    r.w03 = w03_functional(prof);
    r.gamma = gamma_from_profile(prof);
    r.mu = point_mass_from_profile(prof, r.gamma);
    r.admissible = r.mu >= 0.0;
    if (r.admissible) {
      r.model = rho_from_profile(prof, r.gamma, opt.construct);
      if (opt.verify) r.multiplicity = verify_multiplicity(prof, r.gamma, opt.construct);
    }
    return r;
  });
  return roots;
}

}  // namespace qnm
