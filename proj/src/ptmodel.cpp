#include "qnm/ptmodel.hpp"

#include <cmath>

#include "qnm/errors.hpp"
#include "qnm/spectral.hpp"

namespace qnm {

namespace {
const cdouble I(0.0, 1.0);
}

std::vector<std::pair<cdouble, cdouble>> pt_exact_frequencies(double V0, int j_max) {
  if (j_max < 0) throw ValidationError("j_max must be non-negative");
  std::vector<std::pair<cdouble, cdouble>> out;
  for (int j = 0; j <= j_max; ++j) {
    const double h = j + 0.5;
    if (V0 >= 0.25) {
      const double r = std::sqrt(V0 - 0.25);
      out.emplace_back(cdouble(r, -h), cdouble(-r, -h));
    } else {
      const double r = std::sqrt(0.25 - V0);
      out.emplace_back(-I * (h + r), -I * (h - r));
    }
  }
  return out;
}

SystemModel build_truncated_pt(double V0, double L, int segments) {
  if (!(L > 0.0) || !std::isfinite(L)) throw ValidationError("truncation half-width L must be positive");
  if (segments < 100) throw ValidationError("truncated potential needs at least 100 segments");
  if (!std::isfinite(V0)) throw ValidationError("V0 must be finite");
  SystemModel m;
  m.kind = Kind::KleinGordon;
  m.boundary_left = LeftBoundary::Outgoing;
  m.domain_left = -L;
  m.a = L;
  const double h = 2.0 * L / segments;
  for (int i = 0; i < segments; ++i) {
    const double lo = -L + i * h, hi = i + 1 == segments ? L : -L + (i + 1) * h;
    const double c = std::cosh(0.5 * (lo + hi));
    m.segments.push_back({lo, hi, V0 / (c * c)});
  }
  require_valid(m);
  return m;
}

PTCriticalPoint pt_critical_point(double L, const PTCriticalOptions& opt) {
  if (!(L > 0.0) || !std::isfinite(L)) throw ValidationError("truncation half-width L must be positive");
  if (opt.initial_segments < 100 || opt.max_doublings < 1)
    throw ValidationError("critical-point search needs >= 100 segments and at least one doubling");
  PTCriticalPoint r;
  double p_seed = 0.25;
  cdouble w_seed = -0.5 * I;
  double last_extrapolated = 0.0;
  cdouble last_omega;
  int n = opt.initial_segments;
  for (int k = 0; k <= opt.max_doublings; ++k, n *= 2) {
    const ModelFamily family = [L, n](double V0) { return build_truncated_pt(V0, L, n); };
    const DoublePoleResult d = find_double_pole_2d(family, p_seed, w_seed);
    r.raw_V0.push_back(d.parameter);
    r.raw_omega.push_back(d.omega);
    r.segments = n;
    p_seed = d.parameter;
    w_seed = d.omega;
    if (k == 0) continue;
    // midpoint sampling converges as N^-2
    const double ex = (4.0 * r.raw_V0[k] - r.raw_V0[k - 1]) / 3.0;
    const cdouble ew = (4.0 * r.raw_omega[k] - r.raw_omega[k - 1]) / 3.0;
    if (k >= 2) {
      r.change = std::abs(ex - last_extrapolated);
      if (r.change < opt.tolerance) {
        r.V0 = ex;
        r.omega = ew;
        return r;
      }
    }
    last_extrapolated = ex;
    last_omega = ew;
  }
  throw NumericalError("critical point did not settle under segment doubling");
}

}  // namespace qnm
