#include "qnm/spectral.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qnm/errors.hpp"

namespace qnm {

namespace {

const cdouble I(0.0, 1.0);

std::string fmt(cdouble z) {
  std::ostringstream os;
  os.precision(10);
  os << z.real() << (z.imag() < 0 ? " - " : " + ") << std::abs(z.imag()) << "i";
  return os.str();
}

std::vector<std::function<cdouble(double)>> box_edges(const Box& b) {
  const cdouble p0(b.re_lo, b.im_lo), p1(b.re_hi, b.im_lo), p2(b.re_hi, b.im_hi), p3(b.re_lo, b.im_hi);
  auto seg = [](cdouble u, cdouble v) { return [u, v](double s) { return u + s * (v - u); }; };
  return {seg(p0, p1), seg(p1, p2), seg(p2, p3), seg(p3, p0)};
}

// Scale of W near omega: max |W_n| for n <= 3 (unit radius).
double local_scale(const std::vector<cdouble>& taylor) {
  double s = 0.0;
  for (const auto& c : taylor) s = std::max(s, std::abs(c));
  return s;
}

}  // namespace

cdouble wronskian(const SystemModel& model, cdouble omega) { return Propagator(model).wronskian(omega); }

std::vector<cdouble> wronskian_taylor(const Propagator& prop, cdouble omega0, int order) {
  if (order < 0 || order + 1 > kMaxJetSize) throw ValidationError("Taylor order out of range");
  const CJet w = prop.wronskian(CJet::variable(order + 1, omega0));
  std::vector<cdouble> out(static_cast<std::size_t>(order + 1));
  for (int n = 0; n <= order; ++n) out[static_cast<std::size_t>(n)] = w[n];
  return out;
}

std::vector<cdouble> wronskian_taylor(const SystemModel& model, cdouble omega0, int order) {
  return wronskian_taylor(Propagator(model), omega0, order);
}

int winding_number(const std::function<std::pair<cdouble, cdouble>(cdouble)>& w,
                   const std::vector<std::function<cdouble(double)>>& edges,
                   const ContourOptions& opt) {
  double total = 0.0;
  double max_abs = 0.0;
  // value and |W'/W|
  auto sample = [&](cdouble z) {
    const auto [v, dv] = w(z);
    const double m = std::abs(v);
    if (!std::isfinite(m) || !std::isfinite(std::abs(dv)))
      throw NumericalError("non-finite Wronskian on contour at " + fmt(z));
    max_abs = std::max(max_abs, m);
    if (m == 0.0 || m < opt.min_abs_fraction * max_abs)
      throw ContourTooCloseError("contour passes through a zero near " + fmt(z));
    return std::pair<cdouble, double>(v, std::abs(dv) / m);
  };
  for (const auto& edge : edges) {
    double s = 0.0;
    double h = opt.initial_step;
    auto prev = sample(edge(0.0));
    while (s < 1.0) {
      h = std::min(h, 1.0 - s);
      const double sn = (1.0 - s - h < 1e-15) ? 1.0 : s + h;
      const double dz = std::abs(edge(sn) - edge(s));
      // the logarithmic derivative bounds how far log W can move over the step
      if (dz * prev.second > opt.max_log_change) {
        h = 0.5 * opt.max_log_change / prev.second / std::max(dz / h, 1e-300);
        if (h < opt.min_step) throw ContourTooCloseError("contour too close to a zero near " + fmt(edge(s)));
        continue;
      }
      const auto next = sample(edge(sn));
      const double dphi = std::arg(next.first / prev.first);
      if (std::abs(dphi) < 0.5 * std::numbers::pi && dz * next.second <= opt.max_log_change) {
        total += dphi;
        prev = next;
        s = sn;
        h *= 1.5;
      } else {
        h *= 0.5;
        if (h < opt.min_step) throw ContourTooCloseError("contour too close to a zero near " + fmt(edge(s)));
      }
    }
  }
  return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

namespace {

std::function<std::pair<cdouble, cdouble>(cdouble)> wronskian_with_slope(const Propagator& prop) {
  return [&prop](cdouble z) {
    const CJet j = prop.wronskian(CJet::variable(2, z));
    return std::pair<cdouble, cdouble>(j[0], j[1]);
  };
}

}  // namespace

int count_zeros(const Propagator& prop, const Box& box, const ContourOptions& opt) {
  if (!(box.width() > 0.0 && box.height() > 0.0)) throw ValidationError("empty search box");
  return winding_number(wronskian_with_slope(prop), box_edges(box), opt);
}

int count_zeros(const SystemModel& model, const Box& box, const ContourOptions& opt) {
  return count_zeros(Propagator(model), box, opt);
}

int winding_on_circle(const Propagator& prop, cdouble center, double radius, const ContourOptions& opt) {
  if (!(radius > 0.0)) throw ValidationError("circle radius must be positive");
  std::vector<std::function<cdouble(double)>> edges;
  for (int q = 0; q < 4; ++q) {
    edges.push_back([=](double s) {
      const double t = 0.5 * std::numbers::pi * (q + s);
      return center + radius * cdouble(std::cos(t), std::sin(t));
    });
  }
  return winding_number(wronskian_with_slope(prop), edges, opt);
}

SpectralZero refine_zero(const Propagator& prop, cdouble seed, const RefineOptions& opt) {
  cdouble omega = seed;
  double last_step = std::numeric_limits<double>::infinity();
  bool converged = false;
  for (int it = 0; it < opt.max_iterations; ++it) {
    const auto t = wronskian_taylor(prop, omega, 2);
    const cdouble w0 = t[0], w1 = t[1], w2 = 2.0 * t[2];
    if (w0 == 0.0) {
      converged = true;
      break;
    }
    const cdouble denom = w1 * w1 - w0 * w2;
    if (denom == 0.0) throw NumericalError("Newton iteration stalled near " + fmt(omega));
    const cdouble step = -w0 * w1 / denom;
    const double size = std::abs(step);
    if (!std::isfinite(size)) throw NumericalError("Newton iteration diverged from " + fmt(seed));
    const double scale = std::max(1.0, std::abs(omega));
    if (size <= 1e-15 * scale || (size < 1e-6 * scale && size >= last_step)) {
      if (size < last_step) omega += step;
      converged = true;
      break;
    }
    omega += step;
    last_step = size;
    if (std::abs(omega - seed) > opt.max_distance)
      throw NumericalError("Newton iteration left the trust region around " + fmt(seed));
  }
  if (!converged) throw NumericalError("Newton iteration did not converge from " + fmt(seed));

  const double radius = opt.circle_radius > 0.0 ? opt.circle_radius : 1e-3 * std::max(1.0, std::abs(omega));
  const int m = winding_on_circle(prop, omega, radius);
  if (m < 1) throw NumericalError("no zero enclosed after convergence at " + fmt(omega));
  if (m + 1 > kMaxJetSize) throw NumericalError("multiplicity too large at " + fmt(omega));

  // For a multiple zero, W^{(M-1)} has a simple zero there; accept the polished
  // point only if it does not worsen the residual.
  auto taylor = wronskian_taylor(prop, omega, std::max(3, m));
  if (m > 1) {
    cdouble z = omega;
    for (int it = 0; it < 20; ++it) {
      const auto t = wronskian_taylor(prop, z, m);
      const cdouble d = -t[static_cast<std::size_t>(m - 1)] / (double(m) * t[static_cast<std::size_t>(m)]);
      z += d;
      if (std::abs(d) < 1e-16 * std::max(1.0, std::abs(z))) break;
    }
    if (std::abs(z - omega) < radius) {
      const auto tz = wronskian_taylor(prop, z, std::max(3, m));
      if (std::abs(tz[0]) <= std::abs(taylor[0]) + 1e-14 * local_scale(tz)) {
        omega = z;
        taylor = tz;
      }
    }
  }
  SpectralZero out;
  out.omega = omega;
  out.multiplicity = m;
  out.residual = std::abs(taylor[0]) / local_scale(taylor);
  out.w_lead = taylor[static_cast<std::size_t>(m)];
  if (out.residual > opt.residual_tolerance)
    throw NumericalError("residual too large at " + fmt(omega));
  return out;
}

SpectralZero refine_zero(const SystemModel& model, cdouble seed, const RefineOptions& opt) {
  return refine_zero(Propagator(model), seed, opt);
}

namespace {

struct Search {
  const Propagator& prop;
  const SpectrumOptions& opt;
  double refine_diameter;
  std::vector<SpectralZero> found;

  int count(const Box& b) { return count_zeros(prop, b, opt.contour); }

  void run(const Box& box, int n) {
    if (n == 0) return;
    if (n < 0) throw NumericalError("negative winding number in subdivision");
    if (n == 1 || box.diameter() < refine_diameter) {
      try {
        RefineOptions ro = opt.refine;
        ro.max_distance = std::min(ro.max_distance, box.diameter());
        if (ro.circle_radius <= 0.0)
          ro.circle_radius = std::min(1e-3 * std::max(1.0, std::abs(box.center())), 0.25 * box.diameter());
        SpectralZero z = refine_zero(prop, box.center(), ro);
        if (z.multiplicity == n && box.contains(z.omega)) {
          found.push_back(z);
          return;
        }
      } catch (const NumericalError&) {
      }
    }
    if (box.diameter() < opt.min_diameter)
      throw NumericalError("unresolved cluster of " + std::to_string(n) + " zeros near " + fmt(box.center()));
    static constexpr double kCuts[] = {0.4871, 0.5329, 0.4573, 0.5617, 0.4129};
    const bool vertical = box.width() >= box.height();
    for (double t : kCuts) {
      Box lo = box, hi = box;
      if (vertical) {
        lo.re_hi = hi.re_lo = box.re_lo + t * box.width();
      } else {
        lo.im_hi = hi.im_lo = box.im_lo + t * box.height();
      }
      int n_lo, n_hi;
      try {
        n_lo = count(lo);
        n_hi = count(hi);
      } catch (const ContourTooCloseError&) {
        continue;
      }
      if (n_lo + n_hi != n) continue;
      run(lo, n_lo);
      run(hi, n_hi);
      return;
    }
    throw NumericalError("could not subdivide box around " + fmt(box.center()));
  }
};

}  // namespace

SpectrumReport spectrum(const Propagator& prop, const Box& box, const SpectrumOptions& opt) {
  SpectrumReport rep;
  rep.search_box = box;
  rep.total_count = count_zeros(prop, box, opt.contour);
  Search s{prop, opt, opt.refine_diameter * box.diameter(), {}};
  s.run(box, rep.total_count);
  rep.zeros = std::move(s.found);
  std::sort(rep.zeros.begin(), rep.zeros.end(), [](const SpectralZero& x, const SpectralZero& y) {
    if (x.omega.real() != y.omega.real()) return x.omega.real() < y.omega.real();
    return x.omega.imag() < y.omega.imag();
  });
  return rep;
}

SpectrumReport spectrum(const SystemModel& model, const Box& box, const SpectrumOptions& opt) {
  require_valid(model);
  return spectrum(Propagator(model), box, opt);
}

DoublePoleResult find_double_pole_2d(const ModelFamily& family, double p_seed, cdouble omega_seed,
                                     const DoublePoleOptions& opt) {
  double p = p_seed;
  cdouble omega = omega_seed;
  auto eval = [&](double pp, cdouble w, int order) {
    return wronskian_taylor(Propagator(family(pp)), w, order);
  };
  DoublePoleResult res;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    const auto t = eval(p, omega, 2);
    const double hp = opt.parameter_step * std::max(1.0, std::abs(p));
    const auto tp = eval(p + hp, omega, 1);
    const auto tm = eval(p - hp, omega, 1);
    const cdouble dw0 = (tp[0] - tm[0]) / (2.0 * hp);
    const cdouble dw1 = (tp[1] - tm[1]) / (2.0 * hp);
    // unknowns (p, Re omega, Im omega); residuals Re/Im of W and W'
    Eigen::Matrix<double, 4, 3> J;
    const cdouble a = t[1], b = 2.0 * t[2];
    J << dw0.real(), a.real(), (I * a).real(),
         dw0.imag(), a.imag(), (I * a).imag(),
         dw1.real(), b.real(), (I * b).real(),
         dw1.imag(), b.imag(), (I * b).imag();
    Eigen::Vector4d r(t[0].real(), t[0].imag(), t[1].real(), t[1].imag());
    const Eigen::Vector3d d = J.colPivHouseholderQr().solve(-r);
    if (!d.allFinite()) throw NumericalError("double-pole Newton produced a non-finite step");
    p += d(0);
    omega += cdouble(d(1), d(2));
    res.iterations = it;
    const double size = std::max(std::abs(d(0)) / std::max(1.0, std::abs(p)),
                                 std::abs(cdouble(d(1), d(2))) / std::max(1.0, std::abs(omega)));
    if (size < opt.tolerance) break;
    if (it == opt.max_iterations) {
      const auto tf = eval(p, omega, 2);
      const double resid = std::max(std::abs(tf[0]), std::abs(tf[1])) / std::abs(tf[2]);
      if (resid > 1e-8) throw NumericalError("double-pole Newton did not converge");
    }
  }
  const auto t = eval(p, omega, 2);
  res.parameter = p;
  res.omega = omega;
  res.residual = std::max(std::abs(t[0]), std::abs(t[1])) / std::abs(t[2]);
  return res;
}

}  // namespace qnm
