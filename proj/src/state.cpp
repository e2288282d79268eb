#include "qnm/state.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "qnm/errors.hpp"
#include "qnm/quadrature.hpp"

namespace qnm {

namespace {

const cdouble I(0.0, 1.0);

std::vector<PointWeight> merged(std::vector<PointWeight> pts) {
  std::sort(pts.begin(), pts.end(), [](const PointWeight& a, const PointWeight& b) { return a.x < b.x; });
  std::vector<PointWeight> out;
  for (const auto& p : pts) {
    if (!out.empty() && out.back().x == p.x)
      out.back().w += p.w;
    else
      out.push_back(p);
  }
  return out;
}

// sum over point weights of `a` times the density of `b`, restricted to [lo, hi]
template <typename Op>
cdouble point_pairing(const Field& a, const Field& b, double lo, double hi, Op op) {
  cdouble s = 0.0;
  for (const auto& p : a.points()) {
    if (p.x < lo || p.x > hi) continue;
    for (const auto& q : b.points())
      if (q.x == p.x) throw ValidationError("product of two point terms at the same location is undefined");
    s += op(p.w, b(p.x));
  }
  return s;
}

}  // namespace

TwoComponentState linear_combination(const std::vector<TwoComponentState>& states,
                                     const std::vector<cdouble>& coeffs) {
  if (states.size() != coeffs.size()) throw ValidationError("linear combination size mismatch");
  auto shared = std::make_shared<std::vector<TwoComponentState>>(states);
  auto c = std::make_shared<std::vector<cdouble>>(coeffs);
  std::vector<PointWeight> p_phi, p_hat;
  for (std::size_t k = 0; k < states.size(); ++k) {
    for (const auto& p : states[k].phi.points()) p_phi.push_back({p.x, coeffs[k] * p.w});
    for (const auto& p : states[k].phat.points()) p_hat.push_back({p.x, coeffs[k] * p.w});
  }
  TwoComponentState out;
  out.phi = Field(
      [shared, c](double x) {
        cdouble s = 0.0;
        for (std::size_t k = 0; k < shared->size(); ++k)
          if ((*c)[k] != 0.0) s += (*c)[k] * (*shared)[k].phi(x);
        return s;
      },
      merged(std::move(p_phi)));
  out.phat = Field(
      [shared, c](double x) {
        cdouble s = 0.0;
        for (std::size_t k = 0; k < shared->size(); ++k)
          if ((*c)[k] != 0.0) s += (*c)[k] * (*shared)[k].phat(x);
        return s;
      },
      merged(std::move(p_hat)));
  return out;
}

TwoComponentState operator*(cdouble c, const TwoComponentState& s) { return linear_combination({s}, {c}); }

TwoComponentState operator+(const TwoComponentState& a, const TwoComponentState& b) {
  return linear_combination({a, b}, {1.0, 1.0});
}

TwoComponentState flip(const TwoComponentState& s) {
  auto conj_field = [](const Field& f) {
    std::vector<PointWeight> pts;
    for (const auto& p : f.points()) pts.push_back({p.x, -I * std::conj(p.w)});
    return Field([f](double x) { return -I * std::conj(f(x)); }, std::move(pts));
  };
  return {conj_field(s.phat), conj_field(s.phi)};
}

std::vector<double> cavity_breaks(const SystemModel& model, double x_hi) {
  std::vector<double> b{model.domain_left, x_hi};
  for (const auto& s : model.segments) {
    if (s.x_lo > model.domain_left && s.x_lo < x_hi) b.push_back(s.x_lo);
  }
  for (const auto& d : model.deltas)
    if (d.x > model.domain_left && d.x < x_hi) b.push_back(d.x);
  if (model.a > model.domain_left && model.a < x_hi) b.push_back(model.a);
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

cdouble bilinear(const SystemModel& model, const TwoComponentState& psi, const TwoComponentState& chi) {
  const double lo = model.domain_left, hi = model.a;
  const auto breaks = cavity_breaks(model, hi);
  cdouble s = integrate_pieces([&](double x) { return psi.phi(x) * chi.phat(x) + psi.phat(x) * chi.phi(x); },
                               breaks);
  auto mul = [](cdouble w, cdouble v) { return w * v; };
  s += point_pairing(chi.phat, psi.phi, lo, hi, mul);
  s += point_pairing(psi.phat, chi.phi, lo, hi, mul);
  s += point_pairing(chi.phi, psi.phat, lo, hi, mul);
  s += point_pairing(psi.phi, chi.phat, lo, hi, mul);
  s += psi.phi(hi) * chi.phi(hi);
  if (model.boundary_left == LeftBoundary::Outgoing) s += psi.phi(lo) * chi.phi(lo);
  return I * s;
}

cdouble cavity_inner(const SystemModel& model, const TwoComponentState& zeta, const TwoComponentState& chi) {
  const double lo = model.domain_left, hi = model.a;
  const auto breaks = cavity_breaks(model, hi);
  cdouble s = integrate_pieces(
      [&](double x) { return std::conj(zeta.phi(x)) * chi.phi(x) + std::conj(zeta.phat(x)) * chi.phat(x); },
      breaks);
  auto cw = [](cdouble w, cdouble v) { return std::conj(w) * v; };
  auto wc = [](cdouble w, cdouble v) { return std::conj(v) * w; };
  s += point_pairing(zeta.phi, chi.phi, lo, hi, cw);
  s += point_pairing(zeta.phat, chi.phat, lo, hi, cw);
  s += point_pairing(chi.phi, zeta.phi, lo, hi, wc);
  s += point_pairing(chi.phat, zeta.phat, lo, hi, wc);
  s += std::conj(zeta.phat(hi)) * chi.phi(hi);
  if (model.boundary_left == LeftBoundary::Outgoing) s += std::conj(zeta.phat(lo)) * chi.phi(lo);
  return s;
}

cdouble standard_inner(const SystemModel& model, const TwoComponentState& zeta,
                       const TwoComponentState& chi, double x_hi) {
  const double lo = model.domain_left;
  const auto breaks = cavity_breaks(model, x_hi);
  cdouble s = integrate_pieces(
      [&](double x) { return std::conj(zeta.phi(x)) * chi.phi(x) + std::conj(zeta.phat(x)) * chi.phat(x); },
      breaks);
  auto cw = [](cdouble w, cdouble v) { return std::conj(w) * v; };
  auto wc = [](cdouble w, cdouble v) { return std::conj(v) * w; };
  s += point_pairing(zeta.phi, chi.phi, lo, x_hi, cw);
  s += point_pairing(zeta.phat, chi.phat, lo, x_hi, cw);
  s += point_pairing(chi.phi, zeta.phi, lo, x_hi, wc);
  s += point_pairing(chi.phat, zeta.phat, lo, x_hi, wc);
  return s;
}

}  // namespace qnm
