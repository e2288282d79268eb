#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "qnm/model.hpp"

namespace qnm {

using cdouble = std::complex<double>;

// Weight of a delta-supported part of a field component.
struct PointWeight {
  double x = 0.0;
  cdouble w;
};

// One component of a state: a piecewise-smooth density (smooth between model
// nodes) plus optional delta-supported weights.
class Field {
 public:
  using Density = std::function<cdouble(double)>;

  Field() = default;
  explicit Field(Density density, std::vector<PointWeight> points = {})
      : density_(std::move(density)), points_(std::move(points)) {}

  cdouble operator()(double x) const { return density_ ? density_(x) : cdouble(0.0); }
  const std::vector<PointWeight>& points() const { return points_; }
  bool has_density() const { return static_cast<bool>(density_); }

 private:
  Density density_;
  std::vector<PointWeight> points_;
};

// Field/momentum pair (phi, phat).
struct TwoComponentState {
  Field phi;
  Field phat;
};

TwoComponentState linear_combination(const std::vector<TwoComponentState>& states,
                                     const std::vector<cdouble>& coeffs);
TwoComponentState operator*(cdouble c, const TwoComponentState& s);
TwoComponentState operator+(const TwoComponentState& a, const TwoComponentState& b);

// -i (conj phat, conj phi)
TwoComponentState flip(const TwoComponentState& s);

// Node positions in [domain_left, a] used to split integrals.
std::vector<double> cavity_breaks(const SystemModel& model, double x_hi);

// i [ int (psi chi^ + psi^ chi) + psi(a) chi(a) ], plus psi(l) chi(l) for an
// outgoing left boundary. No complex conjugation.
cdouble bilinear(const SystemModel& model, const TwoComponentState& psi, const TwoComponentState& chi);

// Inner product whose flip relation reproduces the bilinear map on outgoing
// states: int (conj(z) chi + conj(z^) chi^) + conj(z^(a)) chi(a).
cdouble cavity_inner(const SystemModel& model, const TwoComponentState& zeta, const TwoComponentState& chi);

// Plain L2 pairing of both components over [domain_left, x_hi].
cdouble standard_inner(const SystemModel& model, const TwoComponentState& zeta,
                       const TwoComponentState& chi, double x_hi);

}  // namespace qnm
