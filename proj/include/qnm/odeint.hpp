#pragma once

#include <array>
#include <complex>
#include <memory>
#include <vector>

#include "qnm/jet.hpp"
#include "qnm/model.hpp"

namespace qnm {

using cdouble = std::complex<double>;

enum class Side { Left, Right };

// Value and slope of a solution, each a jet in (omega - omega0).
struct FieldJet {
  CJet f;
  CJet df;
};

// Coefficients of the exact transfer over a constant piece of length dx:
//   (f, f')(x + dx) = [[C, S], [-q S, C]] (f, f')(x),
// with C = cos(sqrt(q) dx) and S = sin(sqrt(q) dx)/sqrt(q). Both are entire in q,
// so no branch of sqrt(q) is ever selected. dx may be negative.
template <typename Scalar>
void transfer_coefficients(const Jet<Scalar>& q, double dx, Jet<Scalar>& C, Jet<Scalar>& S) {
  const int n = q.size();
  const double dx2 = dx * dx;
  if (std::abs(q[0]) * dx2 < 1.0) {
    constexpr int kTerms = 20;
    // inverse factorials 1/(2k)! and 1/(2k+1)!
    static const auto inv_fact = [] {
      std::array<double, 2 * kTerms + 2> t{};
      t[0] = 1.0;
      for (int i = 1; i < static_cast<int>(t.size()); ++i) t[i] = t[i - 1] / i;
      return t;
    }();
    const Jet<Scalar> u = q * Scalar(-dx2);
    C = Jet<Scalar>(n, Scalar(inv_fact[2 * kTerms]));
    S = Jet<Scalar>(n, Scalar(inv_fact[2 * kTerms + 1]));
    for (int k = kTerms - 1; k >= 0; --k) {
      C = C * u + Scalar(inv_fact[2 * k]);
      S = S * u + Scalar(inv_fact[2 * k + 1]);
    }
    S *= Scalar(dx);
  } else {
    const Jet<Scalar> k = sqrt(q);
    Jet<Scalar> s, c;
    sincos(k * Scalar(dx), s, c);
    C = c;
    S = s / k;
  }
}

// Scalar specialization of the same transfer, used by the Wronskian hot path.
inline void transfer_coefficients(cdouble q, double dx, cdouble& C, cdouble& S) {
  const cdouble z2 = q * (dx * dx);
  if (std::abs(z2) < 1e-8) {
    // |k dx| < 1e-4
    C = 1.0 - z2 / 2.0 + z2 * z2 / 24.0;
    S = dx * (1.0 - z2 / 6.0 + z2 * z2 / 120.0);
  } else {
    const cdouble k = std::sqrt(q);
    C = std::cos(k * dx);
    S = std::sin(k * dx) / k;
  }
}

// A solution of the spatial equation at (a jet of) omega. Stores the
// right-limit (f, f') at every node; values anywhere follow by exact transfer
// from the nearest node on the left. Beyond a the exterior solution continues
// (pure e^{i omega x} for the Right side); left of domain_left, an outgoing
// left boundary continues with the free exterior.
class ModeSolution {
 public:
  ModeSolution(std::shared_ptr<const std::vector<Piece>> pieces, double domain_left, CJet omega,
               Side side, std::vector<FieldJet> nodes);

  const CJet& omega() const { return omega_; }
  cdouble omega0() const { return omega_[0]; }
  int order() const { return omega_.size(); }
  Side side() const { return side_; }
  double domain_left() const { return domain_left_; }
  double a() const { return (*pieces_).back().x_lo; }
  const std::vector<Piece>& pieces() const { return *pieces_; }
  const std::vector<FieldJet>& nodes() const { return nodes_; }

  // (f, f') at x; at a node the right limit.
  FieldJet at(double x) const;
  // n-th Taylor coefficient of f and f' at x.
  cdouble value(double x, int n = 0) const { return at(x).f[n]; }
  cdouble slope(double x, int n = 0) const { return at(x).df[n]; }
  // Left limit of f' at x (differs from slope() only at nodes carrying a point term).
  FieldJet left_limit(double x) const;

 private:
  std::size_t piece_index(double x) const;

  std::shared_ptr<const std::vector<Piece>> pieces_;
  double domain_left_;
  CJet omega_;
  Side side_;
  std::vector<FieldJet> nodes_;
};

// Taylor coefficients f_n = (1/n!) d^n f / d omega^n about omega0, n < order().
using TaylorChain = ModeSolution;

// Caches the piece layout of one model; all methods are pure.
class Propagator {
 public:
  explicit Propagator(const SystemModel& model);

  const SystemModel& model() const { return model_; }
  const std::vector<Piece>& pieces() const { return *pieces_; }

  // f(domain_left) = 0, f'(domain_left) = 1 (Node) or f = e^{-i omega (x - domain_left)}
  // to the left of domain_left (Outgoing).
  ModeSolution left(const CJet& omega) const;
  // g = e^{i omega x} for x > a.
  ModeSolution right(const CJet& omega) const;

  // f and f' at a+ only (no node storage).
  FieldJet left_at_edge(const CJet& omega) const;

  // W = f'g - fg', evaluated at a+.
  cdouble wronskian(cdouble omega) const;
  CJet wronskian(const CJet& omega) const;

 private:
  SystemModel model_;
  std::shared_ptr<const std::vector<Piece>> pieces_;
};

ModeSolution propagate_left(const SystemModel& model, cdouble omega);
ModeSolution propagate_right(const SystemModel& model, cdouble omega);
TaylorChain propagate_taylor(const SystemModel& model, cdouble omega0, int order, Side side);

// Wronskian f'g - fg' of two solutions at x (right limits).
CJet wronskian_at(const ModeSolution& f, const ModeSolution& g, double x);

}  // namespace qnm
