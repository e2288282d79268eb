#include <cmath>
#include <complex>

#include "doctest.h"
#include "qnm/model.hpp"
#include "qnm/odeint.hpp"

using namespace qnm;

namespace {
const cdouble I(0.0, 1.0);
}

TEST_CASE("free half-line solution is sin(omega x)/omega and W is one") {
  const auto m = free_half_line();
  const Propagator p(m);
  for (cdouble w : {cdouble(1.3, -0.2), cdouble(-4.0, -1.5), cdouble(0.2, 0.7)}) {
    const auto f = p.left(CJet(1, w));
    for (double x : {0.0, 0.3, 0.99, 1.0, 1.7}) {
      CHECK(std::abs(f.value(x) - std::sin(w * x) / w) < 1e-13);
      CHECK(std::abs(f.slope(x) - std::cos(w * x)) < 1e-13);
    }
    CHECK(std::abs(p.wronskian(w) - 1.0) < 1e-13);
  }
}

TEST_CASE("right solution is the outgoing wave beyond a") {
  const auto m = uniform_slab(2.0);
  const Propagator p(m);
  const cdouble w(2.0, -0.3);
  const auto g = p.right(CJet(1, w));
  for (double x : {1.0, 1.5, 3.0}) {
    CHECK(std::abs(g.value(x) - std::exp(I * w * x)) < 1e-12);
    CHECK(std::abs(g.slope(x) - I * w * std::exp(I * w * x)) < 1e-12);
  }
}

TEST_CASE("double-pole model solution at -i gamma is sinh") {
  const double K = 1.0;
  const auto m = builtin_double_pole_model(K);
  const cdouble w(0.0, -double_pole_gamma(K));
  const auto f = propagate_left(m, w);
  for (double x : {0.1, 0.5, 0.9, 1.0}) CHECK(std::abs(f.value(x) - std::sinh(K * x) / K) < 1e-13);
  // the point mass at a makes f' jump
  const auto mu = m.deltas[0].mu;
  const cdouble jump = f.slope(1.0) - f.left_limit(1.0).df[0];
  CHECK(std::abs(jump + mu * w * w * f.value(1.0)) < 1e-13);
}

TEST_CASE("Wronskian is independent of position") {
  SystemModel m = uniform_slab(1.5);
  m.segments = {{0.0, 0.3, 2.0}, {0.3, 0.7, 1.2}, {0.7, 1.0, 3.0}};
  m.deltas = {{0.5, 0.2}, {1.0, 0.1}};
  const Propagator p(m);
  const CJet w = CJet::variable(4, cdouble(3.1, -0.4));
  const auto f = p.left(w);
  const auto g = p.right(w);
  const CJet ref = p.wronskian(w);
  CHECK(std::abs(ref[0] - p.wronskian(w[0])) < 1e-12 * std::abs(ref[0]));
  for (double x : {0.0, 0.1, 0.3, 0.5, 0.65, 0.99, 1.0, 1.4}) {
    const CJet wx = wronskian_at(f, g, x);
    for (int n = 0; n < 4; ++n) CHECK(std::abs(wx[n] - ref[n]) < 1e-11 * (1.0 + std::abs(ref[n])));
  }
}

TEST_CASE("Taylor chain agrees with finite differences") {
  SystemModel m = uniform_slab(1.5);
  m.deltas = {{0.4, 0.3}};
  const Propagator p(m);
  const cdouble w0(2.2, -0.7);
  const auto chain = p.left(CJet::variable(3, w0));
  const double h = 1e-4;
  for (double x : {0.2, 0.4, 0.8, 1.0, 1.3}) {
    const cdouble fp = p.left(CJet(1, w0 + h)).value(x);
    const cdouble fm = p.left(CJet(1, w0 - h)).value(x);
    const cdouble f0 = chain.value(x, 0);
    CHECK(std::abs(chain.value(x, 1) - (fp - fm) / (2 * h)) < 1e-7);
    CHECK(std::abs(chain.value(x, 2) - (fp - 2.0 * f0 + fm) / (2 * h * h)) < 1e-5);
  }
}

TEST_CASE("outgoing left boundary on a potential well") {
  SystemModel m;
  m.kind = Kind::KleinGordon;
  m.boundary_left = LeftBoundary::Outgoing;
  m.domain_left = -1.0;
  m.a = 1.0;
  m.segments = {{-1.0, 1.0, 0.7}};
  const Propagator p(m);
  const cdouble w(1.1, -0.2);
  const auto f = p.left(CJet(1, w));
  // left of the domain the solution is the free outgoing wave
  for (double x : {-3.0, -1.5}) CHECK(std::abs(f.value(x) - std::exp(-I * w * (x + 1.0))) < 1e-12);
  // inside: cos/sin with k^2 = w^2 - V
  const cdouble k = std::sqrt(w * w - 0.7);
  const double x = 0.4;
  const cdouble expect = std::cos(k * (x + 1.0)) - I * w * std::sin(k * (x + 1.0)) / k;
  CHECK(std::abs(f.value(x) - expect) < 1e-12);
}
