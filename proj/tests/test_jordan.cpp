#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "doctest.h"
#include "qnm/jordan.hpp"
#include "qnm/spectral.hpp"

using namespace qnm;

namespace {

const cdouble I(0.0, 1.0);

cdouble slab_zero(double n, int j) {
  return (cdouble((j + 0.5) * std::numbers::pi, 0.0) - 0.5 * I * std::log((n + 1) / (n - 1))) / n;
}

// smooth random state with one point weight in the momentum
TwoComponentState random_state(std::mt19937& rng, double mu_x) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const cdouble a(u(rng), u(rng)), b(u(rng), u(rng)), c(u(rng), u(rng)), d(u(rng), u(rng));
  TwoComponentState s;
  s.phi = Field([a, b](double x) { return a * std::sin(2.0 * x) + b * x * x; });
  s.phat = Field([c, d](double x) { return c * std::cos(3.0 * x) + d; }, {{mu_x, cdouble(u(rng), u(rng))}});
  return s;
}

cdouble sample_diff(const Field& f, const Field& g) {
  cdouble worst = 0.0;
  for (double x = 0.05; x < 1.0; x += 0.1)
    if (std::abs(f(x) - g(x)) > std::abs(worst)) worst = f(x) - g(x);
  return worst;
}

}  // namespace

TEST_CASE("double-pole block reproduces the closed-form chain") {
  const double K = 1.0;
  const double gamma = double_pole_gamma(K);
  const auto m = builtin_double_pole_model(K);
  const auto block = build_block(m, cdouble(0.0, -gamma), 2, {Normalization::Unit});
  // unit normalization: f_0 = sinh(Kx)/K; the closed form is scaled by K
  const double c2 = (2.0 * K / (3.0 * gamma) + 0.5 / K) * std::tanh(K);
  double worst0 = 0.0, worst1 = 0.0;
  for (double x = 0.0; x <= 1.0; x += 0.01) {
    worst0 = std::max(worst0, std::abs(K * block.value(x, 0) - std::sinh(K * x)));
    const cdouble f01 = I * (K / gamma) * x * std::cosh(K * x) - I * c2 * std::sinh(K * x);
    worst1 = std::max(worst1, std::abs(K * block.value(x, 1) - f01));
  }
  CHECK(worst0 < 1e-12);
  CHECK(worst1 < 1e-8);

  const auto f0 = block.basis(0), f1 = block.basis(1);
  CHECK(std::abs(K * K * bilinear(m, f0, f1) - 0.316412040591535880) < 1e-10);
  CHECK(std::abs(bilinear(m, f1, f1)) < 1e-10);
  CHECK(std::abs(bilinear(m, f0, f0)) < 1e-10);
}

TEST_CASE("preferred normalization") {
  const double gamma = double_pole_gamma(1.0);
  const cdouble w(0.0, -gamma);
  const auto m = builtin_double_pole_model(1.0);
  const auto block = build_block(m, w, 2);
  CHECK(std::abs(block.w_lead() + 2.0 * w) < 1e-12);
  const auto wt = normalized_wronskian_taylor(block);
  REQUIRE(wt.size() == 4);
  CHECK(std::abs(wt[0]) < 1e-12);
  CHECK(std::abs(wt[1]) < 1e-12);
  CHECK(std::abs(wt[2] - block.w_lead()) < 1e-12);
  CHECK(std::abs(wt[3]) < 1e-12);
  CHECK(block.slope(0.0, 0).imag() >= 0.0);

  const auto b = biorthogonality_matrix(block);
  CHECK(std::abs(b(0, 0)) < 1e-8 * std::abs(block.w_lead()));
  CHECK(std::abs(b(1, 1)) < 1e-8 * std::abs(block.w_lead()));
  CHECK(std::abs(b(0, 1) + block.w_lead()) < 1e-8 * std::abs(block.w_lead()));
  CHECK(std::abs(b(1, 0) + block.w_lead()) < 1e-8 * std::abs(block.w_lead()));
}

TEST_CASE("simple slab mode: bilinear norm two ways") {
  const double n = 2.0;
  const auto m = uniform_slab(n);
  for (int j : {0, 3}) {
    const cdouble w = slab_zero(n, j);
    const auto block = build_block(m, w, 1);
    const auto f = block.basis(0);
    const cdouble direct = bilinear(m, f, f);
    CHECK(std::abs(direct - 2.0 * w) < 1e-10 * std::abs(w));
    // 2 omega int rho f^2 + i f(a)^2 by a separate closed-form integral
    const cdouble k = n * w;
    const cdouble s = block.value(1.0, 0);
    const cdouble amp = block.slope(0.0, 0) / k;  // f = amp sin(kx)
    const cdouble integral = amp * amp * (0.5 - std::sin(2.0 * k) / (4.0 * k));
    const cdouble other = 2.0 * w * n * n * integral + I * s * s;
    CHECK(std::abs(direct - other) < 1e-10 * std::abs(w));
  }
}

TEST_CASE("Jordan chain H-action holds pointwise") {
  const double gamma = double_pole_gamma(1.0);
  const auto m = builtin_double_pole_model(1.0);
  const auto block = build_block(m, cdouble(0.0, -gamma), 2);
  const auto& ch = block.chain();
  const CJet w2 = ch.omega() * ch.omega();
  for (double x : {0.1, 0.37, 0.8, 0.99}) {
    const double rho = inertia_at(m, x);
    const FieldJet s = ch.at(x);
    const CJet d2 = -(w2 * cdouble(rho)) * s.f;  // f'' from the spatial equation
    for (int n = 0; n < 2; ++n) {
      const cdouble prev_f = n > 0 ? block.value(x, n - 1) : 0.0;
      const cdouble prev_p = n > 0 ? block.momentum(x, n - 1) : 0.0;
      const cdouble lhs1 = I * block.momentum(x, n) / rho;
      const cdouble rhs1 = block.omega() * block.value(x, n) + prev_f;
      const cdouble lhs2 = I * d2[n];
      const cdouble rhs2 = block.omega() * block.momentum(x, n) + prev_p;
      CHECK(std::abs(lhs1 - rhs1) < 1e-8 * (1.0 + std::abs(rhs1)));
      CHECK(std::abs(lhs2 - rhs2) < 1e-8 * (1.0 + std::abs(rhs2)));
    }
  }
}

TEST_CASE("product identity on raw chains") {
  const double gamma = double_pole_gamma(1.0);
  auto r = unnormalized_product_check(builtin_double_pole_model(1.0), cdouble(0.0, -gamma), 2);
  CHECK(r.max_residual < 1e-10 * r.scale);
  CHECK(std::abs(r.product(0, 0)) < 1e-10 * r.scale);

  r = unnormalized_product_check(uniform_slab(2.0), slab_zero(2.0, 1), 1);
  CHECK(r.max_residual < 1e-10 * r.scale);

  SystemModel kg;
  kg.kind = Kind::KleinGordon;
  kg.boundary_left = LeftBoundary::Outgoing;
  kg.domain_left = -1.0;
  kg.a = 1.0;
  kg.segments = {{-1.0, 0.0, 1.5}, {0.0, 1.0, 0.5}};
  const auto z = spectrum(kg, Box{0.1, 4.0, -2.0, -1e-3});
  REQUIRE_FALSE(z.zeros.empty());
  r = unnormalized_product_check(kg, z.zeros.front().omega, 1);
  CHECK(r.max_residual < 1e-10 * r.scale);
}

TEST_CASE("multiplicity mismatch is detected") {
  CHECK_THROWS_AS(build_block(uniform_slab(2.0), slab_zero(2.0, 0), 2), InvariantError);
  CHECK_THROWS_AS(build_block(uniform_slab(2.0), cdouble(1.0, -0.3), 1), InvariantError);
}

TEST_CASE("flip and bilinear properties on random states") {
  std::mt19937 rng(7);
  const auto m = builtin_double_pole_model(0.5);
  for (int trial = 0; trial < 5; ++trial) {
    const auto psi = random_state(rng, 0.4);
    const auto chi = random_state(rng, 0.6);
    const auto ff = flip(flip(psi));
    // the conjugation turns the second factor -i into +i: flip is an involution
    CHECK(std::abs(sample_diff(ff.phi, psi.phi)) < 1e-15);
    CHECK(std::abs(sample_diff(ff.phat, psi.phat)) < 1e-15);
    REQUIRE(ff.phat.points().size() == 1);
    CHECK(std::abs(ff.phat.points()[0].w - psi.phat.points()[0].w) < 1e-15);
    const cdouble b1 = bilinear(m, psi, chi), b2 = bilinear(m, chi, psi);
    CHECK(std::abs(b1 - b2) < 1e-13 * (1.0 + std::abs(b1)));
  }
  TwoComponentState real;
  real.phi = Field([](double x) { return cdouble(x * x, 0.0); });
  CHECK(std::abs(flip(real).phi(0.3)) == 0.0);
}

TEST_CASE("flip relates the inner product to the bilinear map on outgoing states") {
  const auto m = builtin_double_pole_model(1.0);
  const auto spec = spectrum(m, Box{0.5, 15.0, -4.0, -1e-3});
  REQUIRE(spec.zeros.size() >= 2);
  const auto a = build_block(m, spec.zeros[0].omega, 1);
  const auto b = build_block(m, spec.zeros[1].omega, 1);
  const auto dp = build_block(m, cdouble(0.0, -double_pole_gamma(1.0)), 2);
  for (const auto* psi : {&a, &b, &dp}) {
    for (const auto* chi : {&a, &b, &dp}) {
      const auto u = psi->basis(0);
      const auto v = chi->basis(chi->multiplicity() - 1);
      const cdouble lhs = cavity_inner(m, flip(u), v);
      const cdouble rhs = bilinear(m, u, v);
      CHECK(std::abs(lhs - rhs) < 1e-10 * (1.0 + std::abs(rhs)));
    }
  }
  CHECK(inter_block_orthogonality_check(a, b) < 1e-8);
  CHECK(inter_block_orthogonality_check(a, dp) < 1e-8);
  CHECK(inter_block_orthogonality_check(dp, dp) == doctest::Approx(std::abs(dp.w_lead())).epsilon(1e-8));
}

TEST_CASE("generalized duals of a double-pole block") {
  const auto m = builtin_double_pole_model(1.0);
  const auto block = build_block(m, cdouble(0.0, -double_pole_gamma(1.0)), 2);
  const cdouble w = block.w_lead();
  CHECK(std::abs(cavity_inner(m, block.dual(0), block.basis(0)) + w) < 1e-10 * std::abs(w));
  CHECK(std::abs(cavity_inner(m, block.dual(1), block.basis(1)) + w) < 1e-10 * std::abs(w));
  CHECK(std::abs(cavity_inner(m, block.dual(0), block.basis(1))) < 1e-10 * std::abs(w));
  // the left eigenvector is orthogonal to the right eigenvector
  CHECK(std::abs(cavity_inner(m, flip(block.basis(0)), block.basis(0))) < 1e-10 * std::abs(w));

  const std::vector<TwoComponentState> v{block.basis(0), block.basis(1)};
  const std::vector<TwoComponentState> wt{flip(block.basis(0)), flip(block.basis(1))};
  const auto duals = gram_dual(m, v, wt);
  for (int n = 0; n < 2; ++n) {
    for (int k = 0; k < 2; ++k) {
      const cdouble d = cavity_inner(m, duals[std::size_t(n)], v[std::size_t(k)]);
      CHECK(std::abs(d - (n == k ? 1.0 : 0.0)) < 1e-10);
    }
    const cdouble f = 1.0 / std::conj(-w);
    for (double x : {0.2, 0.5, 0.9}) {
      CHECK(std::abs(duals[std::size_t(n)].phi(x) - f * block.dual(n).phi(x)) < 1e-8);
      CHECK(std::abs(duals[std::size_t(n)].phat(x) - f * block.dual(n).phat(x)) < 1e-8);
    }
  }
}

TEST_CASE("gram_dual in finite dimensions") {
  using V = Eigen::VectorXcd;
  std::vector<V> e;
  for (int i = 0; i < 3; ++i) e.push_back(V::Unit(3, i));
  const auto same = gram_dual(e, e);
  for (int i = 0; i < 3; ++i) CHECK((same[std::size_t(i)] - e[std::size_t(i)]).norm() < 1e-15);

  // V = x-y plane, W contains the z-axis
  const std::vector<V> v{V::Unit(3, 0), V::Unit(3, 1)};
  V tilt(3);
  tilt << 1.0, 0.0, 1.0;
  CHECK_THROWS_AS(gram_dual(v, std::vector<V>{tilt, V::Unit(3, 2)}), SingularMetricError);

  std::mt19937 rng(3);
  std::normal_distribution<double> nd;
  std::vector<V> a, b;
  for (int i = 0; i < 4; ++i) {
    V x(4), y(4);
    for (int k = 0; k < 4; ++k) {
      x(k) = cdouble(nd(rng), nd(rng));
      y(k) = cdouble(nd(rng), nd(rng));
    }
    a.push_back(x);
    b.push_back(y);
  }
  const auto d = gram_dual(a, b);
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n)
      CHECK(std::abs(d[std::size_t(m)].dot(a[std::size_t(n)]) - (m == n ? 1.0 : 0.0)) < 1e-10);
}
