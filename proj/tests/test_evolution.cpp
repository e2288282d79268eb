#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "doctest.h"
#include "qnm/evolution.hpp"

using namespace qnm;

namespace {

const cdouble I(0.0, 1.0);

TwoComponentState bump(double lo, double hi, int power) {
  TwoComponentState s;
  s.phi = Field([=](double x) {
    if (x <= lo || x >= hi) return cdouble(0.0);
    return cdouble(std::pow(std::sin(std::numbers::pi * (x - lo) / (hi - lo)), power));
  });
  return s;
}

const std::vector<JordanBlock>& k1_blocks() {
  static const auto blocks = build_blocks(builtin_double_pole_model(1.0), 15.0, 10.0);
  return blocks;
}

}  // namespace

TEST_CASE("mode set of the double-pole model") {
  const auto& b = k1_blocks();
  REQUIRE(b.size() == 5);
  int doubles = 0;
  for (const auto& blk : b) doubles += blk.multiplicity() == 2;
  CHECK(doubles == 1);
}

TEST_CASE("time basis") {
  const auto& blk = k1_blocks()[2];
  REQUIRE(blk.multiplicity() == 2);
  const auto t0 = time_basis(blk, 0.0);
  for (double x : {0.2, 0.7}) {
    CHECK(std::abs(t0[1].phi(x) - blk.value(x, 1)) < 1e-15);
    CHECK(std::abs(t0[1].phat(x) - blk.momentum(x, 1)) < 1e-15);
  }
  const double t = 0.8;
  const auto tb = time_basis(blk, t);
  for (double x : {0.2, 0.7}) {
    const cdouble expect = (blk.value(x, 1) - I * t * blk.value(x, 0)) * std::exp(-I * blk.omega() * t);
    CHECK(std::abs(tb[1].phi(x) - expect) < 1e-14);
  }
  CHECK_THROWS_AS(time_basis(blk, -1.0), ValidationError);
}

TEST_CASE("projection reproduces basis labels") {
  const auto m = builtin_double_pole_model(1.0);
  const auto& b = k1_blocks();
  for (std::size_t k : {std::size_t(1), std::size_t(2)}) {
    for (int n = 0; n < b[k].multiplicity(); ++n) {
      const auto c = project(m, b, b[k].basis(n));
      for (std::size_t j = 0; j < b.size(); ++j)
        for (std::size_t q = 0; q < c.a[j].size(); ++q) {
          const double expect = (j == k && int(q) == n) ? 1.0 : 0.0;
          CHECK(std::abs(c.a[j][q] - expect) < 1e-9);
        }
    }
  }
}

TEST_CASE("coefficient formulas agree on a random state") {
  const auto m = builtin_double_pole_model(1.0);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const cdouble p(u(rng), u(rng)), q(u(rng), u(rng)), r(u(rng), u(rng));
  TwoComponentState s;
  s.phi = Field([=](double x) { return p * x * (1.3 - x) + q * std::sin(4.0 * x); });
  s.phat = Field([=](double x) { return r * std::cos(2.0 * x); }, {{1.0, cdouble(0.3, -0.1)}});
  const auto a = project(m, k1_blocks(), s);
  const auto d = project_dual(m, k1_blocks(), s);
  for (std::size_t j = 0; j < a.a.size(); ++j)
    for (std::size_t n = 0; n < a.a[j].size(); ++n)
      CHECK(std::abs(a.a[j][n] - d.a[j][n]) < 1e-10 * (1.0 + std::abs(a.a[j][n])));
}

TEST_CASE("simple-pole coefficients follow the ratio formula") {
  const auto m = uniform_slab(2.0);
  const auto blocks = build_blocks(m, 8.0, 3.0);
  REQUIRE(blocks.size() == 10);
  const auto s = bump(0.0, 1.0, 2);
  const auto c = project(m, blocks, s);
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    const auto f = blocks[j].basis(0);
    CHECK(std::abs(c.a[j][0] - bilinear(m, f, s) / bilinear(m, f, f)) < 1e-12);
  }
}

TEST_CASE("coefficient evolution is a semigroup") {
  const auto m = builtin_double_pole_model(1.0);
  const auto& b = k1_blocks();
  const auto c = project(m, b, bump(0.0, 1.0, 3));
  const auto once = advance(b, c, 1.7);
  const auto twice = advance(b, advance(b, c, 0.6), 1.1);
  for (std::size_t j = 0; j < b.size(); ++j)
    for (std::size_t n = 0; n < c.a[j].size(); ++n)
      CHECK(std::abs(once.a[j][n] - twice.a[j][n]) < 1e-10 * (1.0 + std::abs(once.a[j][n])));
}

TEST_CASE("single modes evolve by a phase factor, Jordan partners grow linearly") {
  const auto m = builtin_double_pole_model(1.0);
  const auto& b = k1_blocks();
  const double t = 1.3;
  const auto simple = evolve_modal(m, b, b[3].basis(0), t);
  const auto dp = evolve_modal(m, b, b[2].basis(1), t);
  for (double x : {0.25, 0.6, 0.95}) {
    CHECK(std::abs(simple.phi(x) - std::exp(-I * b[3].omega() * t) * b[3].value(x, 0)) < 1e-9);
    const cdouble expect = (b[2].value(x, 1) - I * t * b[2].value(x, 0)) * std::exp(-I * b[2].omega() * t);
    CHECK(std::abs(dp.phi(x) - expect) < 1e-9);
  }
}

TEST_CASE("delta-mass momentum bookkeeping under evolution") {
  const auto m = builtin_double_pole_model(1.0);
  const auto& b = k1_blocks();
  const auto s = bump(0.1, 1.0, 3);
  const double t = 0.9;
  const auto st = evolve_modal(m, b, s, t);
  for (std::size_t j : {std::size_t(1), std::size_t(3)}) {
    const auto f = b[j].basis(0);
    const cdouble lhs = bilinear(m, f, st);
    const cdouble rhs = std::exp(-I * b[j].omega() * t) * bilinear(m, f, synthesize(b, project(m, b, s)));
    CHECK(std::abs(lhs - rhs) < 1e-8 * (1.0 + std::abs(rhs)));
  }
}

TEST_CASE("Green's kernel is symmetric") {
  const auto& b = k1_blocks();
  for (double t : {0.0, 0.5, 2.0})
    CHECK(std::abs(greens_kernel(b, 0.3, 0.8, t) - greens_kernel(b, 0.8, 0.3, t)) < 1e-12);
}

TEST_CASE("sum rule") {
  const auto slab = uniform_slab(2.0);
  const auto few = build_blocks(slab, 10.0, 3.0);
  const auto many = build_blocks(slab, 31.0, 3.0);
  REQUIRE(many.size() == 40);
  const auto r_few = sum_rule_check(slab, few, 0.45, 0.05);
  const auto r_many = sum_rule_check(slab, many, 0.45, 0.05);
  CHECK(r_many.first_component_residual < r_few.first_component_residual);
  CHECK(r_many.second_component_error < 1e-2);
  const auto wide = sum_rule_check(slab, many, 0.5, 0.3);
  const auto wider_set = sum_rule_check(slab, build_blocks(slab, 62.0, 3.0), 0.5, 0.3);
  CHECK(wide.second_component_error < 1e-2);
  CHECK(wider_set.second_component_error < 0.5 * wide.second_component_error);

  const auto m = builtin_double_pole_model(1.0);
  const auto blocks = build_blocks(m, 60.0, 5.0);
  const auto full = sum_rule_check(m, blocks, 0.5, 0.1);
  const auto partial = sum_rule_check(m, blocks, 0.5, 0.1, 1);
  CHECK(full.second_component_error < 5e-3);
  CHECK(partial.second_component_error > 10.0 * full.second_component_error);
  CHECK(partial.first_component_residual > 100.0 * full.first_component_residual);
}

TEST_CASE("reference solver: free half-line pulse leaves without reflection") {
  const auto m = free_half_line();
  auto s = bump(0.3, 0.7, 4);
  // right-moving: phat = phi_t = -phi'
  s.phat = Field([](double x) {
    if (x <= 0.3 || x >= 0.7) return cdouble(0.0);
    const double u = std::numbers::pi * (x - 0.3) / 0.4;
    return cdouble(-4.0 * std::pow(std::sin(u), 3) * std::cos(u) * std::numbers::pi / 0.4);
  });
  const auto snaps = evolve_reference(m, s, {0.0, 1.0}, 1e-3, 5e-4);
  double e0 = 0.0, e1 = 0.0;
  for (std::size_t i = 0; i < snaps[0].phi.size(); ++i) {
    e0 += std::norm(snaps[0].phi[i]) + std::norm(snaps[0].phat[i]);
    e1 += std::norm(snaps[1].phi[i]) + std::norm(snaps[1].phat[i]);
  }
  CHECK(e1 < 1e-8 * e0);
}

TEST_CASE("reference solver: CFL") {
  CHECK_THROWS_AS(evolve_reference(builtin_double_pole_model(1.0), bump(0, 1, 3), 1.0, 1e-2, 1e-2), ValidationError);
}

TEST_CASE("reference solver: slab late-time decay rate") {
  const auto m = uniform_slab(2.0);
  const cdouble w0 = (cdouble(0.5 * std::numbers::pi, 0.0) - 0.5 * I * std::log(3.0)) / 2.0;
  const auto snaps = evolve_reference(m, bump(0.0, 1.0, 3), {6.0, 10.0}, 2e-3, 2e-3);
  // the two times are one round trip 2 n a apart
  auto energy = [&](const Snapshot& s) {
    double e = 0.0;
    for (std::size_t i = 0; i < s.phi.size(); ++i) e += std::norm(s.phi[i]) + std::norm(s.phat[i] / 4.0) / std::norm(w0);
    return e;
  };
  const double slope = 0.5 * std::log(energy(snaps[1]) / energy(snaps[0])) / 4.0;
  CHECK(slope == doctest::Approx(w0.imag()).epsilon(1e-2));
}

TEST_CASE("reference solver: Jordan partner with its exterior continuation") {
  const auto m = builtin_double_pole_model(1.0);
  const auto& blk = k1_blocks()[2];
  ReferenceOptions opt;
  opt.exterior_data = true;
  const double rho = m.segments[0].value;
  const std::vector<double> times{0.5, 1.0, 1.5, 2.0};
  const auto snaps = evolve_reference(m, blk.basis(1), times, 5e-4, 0.5 * 5e-4 * std::sqrt(rho), opt);
  for (const auto& s : snaps) {
    const auto exact = blk.time_basis(1, s.t);
    std::vector<cdouble> e;
    for (double x : s.x) e.push_back(exact.phi(x));
    CHECK(relative_l2(s.phi, e) < 1e-4);
  }
  // secular term: phi(x0,t) e^{i omega t} = f_{0,1}(x0) - i t f_{0,0}(x0)
  const std::size_t i0 = snaps[0].x.size() / 2;
  const double x0 = snaps[0].x[i0];
  std::vector<cdouble> y;
  for (const auto& s : snaps) y.push_back(s.phi[i0] * std::exp(I * blk.omega() * s.t));
  // least-squares line through the four points
  double st = 0, stt = 0;
  cdouble sy = 0, sty = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    st += times[k];
    stt += times[k] * times[k];
    sy += y[k];
    sty += times[k] * y[k];
  }
  const double n = double(times.size());
  const cdouble slope = (n * sty - st * sy) / (n * stt - st * st);
  const cdouble expect = -I * blk.value(x0, 0);
  CHECK(std::abs(slope - expect) < 1e-3 * std::abs(expect));
}
