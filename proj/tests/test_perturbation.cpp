#include <chrono>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "qnm/perturbation.hpp"
#include "qnm/spectral.hpp"

using namespace qnm;

namespace {

const cdouble I(0.0, 1.0);

// alpha / lambda for rho^{-1} -> rho^{-1} + lambda theta(1 - x)
double alpha_closed_form(double K) { return 0.5 * (K * std::tanh(K) - std::sinh(K) * std::sinh(K)); }

JordanBlock double_pole_block(double K) {
  const SystemModel m = builtin_double_pole_model(K);
  return build_block(m, -I * double_pole_gamma(K), 2);
}

Perturbation step_perturbation() { return Perturbation{{{0.0, 1.0, 1.0}}, {}}; }

// rho and mu of the double-pole model differentiated in K (gamma depends on K)
Perturbation k_shift(const SystemModel& m, double K) {
  const double h = 1e-5;
  const SystemModel up = builtin_double_pole_model(K + h), dn = builtin_double_pole_model(K - h);
  const double drho = (up.segments[0].value - dn.segments[0].value) / (2 * h);
  const double dmu = (up.deltas[0].mu - dn.deltas[0].mu) / (2 * h);
  return from_delta_rho(m, {{0.0, 1.0, drho}}, {{1.0, dmu}});
}

}  // namespace

TEST_CASE("splitting element of the double-pole model") {
  const JordanBlock b = double_pole_block(1.0);
  const cdouble alpha = splitting_alpha(b, step_perturbation());
  CHECK(std::abs(alpha.real() - (-0.309751844793025421)) < 1e-10 * 0.31);
  CHECK(std::abs(alpha.imag()) < 1e-12);
  for (double K : {0.5, 2.0}) {
    const cdouble a = splitting_alpha(double_pole_block(K), step_perturbation());
    CHECK(std::abs(a - alpha_closed_form(K)) < 1e-10 * std::abs(alpha_closed_form(K)));
  }
  CHECK(splitting_alpha(b, Perturbation{}) == cdouble(0.0));
  CHECK(splitting_alpha(b, std::vector<Segment>{{0.0, 1.0, 0.0}}) == cdouble(0.0));
}

TEST_CASE("denominator is the block product (f_{M-1}, f_0)") {
  const JordanBlock b = double_pole_block(1.0);
  const Eigen::MatrixXcd B = biorthogonality_matrix(b);
  CHECK(std::abs(B(1, 0) + b.w_lead()) < 1e-10 * std::abs(b.w_lead()));
}

TEST_CASE("K-shift perturbation is non-generic") {
  const double K = 1.0;
  const SystemModel m = builtin_double_pole_model(K);
  const JordanBlock b = double_pole_block(K);
  const Perturbation p = double_pole_k_shift(K);
  const Perturbation fd = k_shift(m, K);
  CHECK(std::abs(p.delta_rho_inv[0].value - fd.delta_rho_inv[0].value) < 1e-8);
  CHECK(std::abs(p.delta_mu[0].mu - fd.delta_mu[0].mu) < 1e-8);
  const cdouble alpha = splitting_alpha(b, p);
  // scale: the same integrals taken with absolute values of the two parts
  const Perturbation rho_only{p.delta_rho_inv, {}}, mu_only{{}, p.delta_mu};
  const double scale = std::abs(splitting_alpha(b, rho_only)) + std::abs(splitting_alpha(b, mu_only));
  CHECK(scale > 1e-2);
  CHECK(std::abs(alpha) < 1e-12 * scale);
  CHECK_THROWS_AS(split_block(b, 1e-3, 0.0), NonGenericError);

  // alpha != 0 <=> dW/dlambda != 0 at the double pole
  CHECK(relative_wronskian_lambda_derivative(b, p) < 1e-6);
  CHECK(relative_wronskian_lambda_derivative(b, step_perturbation()) > 1e-2);
}

TEST_CASE("perturbed model modifies 1/rho on the marked segment") {
  const SystemModel m = builtin_double_pole_model(1.0);
  const SystemModel q = perturbed_model(m, Perturbation{{{0.25, 0.75, 2.0}}, {{1.0, 0.5}}}, 0.1);
  REQUIRE(q.segments.size() == 3);
  CHECK(q.segments[0].value == doctest::Approx(m.segments[0].value));
  CHECK(1.0 / q.segments[1].value == doctest::Approx(1.0 / m.segments[0].value + 0.2));
  CHECK(q.deltas[0].mu == doctest::Approx(m.deltas[0].mu + 0.05));
  CHECK(perturbed_model(m, step_perturbation(), 0.0) == m);
}

TEST_CASE("second-order shift") {
  const JordanBlock b = double_pole_block(1.0);
  const SecondOrderShift h = second_order_shift(b, step_perturbation());
  CHECK(std::abs(h.total - I * -0.139042445195980076) < 1e-9);
  CHECK(std::abs(h.total.real()) < 1e-12);
  CHECK(std::abs(h.alpha_part - h.beta * splitting_alpha(b, step_perturbation())) < 1e-14);
  CHECK(second_order_shift(b, Perturbation{}).total == cdouble(0.0));

  // reflection symmetry about the anti-diagonal
  const Eigen::MatrixXcd H = perturbation_matrix(b, step_perturbation());
  CHECK(std::abs(H(0, 0) - H(1, 1)) < 1e-10);
  CHECK(std::abs(H(1, 0) - splitting_alpha(b, step_perturbation())) < 1e-14);
}

TEST_CASE("frequency fan") {
  SUBCASE("M = 2 with lambda alpha > 0 gives real shifts") {
    const SplitReport r = split_block(cdouble(1.0, -1.0), 2, 0.5, 2.0);
    CHECK(std::abs(r.frequencies[0] - cdouble(2.0, -1.0)) < 1e-15);
    CHECK(std::abs(r.frequencies[1] - cdouble(0.0, -1.0)) < 1e-15);
    CHECK(r.note.find("horizontal") != std::string::npos);
  }
  SUBCASE("M = 4 with lambda alpha = 1 gives the roots of unity") {
    const SplitReport r = split_block(0.0, 4, 1.0, 1.0);
    CHECK(std::abs(r.s - 1.0) < 1e-15);
    const cdouble want[] = {1.0, I, -1.0, -I};
    for (int n = 0; n < 4; ++n) CHECK(std::abs(r.frequencies[n] - want[n]) < 1e-15);
  }
  SUBCASE("equiangular for a generic alpha") {
    const int M = 5;
    const SplitReport r = split_block(cdouble(0.3, -2.0), M, 1e-3, cdouble(-0.7, 0.4));
    for (int n = 0; n < M; ++n) {
      const cdouble d0 = r.frequencies[n] - r.omega, d1 = r.frequencies[(n + 1) % M] - r.omega;
      CHECK(std::abs(std::abs(d0) - std::abs(r.s)) < 1e-15);
      double dphi = std::arg(d1 / d0);
      CHECK(std::abs(dphi - 2.0 * std::numbers::pi / M) < 1e-12);
    }
    const double phase = std::arg(r.s);
    CHECK(phase > -std::numbers::pi / M);
    CHECK(phase <= std::numbers::pi / M);
  }
  SUBCASE("negative real lambda alpha picks the upper root") {
    CHECK(std::abs(principal_root(cdouble(-4.0, -0.0), 2) - 2.0 * I) < 1e-15);
  }
  SUBCASE("K = 1 with lambda > 0 shifts along the imaginary axis") {
    const JordanBlock b = double_pole_block(1.0);
    const double lambda = 1e-3;
    const SplitReport r = split_block(b, lambda, splitting_alpha(b, step_perturbation()));
    const double want = std::sqrt(0.309751844793025421 * lambda);
    for (const auto& w : r.frequencies) {
      CHECK(std::abs((w - b.omega()).real()) < 1e-14);
      CHECK(std::abs(std::abs((w - b.omega()).imag()) - want) < 1e-10);
    }
    CHECK(r.note.find("vertical") != std::string::npos);
  }
}

TEST_CASE("split eigenvectors diagonalize the splitting part") {
  const JordanBlock b = double_pole_block(1.0);
  const double lambda = 1e-2;
  const cdouble alpha = splitting_alpha(b, step_perturbation());
  const SplitReport r = split_block(b, lambda, alpha);
  const int M = 2;
  for (int n = 0; n < M; ++n) {
    const auto& v = r.eigenvectors[n];
    // (omega + J + lambda alpha E_{M-1,0}) v
    for (int k = 0; k < M; ++k) {
      cdouble hv = b.omega() * v[k] + (k + 1 < M ? v[k + 1] : cdouble(0.0));
      if (k == M - 1) hv += lambda * alpha * v[0];
      CHECK(std::abs(hv - r.frequencies[n] * v[k]) < 1e-14);
    }
  }
  const auto& model = b.model();
  const cdouble p00 = bilinear(model, split_eigenvector(b, r, 0), split_eigenvector(b, r, 0));
  const cdouble p01 = bilinear(model, split_eigenvector(b, r, 0), split_eigenvector(b, r, 1));
  CHECK(std::abs(p01) < 1e-8 * std::abs(p00));
  // dual pairing through the cavity inner product
  const cdouble d00 = cavity_inner(model, split_dual(b, r, 0), split_eigenvector(b, r, 0));
  CHECK(std::abs(d00 - p00) < 1e-8 * std::abs(p00));
}

TEST_CASE("transformed matrix stays O(s^2)") {
  const JordanBlock b = double_pole_block(1.0);
  const cdouble h00 = perturbation_matrix(b, step_perturbation())(0, 0);
  std::vector<double> ratio;
  for (double lambda : {1e-2, 1e-4, 1e-6}) {
    const Eigen::MatrixXcd t = transformed_matrix(b, step_perturbation(), lambda);
    const cdouble s = principal_root(lambda * splitting_alpha(b, step_perturbation()), 2);
    ratio.push_back(t.cwiseAbs().maxCoeff() / std::norm(s));
    // diagonal entries approach (H'_00 + H'_11)/2 = H'_00
    CHECK(std::abs(t(0, 0) / lambda - h00) < 2.0 * std::abs(s) * std::abs(h00) + 1e-12);
  }
  for (double q : ratio) {
    CHECK(q < 2.0 * ratio.back());
    CHECK(q > 0.5 * ratio.back());
  }
}

TEST_CASE("direct root tracking agrees with the block formulas") {
  const auto t0 = std::chrono::steady_clock::now();
  const JordanBlock b = double_pole_block(1.0);
  const Perturbation p = step_perturbation();
  const cdouble alpha = splitting_alpha(b, p);
  const cdouble h00 = second_order_shift(b, p).total;
  const std::vector<double> lambdas{1e-3, -1e-3, 1e-4, -1e-4, 1e-5, -1e-5};
  const RootTrack r = direct_root_track(b, p, lambdas);
  CHECK(std::abs(r.omega1_sq - alpha) < 1e-4 * std::abs(alpha));
  CHECK(std::abs(r.omega2 - h00) < 1e-3 * std::abs(h00));
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (lambdas[i] < 0.0) continue;
    for (const auto& z : r.roots[i]) CHECK(std::abs(z.real()) < 1e-8);
  }
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (lambdas[i] > 0.0) continue;
    // horizontal split, mirror pair
    CHECK(std::abs(r.roots[i][0] + std::conj(r.roots[i][1])) < 1e-10);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(secs < 30.0);
}

TEST_CASE("non-generic 4x4 block") {
  SUBCASE("lambda alpha = 1") {
    const NonGenericDemo d = nongeneric_4x4_demo(1.0, 1.0);
    CHECK(d.charpoly_error < 1e-12);
    CHECK(std::abs(d.eigenvalues[0] + 1.0) < 1e-6);
    CHECK(std::abs(d.eigenvalues[3] - 1.0) < 1e-6);
    CHECK(d.rank1 == 3);
    CHECK(d.rank2 == 2);
  }
  SUBCASE("complex data") {
    const NonGenericDemo d = nongeneric_4x4_demo(cdouble(0.3, -0.2), 0.7, cdouble(1.5, -0.4));
    CHECK(d.charpoly_error < 1e-12);
    CHECK(d.rank1 == 3);
    CHECK(d.rank2 == 2);
  }
  SUBCASE("lambda = 0 leaves one four-chain") {
    const NonGenericDemo d = nongeneric_4x4_demo(1.0, 0.0, cdouble(0.0, -2.0));
    CHECK(d.charpoly_error < 1e-12);
    CHECK(d.rank1 == 3);
    CHECK(d.rank2 == 2);
  }
  SUBCASE("perturbation is symmetric about the anti-diagonal") {
    const NonGenericDemo d = nongeneric_4x4_demo(cdouble(0.3, 0.1), 1.0);
    Eigen::MatrixXcd h = d.matrix;
    for (int n = 0; n < 3; ++n) h(n, n + 1) -= 1.0;
    for (int n = 0; n < 4; ++n)
      for (int m = 0; m < 4; ++m) CHECK(h(n, m) == h(3 - m, 3 - n));
  }
}
