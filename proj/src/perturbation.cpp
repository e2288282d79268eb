#include "qnm/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qnm/errors.hpp"
#include "qnm/parallel.hpp"
#include "qnm/quadrature.hpp"
#include "qnm/spectral.hpp"

namespace qnm {

namespace {

void require_wave(const SystemModel& m) {
  if (m.kind != Kind::Wave) throw ValidationError("perturbations of 1/rho need a wave model");
}

double delta_at(const Perturbation& p, double x) {
  double d = 0.0;
  for (const auto& s : p.delta_rho_inv)
    if (x > s.x_lo && x < s.x_hi) d += s.value;
  return d;
}

// g_k = omega f_k + f_{k-1}, the momentum without its -i rho factor
cdouble g_at(const FieldJet& s, cdouble omega, int k) {
  return omega * s.f[k] + (k > 0 ? s.f[k - 1] : cdouble(0.0));
}

cdouble matrix_element(const JordanBlock& block, const Perturbation& p, int k, int m) {
  const SystemModel& model = block.model();
  const cdouble w = block.omega();
  const auto& chain = block.chain();
  cdouble sum = 0.0;
  for (const auto& seg : p.delta_rho_inv) {
    const double lo = std::max(seg.x_lo, model.domain_left), hi = std::min(seg.x_hi, model.a);
    if (!(hi > lo) || seg.value == 0.0) continue;
    std::vector<double> breaks{lo, hi};
    for (double b : cavity_breaks(model, model.a))
      if (b > lo && b < hi) breaks.push_back(b);
    std::sort(breaks.begin(), breaks.end());
    sum += seg.value * integrate_pieces(
                           [&](double x) {
                             const double rho = inertia_at(model, x);
                             const FieldJet s = chain.at(x);
                             return rho * rho * g_at(s, w, k) * g_at(s, w, m);
                           },
                           breaks);
  }
  for (const auto& d : p.delta_mu) {
    if (d.mu == 0.0) continue;
    const FieldJet s = chain.at(d.x);
    sum -= d.mu * g_at(s, w, k) * g_at(s, w, m);
  }
  // (f_{M-1}, f_0) = -W_M for the normalized chain
  return sum / (-block.w_lead());
}

}  // namespace

Perturbation from_delta_rho(const SystemModel& model, const std::vector<Segment>& delta_rho,
                            const std::vector<PointMass>& delta_mu) {
  require_wave(model);
  Perturbation p;
  p.delta_mu = delta_mu;
  for (const auto& s : delta_rho) {
    std::vector<double> cuts{s.x_lo, s.x_hi};
    for (const auto& m : model.segments)
      if (m.x_lo > s.x_lo && m.x_lo < s.x_hi) cuts.push_back(m.x_lo);
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double rho = inertia_at(model, 0.5 * (cuts[i] + cuts[i + 1]));
      p.delta_rho_inv.push_back({cuts[i], cuts[i + 1], -s.value / (rho * rho)});
    }
  }
  return p;
}

Perturbation double_pole_k_shift(double K) {
  const SystemModel m = builtin_double_pole_model(K);
  const double g = double_pole_gamma(K), sh = std::sinh(K), ch = std::cosh(K);
  const double dg = ch / sh + K / (sh * sh) - 2.0 * K * K * ch / (sh * sh * sh);
  const double rho = K * K / (g * g);
  const double drho = 2.0 * K / (g * g) - 2.0 * K * K * dg / (g * g * g);
  const double dmu = drho / (sh * sh) - 2.0 * rho * ch / (sh * sh * sh);
  return from_delta_rho(m, {{0.0, 1.0, drho}}, {{1.0, dmu}});
}

SystemModel perturbed_model(const SystemModel& model, const Perturbation& p, double lambda) {
  require_wave(model);
  if (lambda == 0.0 || p.empty()) return model;
  std::vector<double> cuts;
  for (const auto& s : model.segments) cuts.push_back(s.x_lo);
  cuts.push_back(model.a);
  for (const auto& s : p.delta_rho_inv) {
    if (s.x_lo > model.domain_left && s.x_lo < model.a) cuts.push_back(s.x_lo);
    if (s.x_hi > model.domain_left && s.x_hi < model.a) cuts.push_back(s.x_hi);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  SystemModel out = model;
  out.segments.clear();
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    const double inv = 1.0 / inertia_at(model, mid) + lambda * delta_at(p, mid);
    if (!(inv > 0.0)) throw ValidationError("perturbed density is not positive");
    out.segments.push_back({cuts[i], cuts[i + 1], 1.0 / inv});
  }
  for (const auto& d : p.delta_mu) {
    auto it = std::find_if(out.deltas.begin(), out.deltas.end(),
                           [&](const PointMass& q) { return std::abs(q.x - d.x) <= 1e-12; });
    if (it != out.deltas.end())
      it->mu += lambda * d.mu;
    else
      out.deltas.push_back({d.x, lambda * d.mu});
  }
  require_valid(out);
  return out;
}

Eigen::MatrixXcd perturbation_matrix(const JordanBlock& block, const Perturbation& p) {
  require_wave(block.model());
  const int M = block.multiplicity();
  Eigen::MatrixXcd h(M, M);
  for (int n = 0; n < M; ++n)
    for (int m = 0; m < M; ++m) h(n, m) = matrix_element(block, p, M - 1 - n, m);
  return h;
}

cdouble splitting_alpha(const JordanBlock& block, const Perturbation& p) {
  require_wave(block.model());
  return matrix_element(block, p, 0, 0);
}

cdouble splitting_alpha(const JordanBlock& block, const std::vector<Segment>& delta_rho_inv) {
  return splitting_alpha(block, Perturbation{delta_rho_inv, {}});
}

cdouble principal_root(cdouble z, int m) {
  if (m < 1) throw ValidationError("root order must be positive");
  if (z == 0.0) return 0.0;
  double phase = std::atan2(z.imag(), z.real());
  if (phase <= -std::numbers::pi) phase = std::numbers::pi;
  return std::polar(std::pow(std::abs(z), 1.0 / m), phase / m);
}

SplitReport split_block(cdouble omega, int multiplicity, double lambda, cdouble alpha) {
  if (alpha == 0.0)
    throw NonGenericError("alpha = 0: the perturbation is not generic; use the non-generic tools");
  if (multiplicity < 1) throw ValidationError("multiplicity must be positive");
  const int M = multiplicity;
  SplitReport r;
  r.omega = omega;
  r.multiplicity = M;
  r.lambda = lambda;
  r.alpha = alpha;
  r.s = principal_root(lambda * alpha, M);
  for (int n = 0; n < M; ++n) {
    const cdouble e = std::polar(1.0, 2.0 * std::numbers::pi * n / M);
    r.frequencies.push_back(r.omega + r.s * e);
    std::vector<cdouble> v;
    cdouble p = 1.0;
    for (int m = 0; m < M; ++m) {
      v.push_back(p * std::polar(1.0, 2.0 * std::numbers::pi * n * m / M));
      p *= r.s;
    }
    r.eigenvectors.push_back(std::move(v));
  }
  const cdouble la = lambda * alpha;
  const double tol = 1e-12 * std::abs(la);
  if (lambda == 0.0)
    r.note = "lambda = 0: the block is unperturbed";
  else if (M == 2 && std::abs(la.imag()) <= tol)
    r.note = la.real() > 0.0 ? "lambda alpha > 0: real shifts, the poles split horizontally"
                             : "lambda alpha < 0: imaginary shifts, the poles split vertically";
  else
    r.note = "equiangular fan of radius |lambda alpha|^(1/M)";
  return r;
}

SplitReport split_block(const JordanBlock& block, double lambda, cdouble alpha) {
  return split_block(block.omega(), block.multiplicity(), lambda, alpha);
}

TwoComponentState split_eigenvector(const JordanBlock& block, const SplitReport& r, int n) {
  if (n < 0 || n >= block.multiplicity()) throw ValidationError("split index out of range");
  std::vector<TwoComponentState> states;
  for (int m = 0; m < block.multiplicity(); ++m) states.push_back(block.basis(m));
  return linear_combination(states, r.eigenvectors[static_cast<std::size_t>(n)]);
}

TwoComponentState split_dual(const JordanBlock& block, const SplitReport& r, int n) {
  return flip(split_eigenvector(block, r, n));
}

SecondOrderShift second_order_shift(const JordanBlock& block, const Perturbation& p) {
  if (block.multiplicity() != 2) throw ValidationError("second-order shift is implemented for M = 2");
  require_wave(block.model());
  SecondOrderShift r;
  r.total = matrix_element(block, p, 1, 0);
  const double l = block.model().domain_left;
  r.beta = block.slope(l, 1) / block.slope(l, 0);
  r.alpha_part = r.beta * matrix_element(block, p, 0, 0);
  return r;
}

Eigen::MatrixXcd transformed_matrix(const JordanBlock& block, const Perturbation& p, double lambda) {
  const int M = block.multiplicity();
  Eigen::MatrixXcd h = perturbation_matrix(block, p);
  const cdouble alpha = h(M - 1, 0);
  h(M - 1, 0) = 0.0;
  const cdouble s = principal_root(lambda * alpha, M);
  if (s == 0.0) throw NonGenericError("alpha = 0: the split basis is singular");
  Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(M, M);
  for (int n = 0; n < M; ++n)
    for (int m = 0; m < M; ++m)
      for (int k = 0; k < M; ++k)
        for (int l = 0; l < M; ++l)
          t(n, m) += std::polar(1.0, 2.0 * std::numbers::pi * (l * m - n * k) / M) * h(k, l) *
                     std::pow(s, l - k) / double(M);
  return lambda * t;
}

RootTrack direct_root_track(const JordanBlock& block, const Perturbation& p, const std::vector<double>& lambdas) {
  if (block.multiplicity() != 2) throw ValidationError("root tracking is implemented for M = 2");
  if (lambdas.size() < 4) throw ValidationError("root tracking needs at least four lambda values");
  const cdouble alpha = splitting_alpha(block, p);
  if (alpha == 0.0) throw NonGenericError("alpha = 0: nothing to track at order sqrt(lambda)");
  const cdouble w0 = block.omega();

  RootTrack r;
  r.lambdas = lambdas;
  r.roots = parallel_map(lambdas.size(), [&](std::size_t i) {
    const double lambda = lambdas[i];
    const cdouble s = principal_root(lambda * alpha, 2);
    const Propagator prop(perturbed_model(block.model(), p, lambda));
    RefineOptions opt;
    opt.max_distance = 0.5 * std::abs(s);
    opt.circle_radius = 0.25 * std::abs(s);
    std::vector<cdouble> out;
    for (cdouble seed : {w0 + s, w0 - s}) {
      const SpectralZero z = refine_zero(prop, seed, opt);
      if (z.multiplicity != 1) throw NumericalError("split zero is not simple");
      out.push_back(z.omega);
    }
    if (std::abs(out[0] - out[1]) < 0.5 * std::abs(s)) throw NumericalError("split zeros merged while tracking");
    std::sort(out.begin(), out.end(), [](cdouble a, cdouble b) {
      return a.imag() != b.imag() ? a.imag() < b.imag() : a.real() < b.real();
    });
    return out;
  });

  // rows divided by lambda: y / lambda = c0 + c1 lambda + c2 lambda^2
  const auto n = static_cast<Eigen::Index>(lambdas.size());
  Eigen::MatrixXcd A(n, 3);
  Eigen::VectorXcd ys(n), yd(n);
  double lmax = 0.0;
  for (double l : lambdas) lmax = std::max(lmax, std::abs(l));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double l = lambdas[static_cast<std::size_t>(i)];
    const auto& z = r.roots[static_cast<std::size_t>(i)];
    A(i, 0) = 1.0;
    A(i, 1) = l / lmax;
    A(i, 2) = (l / lmax) * (l / lmax);
    ys(i) = (0.5 * (z[0] + z[1]) - w0) / l;
    const cdouble h = 0.5 * (z[0] - z[1]);
    yd(i) = h * h / l;
  }
  const auto qr = A.colPivHouseholderQr();
  const Eigen::VectorXcd cs = qr.solve(ys), cd = qr.solve(yd);
  r.omega2 = cs(0);
  r.omega1_sq = cd(0);
  r.fit_residual = std::max((A * cs - ys).cwiseAbs().maxCoeff() / std::abs(r.omega2),
                            (A * cd - yd).cwiseAbs().maxCoeff() / std::abs(r.omega1_sq));
  return r;
}

double relative_wronskian_lambda_derivative(const JordanBlock& block, const Perturbation& p, double h) {
  const cdouble w = block.omega();
  const cdouble wp = Propagator(perturbed_model(block.model(), p, h)).wronskian(w);
  const cdouble wm = Propagator(perturbed_model(block.model(), p, -h)).wronskian(w);
  const auto t = wronskian_taylor(block.model(), w, block.multiplicity());
  return std::abs((wp - wm) / (2.0 * h)) / std::abs(t[static_cast<std::size_t>(block.multiplicity())]);
}

NonGenericDemo nongeneric_4x4_demo(cdouble alpha, double lambda, cdouble omega_j) {
  NonGenericDemo d;
  Eigen::MatrixXcd h = omega_j * Eigen::MatrixXcd::Identity(4, 4);
  for (int n = 0; n < 3; ++n) h(n, n + 1) = 1.0;
  h(1, 0) += lambda * alpha;
  h(3, 2) += lambda * alpha;
  d.matrix = h;

  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(h, false);
  for (int i = 0; i < 4; ++i) d.eigenvalues.push_back(es.eigenvalues()(i));
  std::sort(d.eigenvalues.begin(), d.eigenvalues.end(), [](cdouble a, cdouble b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });

  // prod (w - e_k), coefficients highest power first
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(5);
  c(0) = 1.0;
  for (int k = 0; k < 4; ++k)
    for (int i = k + 1; i >= 1; --i) c(i) -= d.eigenvalues[static_cast<std::size_t>(k)] * c(i - 1);
  d.charpoly = c;
  // [(w - w_j)^2 - la]^2 = w^4 - 4 w_j w^3 + (6 w_j^2 - 2 la) w^2 + (4 la w_j - 4 w_j^3) w + (w_j^2 - la)^2
  const cdouble la = lambda * alpha, w = omega_j;
  Eigen::VectorXcd e(5);
  e << 1.0, -4.0 * w, 6.0 * w * w - 2.0 * la, 4.0 * la * w - 4.0 * w * w * w, (w * w - la) * (w * w - la);
  d.expected_charpoly = e;
  d.charpoly_error = (c - e).cwiseAbs().maxCoeff();

  const cdouble shifted = omega_j + principal_root(la, 2);
  const Eigen::MatrixXcd a = h - shifted * Eigen::MatrixXcd::Identity(4, 4);
  auto rank = [](const Eigen::MatrixXcd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    const auto& sv = svd.singularValues();
    int r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) > 1e-10 * std::max(1.0, sv(0))) ++r;
    return r;
  };
  d.rank1 = rank(a);
  d.rank2 = rank(a * a);
  return d;
}

}  // namespace qnm
