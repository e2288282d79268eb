#include "qnm/jordan.hpp"

#include <algorithm>
#include <cmath>

namespace qnm {

namespace {

const cdouble I(0.0, 1.0);

std::vector<FieldJet> scaled_nodes(const ModeSolution& raw, const CJet& factor) {
  std::vector<FieldJet> out = raw.nodes();
  for (auto& s : out) {
    s.f = s.f * factor;
    s.df = s.df * factor;
  }
  return out;
}

CJet normalized_wronskian(const ModeSolution& chain) {
  const FieldJet e = chain.at(chain.a());
  return e.f * (e.df - chain.omega() * e.f * I);
}

}  // namespace

double inertia_at(const SystemModel& model, double x) {
  if (model.kind != Kind::Wave || x < model.domain_left || x >= model.a) return 1.0;
  auto it = std::upper_bound(model.segments.begin(), model.segments.end(), x,
                             [](double v, const Segment& s) { return v < s.x_lo; });
  if (it != model.segments.begin()) --it;
  return it->value;
}

TwoComponentState chain_state(const SystemModel& model, std::shared_ptr<const ModeSolution> chain, int n) {
  if (n < 0 || n >= chain->order()) throw ValidationError("chain index out of range");
  const cdouble w = chain->omega0();
  auto momentum = [chain, w, n](double x) {
    const FieldJet s = chain->at(x);
    return w * s.f[n] + (n > 0 ? s.f[n - 1] : cdouble(0.0));
  };
  std::vector<PointWeight> pts;
  if (model.kind == Kind::Wave) {
    for (const auto& d : model.deltas) {
      if (d.mu == 0.0) continue;
      pts.push_back({d.x, -I * d.mu * momentum(d.x)});
    }
  }
  SystemModel m = model;
  TwoComponentState s;
  s.phi = Field([chain, n](double x) { return chain->value(x, n); });
  s.phat = Field([m, momentum](double x) { return -I * inertia_at(m, x) * momentum(x); }, std::move(pts));
  return s;
}

JordanBlock::JordanBlock(SystemModel model, cdouble omega, int multiplicity, cdouble w_lead,
                         std::shared_ptr<const ModeSolution> chain, cdouble scale)
    : model_(std::move(model)),
      omega_(omega),
      m_(multiplicity),
      w_lead_(w_lead),
      chain_(std::move(chain)),
      scale_(scale) {}

std::vector<cdouble> JordanBlock::values(double x) const {
  const FieldJet s = chain_->at(x);
  std::vector<cdouble> out(static_cast<std::size_t>(m_));
  for (int n = 0; n < m_; ++n) out[static_cast<std::size_t>(n)] = s.f[n];
  return out;
}

cdouble JordanBlock::momentum(double x, int n) const {
  const FieldJet s = chain_->at(x);
  return -I * inertia_at(model_, x) * (omega_ * s.f[n] + (n > 0 ? s.f[n - 1] : cdouble(0.0)));
}

TwoComponentState JordanBlock::basis(int n) const {
  if (n < 0 || n >= m_) throw ValidationError("basis index out of range");
  return chain_state(model_, chain_, n);
}

TwoComponentState JordanBlock::time_basis(int n, double t) const {
  if (n < 0 || n >= m_) throw ValidationError("basis index out of range");
  std::vector<TwoComponentState> states;
  std::vector<cdouble> coeffs;
  const cdouble e = std::exp(-I * omega_ * t);
  cdouble p = 1.0;
  for (int m = 0; m <= n; ++m) {
    states.push_back(basis(n - m));
    coeffs.push_back(e * p);
    p *= -I * t / double(m + 1);
  }
  return linear_combination(states, coeffs);
}

TwoComponentState JordanBlock::dual(int n) const {
  if (n < 0 || n >= m_) throw ValidationError("dual index out of range");
  return flip(basis(m_ - 1 - n));
}

JordanBlock build_block(const SystemModel& model, cdouble omega, int multiplicity, const BlockOptions& opt) {
  require_valid(model);
  const int M = multiplicity;
  if (M < 1 || 2 * M > kMaxJetSize) throw ValidationError("multiplicity out of range");
  const Propagator prop(model);
  const ModeSolution raw = prop.left(CJet::variable(2 * M, omega));
  const CJet wt = normalized_wronskian(raw);

  double scale = 0.0;
  for (int n = 0; n < 2 * M; ++n) scale = std::max(scale, std::abs(wt[n]));
  for (int n = 0; n < M; ++n)
    if (std::abs(wt[n]) > opt.multiplicity_tolerance * scale)
      throw InvariantError("multiplicity mismatch: W_" + std::to_string(n) + " does not vanish");
  const cdouble wm = wt[M];
  if (!(std::abs(wm) > opt.multiplicity_tolerance * scale))
    throw InvariantError("multiplicity mismatch: W_" + std::to_string(M) + " vanishes");

  // N = (W~ / (W_M e^M))^{-1/2}, kept to order M-1
  CJet ratio(2 * M);
  for (int k = 0; k < M; ++k) ratio[k] = wt[M + k] / wm;
  CJet norm = inverse(sqrt(ratio));
  for (int k = M; k < 2 * M; ++k) norm[k] = 0.0;

  cdouble c = 1.0;
  if (opt.normalization == Normalization::Preferred) {
    c = std::sqrt(-2.0 * omega / wm);
    const cdouble d = c * raw.nodes().front().df[0];
    const bool flip_sign = std::abs(d.imag()) > 1e-12 * std::abs(d) ? d.imag() < 0.0 : d.real() < 0.0;
    if (flip_sign) c = -c;
  }
  auto chain = std::make_shared<const ModeSolution>(
      std::make_shared<const std::vector<Piece>>(raw.pieces()), raw.domain_left(), raw.omega(), Side::Left,
      scaled_nodes(raw, norm * c));
  const cdouble w_lead = c * c * wm;
  return JordanBlock(model, omega, M, w_lead, std::move(chain), c);
}

std::vector<cdouble> normalized_wronskian_taylor(const JordanBlock& block) {
  const CJet w = normalized_wronskian(block.chain());
  std::vector<cdouble> out(static_cast<std::size_t>(w.size()));
  for (int n = 0; n < w.size(); ++n) out[static_cast<std::size_t>(n)] = w[n];
  return out;
}

Eigen::MatrixXcd biorthogonality_matrix(const JordanBlock& block) {
  const int M = block.multiplicity();
  std::vector<TwoComponentState> b;
  for (int n = 0; n < M; ++n) b.push_back(block.basis(n));
  Eigen::MatrixXcd out(M, M);
  for (int n = 0; n < M; ++n)
    for (int m = n; m < M; ++m) out(n, m) = out(m, n) = bilinear(block.model(), b[std::size_t(n)], b[std::size_t(m)]);
  return out;
}

double inter_block_orthogonality_check(const JordanBlock& a, const JordanBlock& b) {
  double worst = 0.0;
  for (int n = 0; n < a.multiplicity(); ++n)
    for (int m = 0; m < b.multiplicity(); ++m)
      worst = std::max(worst, std::abs(bilinear(a.model(), a.basis(n), b.basis(m))));
  return worst;
}

ProductCheck unnormalized_product_check(const SystemModel& model, cdouble omega, int multiplicity) {
  require_valid(model);
  const int M = multiplicity;
  if (M < 1 || 2 * M > kMaxJetSize) throw ValidationError("multiplicity out of range");
  const Propagator prop(model);
  auto f = std::make_shared<const ModeSolution>(prop.left(CJet::variable(M, omega)));
  auto g = std::make_shared<const ModeSolution>(prop.right(CJet::variable(M, omega)));
  const CJet w = prop.wronskian(CJet::variable(2 * M, omega));
  ProductCheck r;
  r.product.resize(M, M);
  r.expected.resize(M, M);
  for (int n = 0; n < 2 * M; ++n) r.scale = std::max(r.scale, std::abs(w[n]));
  for (int n = 0; n < M; ++n) {
    for (int m = 0; m < M; ++m) {
      r.product(n, m) = bilinear(model, chain_state(model, f, n), chain_state(model, g, m));
      r.expected(n, m) = -w[n + m + 1];
      r.max_residual = std::max(r.max_residual, std::abs(r.product(n, m) - r.expected(n, m)));
    }
  }
  return r;
}

std::vector<Eigen::VectorXcd> gram_dual(const std::vector<Eigen::VectorXcd>& v,
                                        const std::vector<Eigen::VectorXcd>& w) {
  return gram_dual(
      v, w, [](const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) { return a.dot(b); },
      [](const std::vector<Eigen::VectorXcd>& basis, const std::vector<cdouble>& c) {
        Eigen::VectorXcd out = Eigen::VectorXcd::Zero(basis.front().size());
        for (std::size_t k = 0; k < basis.size(); ++k) out += c[k] * basis[k];
        return out;
      });
}

std::vector<TwoComponentState> gram_dual(const SystemModel& model, const std::vector<TwoComponentState>& v,
                                         const std::vector<TwoComponentState>& w) {
  return gram_dual(
      v, w, [&](const TwoComponentState& a, const TwoComponentState& b) { return cavity_inner(model, a, b); },
      [](const std::vector<TwoComponentState>& basis, const std::vector<cdouble>& c) {
        return linear_combination(basis, c);
      });
}

}  // namespace qnm
