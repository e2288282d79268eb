#pragma once

#include <Eigen/Dense>
#include <complex>
#include <memory>
#include <vector>

#include "qnm/errors.hpp"
#include "qnm/model.hpp"
#include "qnm/odeint.hpp"
#include "qnm/state.hpp"

namespace qnm {

enum class Normalization {
  Preferred,  // W_{j,M} = -2 omega_j, sign fixed by Im f'_{j,0}(left) >= 0
  Unit        // overall scale of the raw left solution kept (f'(left) = 1 for a node)
};

struct BlockOptions {
  Normalization normalization = Normalization::Preferred;
  double multiplicity_tolerance = 1e-8;  // |W_n| / max_m |W_m| below which W_n counts as zero
};

// Two-component state built from one Taylor coefficient of a mode solution:
// phi = f_n, phat = -i rho (omega0 f_n + f_{n-1}) with point weights at delta masses.
TwoComponentState chain_state(const SystemModel& model, std::shared_ptr<const ModeSolution> chain, int n);

// Coefficient of omega^2 in the spatial equation at x (rho for waves, 1 otherwise).
double inertia_at(const SystemModel& model, double x);

// Normalized Jordan-block basis f_{j,n}, n < M, at one zero of W.
class JordanBlock {
 public:
  JordanBlock(SystemModel model, cdouble omega, int multiplicity, cdouble w_lead,
              std::shared_ptr<const ModeSolution> chain, cdouble scale);

  cdouble omega() const { return omega_; }
  int multiplicity() const { return m_; }
  cdouble w_lead() const { return w_lead_; }
  // Overall constant applied on top of the series normalization.
  cdouble scale() const { return scale_; }
  const SystemModel& model() const { return model_; }
  // Normalized solution as a jet of size 2M in (omega - omega_j).
  const ModeSolution& chain() const { return *chain_; }

  cdouble value(double x, int n) const { return chain_->value(x, n); }
  cdouble slope(double x, int n) const { return chain_->slope(x, n); }
  // f_{j,n}(x) for all n < M at once.
  std::vector<cdouble> values(double x) const;
  // Density part of the momentum f^_{j,n}.
  cdouble momentum(double x, int n) const;

  TwoComponentState basis(int n) const;
  // |f_{j,n}(t)> = e^{-i omega t} sum_m f_{j,n-m} (-it)^m / m!
  TwoComponentState time_basis(int n, double t) const;
  // f^{j,n} = flip(f_{j,M-1-n})
  TwoComponentState dual(int n) const;

 private:
  SystemModel model_;
  cdouble omega_;
  int m_;
  cdouble w_lead_;
  std::shared_ptr<const ModeSolution> chain_;
  cdouble scale_;
};

JordanBlock build_block(const SystemModel& model, cdouble omega, int multiplicity, const BlockOptions& opt = {});

// Matrix B_{nm} = (f_{j,n}, f_{j,m}).
Eigen::MatrixXcd biorthogonality_matrix(const JordanBlock& block);

// Taylor coefficients W_0..W_{2M-1} of the normalized Wronskian
// f(a+)(f'(a+) - i omega f(a+)) of the block chain.
std::vector<cdouble> normalized_wronskian_taylor(const JordanBlock& block);

// max |(f_{a,n}, f_{b,m})|
double inter_block_orthogonality_check(const JordanBlock& a, const JordanBlock& b);

struct ProductCheck {
  Eigen::MatrixXcd product;   // (f_n, g_m) with raw chains
  Eigen::MatrixXcd expected;  // -W_{n+m+1}
  double max_residual = 0.0;  // max |product - expected|
  double scale = 0.0;         // max |W_n|, n <= 2M-1
};

ProductCheck unnormalized_product_check(const SystemModel& model, cdouble omega, int multiplicity);

// Duals w^m = sum_k conj((G^{-1})_{mk}) w~_k with G_{kn} = <w~_k|v_n>, so that
// <w^m|v_n> = delta. Throws SingularMetricError when sigma_min < 1e-10 sigma_max.
template <typename Vec, typename Inner, typename Combine>
std::vector<Vec> gram_dual(const std::vector<Vec>& v, const std::vector<Vec>& w, Inner&& inner,
                           Combine&& combine) {
  const auto m = static_cast<Eigen::Index>(v.size());
  if (w.size() != v.size() || m == 0) throw ValidationError("gram_dual needs equal, non-zero counts");
  Eigen::MatrixXcd g(m, m);
  for (Eigen::Index k = 0; k < m; ++k)
    for (Eigen::Index n = 0; n < m; ++n) g(k, n) = inner(w[static_cast<std::size_t>(k)], v[static_cast<std::size_t>(n)]);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(g, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (!(sv(m - 1) >= 1e-10 * sv(0)))
    throw SingularMetricError("metric matrix is singular: the dual space meets the orthogonal complement");
  const Eigen::MatrixXcd ginv = svd.solve(Eigen::MatrixXcd::Identity(m, m));
  std::vector<Vec> out;
  out.reserve(v.size());
  for (Eigen::Index r = 0; r < m; ++r) {
    std::vector<cdouble> c(static_cast<std::size_t>(m));
    for (Eigen::Index k = 0; k < m; ++k) c[static_cast<std::size_t>(k)] = std::conj(ginv(r, k));
    out.push_back(combine(w, c));
  }
  return out;
}

// Finite-dimensional form with the standard Hermitian product.
std::vector<Eigen::VectorXcd> gram_dual(const std::vector<Eigen::VectorXcd>& v,
                                        const std::vector<Eigen::VectorXcd>& w);

// States with the cavity inner product of `model`.
std::vector<TwoComponentState> gram_dual(const SystemModel& model, const std::vector<TwoComponentState>& v,
                                         const std::vector<TwoComponentState>& w);

}  // namespace qnm
