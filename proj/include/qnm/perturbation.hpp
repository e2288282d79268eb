#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "qnm/jordan.hpp"
#include "qnm/model.hpp"

namespace qnm {

// First-order change of a wave model: rho^{-1} -> rho^{-1} + lambda d on the
// given segments, mu_k -> mu_k + lambda dmu_k at point masses.
struct Perturbation {
  std::vector<Segment> delta_rho_inv;
  std::vector<PointMass> delta_mu;

  bool empty() const { return delta_rho_inv.empty() && delta_mu.empty(); }
};

// Perturbation equivalent to an infinitesimal delta rho (d = -delta rho / rho^2).
Perturbation from_delta_rho(const SystemModel& model, const std::vector<Segment>& delta_rho,
                            const std::vector<PointMass>& delta_mu = {});

// d rho / dK and d mu / dK of the built-in double-pole model, gamma(K) included.
Perturbation double_pole_k_shift(double K);

SystemModel perturbed_model(const SystemModel& model, const Perturbation& p, double lambda);

// H'_{nm} = (f_{M-1-n}, H' f_m) / (f_{M-1}, f_0) within one block.
Eigen::MatrixXcd perturbation_matrix(const JordanBlock& block, const Perturbation& p);

// The single element of the splitting part, H'_{M-1,0}.
cdouble splitting_alpha(const JordanBlock& block, const Perturbation& p);
cdouble splitting_alpha(const JordanBlock& block, const std::vector<Segment>& delta_rho_inv);

struct SplitReport {
  cdouble omega;
  int multiplicity = 0;
  double lambda = 0.0;
  cdouble alpha;
  cdouble s;                                          // principal root of lambda alpha
  std::vector<cdouble> frequencies;                   // omega + s e^{2 pi i n / M}
  std::vector<std::vector<cdouble>> eigenvectors;     // coefficients s^m e^{2 pi i n m / M}
  cdouble second_order;                               // lambda H'_00, when known
  std::string note;
};

// Principal M-th root, argument in (-pi/M, pi/M].
cdouble principal_root(cdouble z, int m);

// Throws NonGenericError when alpha = 0.
SplitReport split_block(cdouble omega, int multiplicity, double lambda, cdouble alpha);
SplitReport split_block(const JordanBlock& block, double lambda, cdouble alpha);

// |f~_{j,n}> and its dual flip(|f~_{j,n}>).
TwoComponentState split_eigenvector(const JordanBlock& block, const SplitReport& r, int n);
TwoComponentState split_dual(const JordanBlock& block, const SplitReport& r, int n);

struct SecondOrderShift {
  cdouble total;         // H'_00 per unit lambda
  cdouble alpha_part;    // beta alpha, from the part of f_{j,1} along f_j
  cdouble beta;          // f'_{j,1}(left) / f'_j(left)
};

// M = 2 only.
SecondOrderShift second_order_shift(const JordanBlock& block, const Perturbation& p);

// Matrix of lambda H~' in the split basis, H~' = H' - H'_s.
Eigen::MatrixXcd transformed_matrix(const JordanBlock& block, const Perturbation& p, double lambda);

struct RootTrack {
  std::vector<double> lambdas;
  std::vector<std::vector<cdouble>> roots;   // per lambda, sorted by Im then Re
  cdouble omega1_sq;                         // fitted coefficient of lambda in ((w+ - w-)/2)^2
  cdouble omega2;                            // fitted coefficient of lambda in (w+ + w-)/2 - omega_j
  double fit_residual = 0.0;
};

// Follows the two zeros split from a double pole for each lambda and fits
// omega = omega_j + omega1 sqrt(lambda) + omega2 lambda. Throws NumericalError
// when a zero cannot be followed.
RootTrack direct_root_track(const JordanBlock& block, const Perturbation& p, const std::vector<double>& lambdas);

// d W / d lambda at omega_j by central difference (raw Wronskian, scale-relative
// to the leading nonzero Taylor coefficient).
double relative_wronskian_lambda_derivative(const JordanBlock& block, const Perturbation& p, double h = 1e-6);

struct NonGenericDemo {
  Eigen::MatrixXcd matrix;
  std::vector<cdouble> eigenvalues;
  Eigen::VectorXcd charpoly;          // monic, highest power first, from the eigenvalues
  Eigen::VectorXcd expected_charpoly; // [(w - w_j)^2 - lambda alpha]^2
  double charpoly_error = 0.0;        // max coefficient difference
  int rank1 = 0;                      // rank of H - w~ at w~ = w_j + sqrt(lambda alpha)
  int rank2 = 0;                      // rank of (H - w~)^2
};

NonGenericDemo nongeneric_4x4_demo(cdouble alpha, double lambda, cdouble omega_j = 0.0);

}  // namespace qnm
