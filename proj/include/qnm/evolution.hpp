#pragma once

#include <complex>
#include <vector>

#include "qnm/jordan.hpp"
#include "qnm/parallel.hpp"
#include "qnm/model.hpp"
#include "qnm/spectral.hpp"
#include "qnm/state.hpp"

namespace qnm {

// a[j][n]: coefficient of f_{j,n}(t) for block j.
struct ModalCoefficients {
  std::vector<std::vector<cdouble>> a;
};

// Blocks for every zero with |omega| <= cutoff and Im omega in [-depth, -notch].
std::vector<JordanBlock> build_blocks(const SystemModel& model, double cutoff, double depth,
                                      const BlockOptions& opt = {}, double notch = 1e-3);

std::vector<TwoComponentState> time_basis(const JordanBlock& block, double t);

// a_{j,n} = -(f_{j,M-1-n}, phi) / W_{j,M}
ModalCoefficients project(const SystemModel& model, const std::vector<JordanBlock>& blocks,
                          const TwoComponentState& state);
// a_{j,n} = <f^{j,n}|phi> / <f^{j,n}|f_{j,n}> with the cavity inner product.
ModalCoefficients project_dual(const SystemModel& model, const std::vector<JordanBlock>& blocks,
                               const TwoComponentState& state);

// Coefficients on the t = 0 basis after time t: inside each block the
// upper-triangular exponential exp(-i t J).
ModalCoefficients advance(const std::vector<JordanBlock>& blocks, const ModalCoefficients& c, double t);

TwoComponentState synthesize(const std::vector<JordanBlock>& blocks, const ModalCoefficients& c);
TwoComponentState evolve_modal(const SystemModel& model, const std::vector<JordanBlock>& blocks,
                               const TwoComponentState& state, double t);

// phi(x) of the expansion for many x at once (fast path).
std::vector<cdouble> modal_field(const std::vector<JordanBlock>& blocks, const ModalCoefficients& c,
                                 const std::vector<double>& xs);

// G(x,y;t) = i sum_j sum_n f_{j,M-1-n}(y) f_{j,n}(x,t) / (f_{j,M-1-n}, f_{j,n})
cdouble greens_kernel(const std::vector<JordanBlock>& blocks, double x, double y, double t);

struct SumRuleResult {
  double first_component_residual = 0.0;  // |int S_1 g|
  double second_component_error = 0.0;    // |int S_2 g - g(y)|, g(y) = 1
};

// The t -> 0 mode sum smeared against exp(-(x-y)^2 / (2 width^2)). With
// max_members >= 0 only the members n < max_members of each block enter.
SumRuleResult sum_rule_check(const SystemModel& model, const std::vector<JordanBlock>& blocks, double y,
                             double width, int max_members = -1);

struct ReferenceOptions {
  double margin = 1.0;         // extra exterior beyond the light cone
  bool exterior_data = false;  // sample the state beyond the cavity too
};

struct Snapshot {
  double t = 0.0;
  std::vector<double> x;       // cavity grid
  std::vector<cdouble> phi;
  std::vector<cdouble> phat;   // density rho * phi_t

  TwoComponentState as_state() const;  // piecewise-linear interpolation
};

// Leapfrog with lumped masses on an extended domain; exterior data never
// return, so the cavity solution is free of boundary reflections.
std::vector<Snapshot> evolve_reference(const SystemModel& model, const TwoComponentState& state,
                                       const std::vector<double>& times, double dx, double dt,
                                       const ReferenceOptions& opt = {});
TwoComponentState evolve_reference(const SystemModel& model, const TwoComponentState& state, double t,
                                   double dx, double dt);

// sqrt(int |u - v|^2) / sqrt(int |v|^2) over the samples (trapezoid, uniform grid).
double relative_l2(const std::vector<cdouble>& u, const std::vector<cdouble>& v);

}  // namespace qnm
