#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "qnm/model.hpp"

namespace qnm {

using cdouble = std::complex<double>;

// Closed-form zeros of the untruncated V0 sech^2 x potential: one pair per j,
// (plus branch, minus branch), j = 0..j_max.
std::vector<std::pair<cdouble, cdouble>> pt_exact_frequencies(double V0, int j_max);

// V0 sech^2 x sampled at segment midpoints on [-L, L], outgoing at both ends.
SystemModel build_truncated_pt(double V0, double L, int segments = 2000);

struct PTCriticalOptions {
  int initial_segments = 2000;
  int max_doublings = 5;
  double tolerance = 1e-6;  // on the extrapolated V0 between successive doublings
};

struct PTCriticalPoint {
  double V0 = 0.0;
  cdouble omega;
  int segments = 0;                    // finest segment count used
  std::vector<double> raw_V0;          // per segment count
  std::vector<cdouble> raw_omega;
  double change = 0.0;                 // last change of the extrapolated V0
};

// Critical point where the j = 0 pair of the truncated potential merges into a
// double zero. Segment counts double until the extrapolated V0 settles to the
// tolerance; throws NumericalError when it does not.
PTCriticalPoint pt_critical_point(double L, const PTCriticalOptions& opt = {});

}  // namespace qnm
