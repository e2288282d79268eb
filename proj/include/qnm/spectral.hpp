#pragma once

#include <complex>
#include <functional>
#include <utility>
#include <vector>

#include "qnm/model.hpp"
#include "qnm/odeint.hpp"

namespace qnm {

// Axis-aligned rectangle in the complex omega plane.
struct Box {
  double re_lo = 0.0;
  double re_hi = 0.0;
  double im_lo = 0.0;
  double im_hi = 0.0;

  cdouble center() const { return {0.5 * (re_lo + re_hi), 0.5 * (im_lo + im_hi)}; }
  double width() const { return re_hi - re_lo; }
  double height() const { return im_hi - im_lo; }
  double diameter() const { return std::hypot(width(), height()); }
  bool contains(cdouble z, double pad = 0.0) const {
    return z.real() >= re_lo - pad && z.real() <= re_hi + pad && z.imag() >= im_lo - pad &&
           z.imag() <= im_hi + pad;
  }
  static Box around(cdouble z, double half) {
    return {z.real() - half, z.real() + half, z.imag() - half, z.imag() + half};
  }
};

struct SpectralZero {
  cdouble omega;
  int multiplicity = 1;
  double residual = 0.0;  // |W(omega)| relative to the local scale of W
  cdouble w_lead;         // W_M = (1/M!) d^M W / d omega^M at omega
};

struct SpectrumReport {
  std::vector<SpectralZero> zeros;  // sorted by Re, then Im
  Box search_box;
  int total_count = 0;  // winding number of the search box
};

struct ContourOptions {
  double initial_step = 1.0 / 64;  // fraction of an edge
  double min_step = 1e-10;         // fraction of an edge before giving up
  double min_abs_fraction = 0.0;   // optional |W| floor relative to the largest |W| seen
  double max_log_change = 0.5;     // bound on |dz| |W'/W| per step
};

struct RefineOptions {
  int max_iterations = 100;
  double max_distance = 1.0;        // Newton may not wander further than this from the seed
  double circle_radius = 0.0;       // multiplicity circle; 0 selects 1e-3 max(1, |omega|)
  double residual_tolerance = 1e-10;
};

struct SpectrumOptions {
  ContourOptions contour;
  RefineOptions refine;
  double refine_diameter = 0.25;     // try Newton once a box is this small (relative to the search box)
  double min_diameter = 1e-7;        // absolute; below this a cluster is reported unresolved
};

cdouble wronskian(const SystemModel& model, cdouble omega);

// W_n = (1/n!) d^n W / d omega^n at omega0 for n = 0..order.
std::vector<cdouble> wronskian_taylor(const SystemModel& model, cdouble omega0, int order);
std::vector<cdouble> wronskian_taylor(const Propagator& prop, cdouble omega0, int order);

// Winding number of a closed path under W by adaptive phase tracking. `w`
// returns (W, dW/domega); each edge maps [0,1] onto part of the path.
int winding_number(const std::function<std::pair<cdouble, cdouble>(cdouble)>& w,
                   const std::vector<std::function<cdouble(double)>>& edges,
                   const ContourOptions& opt = {});

int count_zeros(const Propagator& prop, const Box& box, const ContourOptions& opt = {});
int count_zeros(const SystemModel& model, const Box& box, const ContourOptions& opt = {});
int winding_on_circle(const Propagator& prop, cdouble center, double radius,
                      const ContourOptions& opt = {});

// Newton on W/W' (simple zeros regardless of multiplicity), multiplicity from
// the winding number on a small circle, leading coefficient from the Taylor series.
SpectralZero refine_zero(const Propagator& prop, cdouble seed, const RefineOptions& opt = {});
SpectralZero refine_zero(const SystemModel& model, cdouble seed, const RefineOptions& opt = {});

// All zeros in the box with multiplicities, by recursive subdivision.
SpectrumReport spectrum(const Propagator& prop, const Box& box, const SpectrumOptions& opt = {});
SpectrumReport spectrum(const SystemModel& model, const Box& box, const SpectrumOptions& opt = {});

using ModelFamily = std::function<SystemModel(double)>;

struct DoublePoleResult {
  double parameter = 0.0;
  cdouble omega;
  int iterations = 0;
  double residual = 0.0;  // max(|W|, |W'|) relative to |W''|
};

struct DoublePoleOptions {
  int max_iterations = 50;
  double parameter_step = 1e-6;  // relative finite-difference step in the family parameter
  double tolerance = 1e-13;
};

// Gauss-Newton on (W, dW/domega) = (0, 0) over (p real, omega complex).
DoublePoleResult find_double_pole_2d(const ModelFamily& family, double p_seed, cdouble omega_seed,
                                     const DoublePoleOptions& opt = {});

}  // namespace qnm
