#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qnm/model.hpp"

namespace qnm {

// Closed-form profile f on [0, 1] with its first two derivatives. A double
// pole at -i gamma is built with f as the zero mode.
struct Profile {
  std::string name;
  std::function<double(double)> f, df, d2f;
};

Profile sinh_profile(double K);
Profile linear_profile();
// f = x + alpha x^n
Profile power_profile(double alpha, int n);
// c f
Profile scaled_profile(const Profile& p, double c);

// f(0) = 0, f'(0) > 0, f'' > 0 on (0, 1], checked on a sample grid.
bool profile_admissible_shape(const Profile& p, std::string* why = nullptr);

// gamma = 2 int_0^1 f'^2 dx / f(1)^2. Throws ValidationError when f(1) = 0.
double gamma_from_profile(const Profile& p);

// mu = 1/gamma - f'(1) / (gamma^2 f(1))
double point_mass_from_profile(const Profile& p, double gamma);

struct ConstructOptions {
  int segments = 4000;
  // adjacent segments whose values agree to this relative tolerance are merged
  double merge_tolerance = 1e-13;
};

// rho = f'' / (gamma^2 f) sampled at segment midpoints, point mass mu at x = 1.
// Throws ValidationError for a profile of the wrong shape and for mu < 0.
SystemModel rho_from_profile(const Profile& p, double gamma, const ConstructOptions& opt = {});

// gamma^2 W_{0,2}: zero for a third-order pole of the constructed model.
double w02_functional(const Profile& p);
// i gamma^3 W_{0,3}: zero together with W02 for a fourth-order pole.
double w03_functional(const Profile& p);

struct MultiplicityCheck {
  int winding = 0;                   // zeros of the N-segment model inside the circle
  double radius = 0.0;
  std::vector<double> relative_raw;  // |W_k| / |W_3|, k < 3, at -i gamma for N segments
  std::vector<double> relative;      // the same after extrapolating N, 2N to zero step
};

// Checks a third-order zero at -i gamma. The sampled density splits it into
// three zeros a distance O(N^{-2/3}) apart; the circle radius is chosen from
// the Taylor coefficients to enclose them.
MultiplicityCheck verify_multiplicity(const Profile& p, double gamma, const ConstructOptions& opt = {});

struct ThirdOrderRoot {
  double alpha = 0.0;
  double w02 = 0.0;   // residual at the root
  double w03 = 0.0;
  double gamma = 0.0;
  double mu = 0.0;
  bool admissible = false;
  std::optional<SystemModel> model;            // admissible roots only
  std::optional<MultiplicityCheck> multiplicity;
};

struct SearchOptions {
  int grid = 200;
  double alpha_tolerance = 1e-12;
  bool verify = true;
  ConstructOptions construct;
};

// Zeros of alpha -> W02(x + alpha x^n) in [alpha_lo, alpha_hi].
std::vector<ThirdOrderRoot> third_order_search(int n, double alpha_lo, double alpha_hi, const SearchOptions& opt = {});

}  // namespace qnm
