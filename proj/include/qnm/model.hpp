#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace qnm {

enum class Kind { Wave, KleinGordon };
enum class LeftBoundary { Node, Outgoing };

// Constant density (Wave) or potential (KleinGordon) on [x_lo, x_hi].
struct Segment {
  double x_lo = 0.0;
  double x_hi = 0.0;
  double value = 0.0;
  friend bool operator==(const Segment&, const Segment&) = default;
};

// mu * delta(x - x0): a point mass in rho (Wave) or a point term in V (KleinGordon).
struct PointMass {
  double x = 0.0;
  double mu = 0.0;
  friend bool operator==(const PointMass&, const PointMass&) = default;
};

// A 1-d open system on [domain_left, a] with a trivial exterior beyond a
// (rho = 1 or V = 0). A delta located exactly at a belongs to the cavity.
struct SystemModel {
  Kind kind = Kind::Wave;
  double domain_left = 0.0;
  LeftBoundary boundary_left = LeftBoundary::Node;
  double a = 1.0;
  std::vector<Segment> segments;
  std::vector<PointMass> deltas;

  double exterior_value() const { return kind == Kind::Wave ? 1.0 : 0.0; }
  double length() const { return a - domain_left; }
  friend bool operator==(const SystemModel&, const SystemModel&) = default;
};

struct ValidationReport {
  bool tiling_ok = true;
  bool positivity_ok = true;
  bool deltas_ok = true;
  bool discontinuity_at_a = false;
  std::vector<std::string> errors;
  std::vector<std::string> warnings;

  bool ok() const { return errors.empty(); }
};

// Never throws; collects every violated invariant.
ValidationReport validate(const SystemModel& model);

// Throws ValidationError with the first error of validate().
void require_valid(const SystemModel& model);

SystemModel load_model(const std::filesystem::path& path);
SystemModel parse_model(const std::string& text);
std::string serialize_model(const SystemModel& model);
void save_model(const SystemModel& model, const std::filesystem::path& path);

// gamma = K coth K + K^2 / sinh^2 K
double double_pole_gamma(double K);

// rho = K^2/gamma^2 on (0,1), point mass K^2/(gamma^2 sinh^2 K) at x = 1.
// The Wronskian has a double zero at omega = -i gamma.
SystemModel builtin_double_pole_model(double K);

// rho = 1 on (0, a), no point masses: the free half-line.
SystemModel free_half_line(double a = 1.0);

// Uniform slab rho = n^2 on (0, a).
SystemModel uniform_slab(double n, double a = 1.0);

// Samples rho(x) (or V(x)) at segment midpoints on [x_lo, x_hi].
template <typename Profile>
std::vector<Segment> sample_segments(double x_lo, double x_hi, int count, Profile&& profile) {
  std::vector<Segment> out;
  out.reserve(static_cast<std::size_t>(count));
  const double h = (x_hi - x_lo) / count;
  for (int i = 0; i < count; ++i) {
    const double lo = x_lo + i * h;
    const double hi = (i + 1 == count) ? x_hi : x_lo + (i + 1) * h;
    out.push_back({lo, hi, profile(0.5 * (lo + hi))});
  }
  return out;
}

// One constant-coefficient piece of f'' + (c omega^2 - v) f = 0, with an
// optional point term at its left edge: f'(x+) - f'(x-) = -(jc omega^2 - jv) f(x).
struct Piece {
  double x_lo;
  double x_hi;  // +inf for the exterior piece
  double c;     // coefficient of omega^2
  double v;     // omega-independent part
  double jump_c = 0.0;
  double jump_v = 0.0;
};

// Pieces of the model from domain_left to infinity: every segment boundary and
// delta location becomes a node; the last piece is the exterior beyond a, and
// its jump holds any delta located at a.
std::vector<Piece> make_pieces(const SystemModel& model);

}  // namespace qnm
