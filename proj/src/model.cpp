#include "qnm/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "qnm/errors.hpp"

namespace qnm {

namespace {

using nlohmann::json;

double node_tolerance(const SystemModel& m) { return 1e-12 * std::max(1.0, std::abs(m.length())); }

const char* kind_name(Kind k) { return k == Kind::Wave ? "wave" : "klein_gordon"; }
const char* boundary_name(LeftBoundary b) { return b == LeftBoundary::Node ? "node" : "outgoing"; }

double number(const json& j, const char* what) {
  if (!j.is_number()) throw ParseError(std::string("expected a number for ") + what);
  return j.get<double>();
}

}  // namespace

ValidationReport validate(const SystemModel& m) {
  ValidationReport r;
  const double tol = node_tolerance(m);
  if (!(std::isfinite(m.a) && std::isfinite(m.domain_left)) || !(m.a > m.domain_left)) {
    r.tiling_ok = false;
    r.errors.push_back("cavity edge a must exceed domain_left");
  }
  if (m.segments.empty()) {
    r.tiling_ok = false;
    r.errors.push_back("model has no segments");
  } else {
    if (std::abs(m.segments.front().x_lo - m.domain_left) > tol) {
      r.tiling_ok = false;
      r.errors.push_back("segments must start at domain_left");
    }
    if (std::abs(m.segments.back().x_hi - m.a) > tol) {
      r.tiling_ok = false;
      r.errors.push_back("segments must end at a");
    }
    for (std::size_t i = 0; i < m.segments.size(); ++i) {
      const auto& s = m.segments[i];
      if (!(s.x_hi > s.x_lo)) {
        r.tiling_ok = false;
        r.errors.push_back("segment " + std::to_string(i) + " is empty or reversed");
      }
      if (i > 0 && std::abs(m.segments[i - 1].x_hi - s.x_lo) > tol) {
        r.tiling_ok = false;
        r.errors.push_back("gap or overlap between segments " + std::to_string(i - 1) + " and " +
                           std::to_string(i));
      }
      if (!std::isfinite(s.value)) {
        r.positivity_ok = false;
        r.errors.push_back("segment " + std::to_string(i) + " has a non-finite value");
      } else if (m.kind == Kind::Wave && !(s.value > 0.0)) {
        r.positivity_ok = false;
        r.errors.push_back("density must be positive (segment " + std::to_string(i) + ")");
      }
    }
  }
  for (std::size_t i = 0; i < m.deltas.size(); ++i) {
    const auto& d = m.deltas[i];
    if (!(d.x > m.domain_left + tol) || d.x > m.a + tol) {
      r.deltas_ok = false;
      r.errors.push_back("delta " + std::to_string(i) + " lies outside (domain_left, a]");
    }
    if (!std::isfinite(d.mu) || (m.kind == Kind::Wave && d.mu < 0.0)) {
      r.deltas_ok = false;
      r.errors.push_back("point mass must be non-negative (delta " + std::to_string(i) + ")");
    }
  }
  if (!m.segments.empty()) {
    bool jump = m.segments.back().value != m.exterior_value();
    for (const auto& d : m.deltas)
      if (std::abs(d.x - m.a) <= tol && d.mu != 0.0) jump = true;
    r.discontinuity_at_a = jump;
    if (!jump)
      r.warnings.push_back("no discontinuity at a: completeness of the pole expansion is not guaranteed");
    if (m.kind == Kind::KleinGordon && m.boundary_left == LeftBoundary::Outgoing &&
        m.segments.front().value == 0.0)
      r.warnings.push_back("no discontinuity at domain_left");
  }
  if (m.kind == Kind::Wave && m.boundary_left != LeftBoundary::Node)
    r.warnings.push_back("wave models with an outgoing left boundary are outside the Jordan-block tooling");
  return r;
}

void require_valid(const SystemModel& m) {
  auto r = validate(m);
  if (!r.ok()) throw ValidationError(r.errors.front());
}

SystemModel parse_model(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("model file is not valid structured text: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("model file must hold an object");
  SystemModel m;
  try {
    const std::string kind = j.value("kind", std::string("wave"));
    if (kind == "wave")
      m.kind = Kind::Wave;
    else if (kind == "klein_gordon")
      m.kind = Kind::KleinGordon;
    else
      throw ParseError("unknown model kind '" + kind + "'");
    m.boundary_left = m.kind == Kind::Wave ? LeftBoundary::Node : LeftBoundary::Outgoing;
    if (j.contains("boundary_left")) {
      const auto b = j.at("boundary_left").get<std::string>();
      if (b == "node")
        m.boundary_left = LeftBoundary::Node;
      else if (b == "outgoing")
        m.boundary_left = LeftBoundary::Outgoing;
      else
        throw ParseError("unknown boundary_left '" + b + "'");
    }
    if (!j.contains("a")) throw ParseError("missing field 'a'");
    m.a = number(j.at("a"), "a");
    m.domain_left = j.contains("domain_left") ? number(j.at("domain_left"), "domain_left") : 0.0;
    if (!j.contains("segments") || !j.at("segments").is_array())
      throw ParseError("missing array field 'segments'");
    for (const auto& s : j.at("segments")) {
      if (!s.is_array() || s.size() != 3) throw ParseError("segment entries must be [x_lo, x_hi, value]");
      m.segments.push_back({number(s[0], "x_lo"), number(s[1], "x_hi"), number(s[2], "value")});
    }
    if (j.contains("deltas")) {
      if (!j.at("deltas").is_array()) throw ParseError("'deltas' must be an array");
      for (const auto& d : j.at("deltas")) {
        if (!d.is_array() || d.size() != 2) throw ParseError("delta entries must be [x, mu]");
        m.deltas.push_back({number(d[0], "x"), number(d[1], "mu")});
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed model file: ") + e.what());
  }
  require_valid(m);
  return m;
}

SystemModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open model file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

std::string serialize_model(const SystemModel& m) {
  json j;
  j["kind"] = kind_name(m.kind);
  j["boundary_left"] = boundary_name(m.boundary_left);
  j["domain_left"] = m.domain_left;
  j["a"] = m.a;
  json segs = json::array();
  for (const auto& s : m.segments) segs.push_back({s.x_lo, s.x_hi, s.value});
  j["segments"] = segs;
  json ds = json::array();
  for (const auto& d : m.deltas) ds.push_back({d.x, d.mu});
  j["deltas"] = ds;
  return j.dump(1) + "\n";
}

void save_model(const SystemModel& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write model file '" + path.string() + "'");
  out << serialize_model(m);
}

double double_pole_gamma(double K) {
  if (!(K > 0.0) || !std::isfinite(K)) throw ValidationError("double-pole model needs K > 0");
  const double sh = std::sinh(K);
  return K / std::tanh(K) + K * K / (sh * sh);
}

SystemModel builtin_double_pole_model(double K) {
  const double g = double_pole_gamma(K);
  const double sh = std::sinh(K);
  SystemModel m;
  m.kind = Kind::Wave;
  m.a = 1.0;
  m.segments = {{0.0, 1.0, K * K / (g * g)}};
  m.deltas = {{1.0, K * K / (g * g * sh * sh)}};
  return m;
}

SystemModel free_half_line(double a) {
  SystemModel m;
  m.a = a;
  m.segments = {{0.0, a, 1.0}};
  return m;
}

SystemModel uniform_slab(double n, double a) {
  SystemModel m;
  m.a = a;
  m.segments = {{0.0, a, n * n}};
  return m;
}

std::vector<Piece> make_pieces(const SystemModel& m) {
  const double tol = node_tolerance(m);
  std::vector<double> nodes;
  for (const auto& s : m.segments) nodes.push_back(s.x_lo);
  nodes.push_back(m.a);
  for (const auto& d : m.deltas)
    if (d.x < m.a - tol) nodes.push_back(d.x);
  std::sort(nodes.begin(), nodes.end());
  std::vector<double> uniq;
  for (double x : nodes)
    if (uniq.empty() || x - uniq.back() > tol) uniq.push_back(x);

  const bool wave = m.kind == Kind::Wave;
  auto jump_at = [&](double x, Piece& p) {
    for (const auto& d : m.deltas) {
      if (std::abs(d.x - x) <= tol) {
        if (wave)
          p.jump_c += d.mu;
        else
          p.jump_v += d.mu;
      }
    }
  };

  std::vector<Piece> out;
  std::size_t seg = 0;
  for (std::size_t i = 0; i + 1 < uniq.size(); ++i) {
    const double mid = 0.5 * (uniq[i] + uniq[i + 1]);
    while (seg + 1 < m.segments.size() && m.segments[seg].x_hi <= mid) ++seg;
    const double value = m.segments[seg].value;
    Piece p{uniq[i], uniq[i + 1], wave ? value : 1.0, wave ? 0.0 : value};
    if (i > 0) jump_at(uniq[i], p);
    out.push_back(p);
  }
  Piece ext{m.a, std::numeric_limits<double>::infinity(), 1.0, 0.0};
  jump_at(m.a, ext);
  out.push_back(ext);
  return out;
}

}  // namespace qnm
