#include "qnm/odeint.hpp"

#include <algorithm>
#include <cmath>

namespace qnm {

namespace {

const cdouble I(0.0, 1.0);

CJet piece_q(const Piece& p, const CJet& omega2) { return omega2 * cdouble(p.c) - cdouble(p.v); }

CJet jump_q(const Piece& p, const CJet& omega2) { return omega2 * cdouble(p.jump_c) - cdouble(p.jump_v); }

bool has_jump(const Piece& p) { return p.jump_c != 0.0 || p.jump_v != 0.0; }

void transfer(FieldJet& s, const CJet& q, double dx) {
  if (dx == 0.0) return;
  CJet C, S;
  transfer_coefficients(q, dx, C, S);
  CJet f = C * s.f + S * s.df;
  CJet df = C * s.df - q * (S * s.f);
  s.f = std::move(f);
  s.df = std::move(df);
}

// Crossing a node left to right: f'(x+) = f'(x-) - qj f(x).
void cross_right(FieldJet& s, const Piece& p, const CJet& omega2) {
  if (has_jump(p)) s.df -= jump_q(p, omega2) * s.f;
}

void cross_left(FieldJet& s, const Piece& p, const CJet& omega2) {
  if (has_jump(p)) s.df += jump_q(p, omega2) * s.f;
}

FieldJet left_initial(const SystemModel& m, const CJet& omega) {
  const int n = omega.size();
  if (m.boundary_left == LeftBoundary::Node) return {CJet(n, 0.0), CJet(n, 1.0)};
  return {CJet(n, 1.0), omega * (-I)};
}

}  // namespace

ModeSolution::ModeSolution(std::shared_ptr<const std::vector<Piece>> pieces, double domain_left,
                           CJet omega, Side side, std::vector<FieldJet> nodes)
    : pieces_(std::move(pieces)),
      domain_left_(domain_left),
      omega_(std::move(omega)),
      side_(side),
      nodes_(std::move(nodes)) {}

std::size_t ModeSolution::piece_index(double x) const {
  const auto& ps = *pieces_;
  auto it = std::upper_bound(ps.begin(), ps.end(), x,
                             [](double v, const Piece& p) { return v < p.x_lo; });
  if (it == ps.begin()) return 0;
  return static_cast<std::size_t>(std::distance(ps.begin(), it) - 1);
}

FieldJet ModeSolution::at(double x) const {
  const CJet w2 = omega_ * omega_;
  if (x < domain_left_) {
    FieldJet s = nodes_.front();
    transfer(s, w2, x - domain_left_);
    return s;
  }
  const std::size_t i = piece_index(x);
  FieldJet s = nodes_[i];
  transfer(s, piece_q((*pieces_)[i], w2), x - (*pieces_)[i].x_lo);
  return s;
}

FieldJet ModeSolution::left_limit(double x) const {
  FieldJet s = at(x);
  const std::size_t i = piece_index(x);
  const auto& p = (*pieces_)[i];
  if (i > 0 && p.x_lo == x) cross_left(s, p, omega_ * omega_);
  return s;
}

Propagator::Propagator(const SystemModel& model)
    : model_(model), pieces_(std::make_shared<const std::vector<Piece>>(make_pieces(model))) {}

FieldJet Propagator::left_at_edge(const CJet& omega) const {
  const CJet w2 = omega * omega;
  const auto& ps = *pieces_;
  FieldJet s = left_initial(model_, omega);
  for (std::size_t i = 0; i + 1 < ps.size(); ++i) {
    if (i > 0) cross_right(s, ps[i], w2);
    transfer(s, piece_q(ps[i], w2), ps[i].x_hi - ps[i].x_lo);
  }
  cross_right(s, ps.back(), w2);
  return s;
}

ModeSolution Propagator::left(const CJet& omega) const {
  const CJet w2 = omega * omega;
  const auto& ps = *pieces_;
  std::vector<FieldJet> nodes;
  nodes.reserve(ps.size());
  FieldJet s = left_initial(model_, omega);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (i > 0) cross_right(s, ps[i], w2);
    nodes.push_back(s);
    if (i + 1 < ps.size()) transfer(s, piece_q(ps[i], w2), ps[i].x_hi - ps[i].x_lo);
  }
  return ModeSolution(pieces_, model_.domain_left, omega, Side::Left, std::move(nodes));
}

ModeSolution Propagator::right(const CJet& omega) const {
  const CJet w2 = omega * omega;
  const auto& ps = *pieces_;
  const CJet e = exp(omega * (I * model_.a));
  FieldJet s{e, omega * e * I};
  std::vector<FieldJet> nodes(ps.size());
  nodes.back() = s;
  for (std::size_t i = ps.size() - 1; i-- > 0;) {
    cross_left(s, ps[i + 1], w2);
    transfer(s, piece_q(ps[i], w2), ps[i].x_lo - ps[i].x_hi);
    nodes[i] = s;
  }
  return ModeSolution(pieces_, model_.domain_left, omega, Side::Right, std::move(nodes));
}

CJet Propagator::wronskian(const CJet& omega) const {
  const FieldJet s = left_at_edge(omega);
  const CJet e = exp(omega * (I * model_.a));
  return e * (s.df - omega * s.f * I);
}

cdouble Propagator::wronskian(cdouble omega) const {
  const cdouble w2 = omega * omega;
  const auto& ps = *pieces_;
  cdouble f, df;
  if (model_.boundary_left == LeftBoundary::Node) {
    f = 0.0;
    df = 1.0;
  } else {
    f = 1.0;
    df = -I * omega;
  }
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const Piece& p = ps[i];
    if (i > 0 && has_jump(p)) df -= (p.jump_c * w2 - p.jump_v) * f;
    if (i + 1 == ps.size()) break;
    const cdouble q = p.c * w2 - p.v;
    cdouble C, S;
    transfer_coefficients(q, p.x_hi - p.x_lo, C, S);
    const cdouble nf = C * f + S * df;
    df = C * df - q * S * f;
    f = nf;
  }
  return std::exp(I * omega * model_.a) * (df - I * omega * f);
}

ModeSolution propagate_left(const SystemModel& model, cdouble omega) {
  return Propagator(model).left(CJet(1, omega));
}

ModeSolution propagate_right(const SystemModel& model, cdouble omega) {
  return Propagator(model).right(CJet(1, omega));
}

TaylorChain propagate_taylor(const SystemModel& model, cdouble omega0, int order, Side side) {
  const Propagator p(model);
  const CJet w = CJet::variable(order, omega0);
  return side == Side::Left ? p.left(w) : p.right(w);
}

CJet wronskian_at(const ModeSolution& f, const ModeSolution& g, double x) {
  const FieldJet a = f.at(x);
  const FieldJet b = g.at(x);
  return a.df * b.f - a.f * b.df;
}

}  // namespace qnm
