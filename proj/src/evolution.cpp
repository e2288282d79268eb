#include "qnm/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <future>
#include <thread>

#include "qnm/errors.hpp"
#include "qnm/parallel.hpp"
#include "qnm/quadrature.hpp"

namespace qnm {

namespace {

const cdouble I(0.0, 1.0);

// integral of the piecewise-constant coefficient over [lo, hi]; exterior value outside the cavity
double coefficient_integral(const SystemModel& m, bool inertia, double lo, double hi) {
  const double ext = inertia ? 1.0 : 0.0;
  double s = 0.0;
  auto add = [&](double a, double b, double v) {
    const double l = std::max(a, lo), h = std::min(b, hi);
    if (h > l) s += (h - l) * v;
  };
  add(-std::numeric_limits<double>::infinity(), m.domain_left, ext);
  add(m.a, std::numeric_limits<double>::infinity(), ext);
  for (const auto& seg : m.segments) {
    double v = seg.value;
    if (m.kind != Kind::Wave) v = inertia ? 1.0 : seg.value;
    else if (!inertia) v = 0.0;
    add(seg.x_lo, seg.x_hi, v);
  }
  return s;
}

struct Grid {
  double x0 = 0.0;
  double dx = 0.0;
  std::size_t n = 0;         // node count
  std::size_t first_cav = 0; // index of domain_left
  std::size_t last_cav = 0;  // index of a
  bool dirichlet_left = true;
  std::vector<double> mass;  // lumped inertia incl. point masses
  std::vector<double> pot;   // lumped potential incl. point terms
  std::vector<double> point; // point masses only

  double x(std::size_t i) const { return x0 + dx * static_cast<double>(i); }
  std::size_t node_of(double xp) const {
    const double r = (xp - x0) / dx;
    const double k = std::round(r);
    if (std::abs(r - k) > 1e-7) throw ValidationError("point term is not on a grid node; choose dx to divide its position");
    return static_cast<std::size_t>(k);
  }
};

Grid make_grid(const SystemModel& m, double dx_req, double t_max, const ReferenceOptions& opt) {
  Grid g;
  const double len = m.length();
  const auto cells = static_cast<std::size_t>(std::max(1.0, std::round(len / dx_req)));
  g.dx = len / static_cast<double>(cells);
  const double reach = t_max + opt.margin;
  const auto ext = static_cast<std::size_t>(std::ceil(reach / g.dx)) + 2;
  g.dirichlet_left = m.boundary_left == LeftBoundary::Node;
  g.first_cav = g.dirichlet_left ? 0 : ext;
  g.x0 = m.domain_left - g.dx * static_cast<double>(g.first_cav);
  g.last_cav = g.first_cav + cells;
  g.n = g.last_cav + ext + 1;
  g.mass.assign(g.n, 0.0);
  g.pot.assign(g.n, 0.0);
  g.point.assign(g.n, 0.0);
  for (std::size_t i = 0; i < g.n; ++i) {
    const double lo = g.x(i) - 0.5 * g.dx, hi = g.x(i) + 0.5 * g.dx;
    g.mass[i] = coefficient_integral(m, true, lo, hi);
    g.pot[i] = coefficient_integral(m, false, lo, hi);
  }
  for (const auto& d : m.deltas) {
    const std::size_t k = g.node_of(d.x);
    if (m.kind == Kind::Wave) {
      g.mass[k] += d.mu;
      g.point[k] += d.mu;
    } else {
      g.pot[k] += d.mu;
    }
  }
  return g;
}

struct Run {
  const SystemModel& m;
  const Grid& g;
  std::vector<cdouble> prev, cur, next;

  void accel(const std::vector<cdouble>& u, std::vector<cdouble>& out, std::size_t lo, std::size_t hi) const {
    for (std::size_t i = lo; i <= hi; ++i) {
      if (i == 0 || i + 1 == g.n) {
        out[i] = 0.0;
        continue;
      }
      out[i] = ((u[i + 1] - 2.0 * u[i] + u[i - 1]) / g.dx - g.pot[i] * u[i]) / g.mass[i];
    }
  }
};

std::vector<Snapshot> run_reference(const SystemModel& m, const TwoComponentState& s,
                                    const std::vector<double>& times, double dx, double dt,
                                    const ReferenceOptions& opt) {
  const double t_max = *std::max_element(times.begin(), times.end());
  const Grid g = make_grid(m, dx, t_max, opt);
  const auto steps = static_cast<long>(std::ceil(t_max / dt - 1e-9));
  const double h = steps > 0 ? t_max / static_cast<double>(steps) : dt;

  // initial data
  std::vector<cdouble> u0(g.n, 0.0), v0(g.n, 0.0);
  static const double gp = 0.5 / std::sqrt(3.0);
  for (std::size_t i = 0; i < g.n; ++i) {
    const bool inside = i >= g.first_cav && i <= g.last_cav;
    if (!inside && !opt.exterior_data) continue;
    if ((i == 0 && g.dirichlet_left) || i + 1 == g.n) continue;
    u0[i] = s.phi(g.x(i));
    // half cells with a two-point Gauss rule; skip halves outside the cavity unless exterior data
    cdouble p = 0.0;
    for (int side : {-1, 1}) {
      const double c = g.x(i) + 0.25 * side * g.dx;
      if (!opt.exterior_data && (c < m.domain_left || c > m.a)) continue;
      p += 0.25 * g.dx * (s.phat(c - gp * 0.5 * g.dx) + s.phat(c + gp * 0.5 * g.dx));
    }
    v0[i] = p;
  }
  for (const auto& pw : s.phat.points()) v0[g.node_of(pw.x)] += pw.w;
  for (std::size_t i = 0; i < g.n; ++i) v0[i] /= g.mass[i];

  Run r{m, g, u0, u0, std::vector<cdouble>(g.n, 0.0)};
  std::vector<cdouble> a(g.n, 0.0);
  auto active_hi = [&](double t) {
    if (opt.exterior_data) return g.n - 1;
    return std::min(g.n - 1, g.last_cav + static_cast<std::size_t>(std::ceil(t / g.dx)) + 20);
  };
  auto active_lo = [&](double t) -> std::size_t {
    if (opt.exterior_data || g.dirichlet_left) return 0;
    const auto back = static_cast<std::size_t>(std::ceil(t / g.dx)) + 20;
    return g.first_cav > back ? g.first_cav - back : 0;
  };

  std::vector<long> snap_steps;
  for (double t : times) snap_steps.push_back(std::lround(t / h));

  std::vector<Snapshot> out(times.size());
  auto capture = [&](std::size_t k, const std::vector<cdouble>& before, const std::vector<cdouble>& now,
                     const std::vector<cdouble>& after, double t, bool at_start) {
    Snapshot sn;
    sn.t = t;
    for (std::size_t i = g.first_cav; i <= g.last_cav; ++i) {
      sn.x.push_back(g.x(i));
      sn.phi.push_back(now[i]);
      const double rho = (g.mass[i] - g.point[i]) / g.dx;
      const cdouble vel = at_start ? v0[i] : (after[i] - before[i]) / (2.0 * h);
      sn.phat.push_back(rho * vel);
    }
    out[k] = std::move(sn);
  };

  // step 0 -> 1
  r.accel(u0, a, active_lo(0.0), active_hi(0.0));
  for (std::size_t i = 0; i < g.n; ++i) r.next[i] = u0[i] + h * v0[i] + 0.5 * h * h * a[i];
  r.next[0] = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k)
    if (snap_steps[k] == 0) capture(k, u0, u0, u0, 0.0, true);
  r.prev = u0;
  r.cur = r.next;
  for (long n = 1; n <= steps; ++n) {
    const double t = n * h;
    const std::size_t lo = active_lo(t), hi = active_hi(t);
    r.accel(r.cur, a, lo, hi);
    for (std::size_t i = lo; i <= hi; ++i) r.next[i] = 2.0 * r.cur[i] - r.prev[i] + h * h * a[i];
    for (std::size_t k = 0; k < times.size(); ++k)
      if (snap_steps[k] == n) capture(k, r.prev, r.cur, r.next, times[k], false);
    std::swap(r.prev, r.cur);
    std::swap(r.cur, r.next);
  }
  return out;
}

}  // namespace

unsigned worker_count() {
  if (const char* env = std::getenv("QNM_WORKERS")) {
    const int v = std::atoi(env);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<JordanBlock> build_blocks(const SystemModel& model, double cutoff, double depth,
                                      const BlockOptions& opt, double notch) {
  require_valid(model);
  if (!(cutoff > 0.0) || !(depth > notch)) throw ValidationError("invalid mode cutoff or depth");
  const Propagator prop(model);
  SpectrumReport rep;
  bool done = false;
  for (double grow : {1.0, 1.0137, 1.0291, 1.0473}) {
    try {
      rep = spectrum(prop, Box{-cutoff * grow, cutoff * grow, -depth * grow, -notch});
      done = true;
      break;
    } catch (const ContourTooCloseError&) {
    }
  }
  if (!done) throw NumericalError("could not place a search contour for the mode set");
  std::vector<SpectralZero> keep;
  for (const auto& z : rep.zeros)
    if (std::abs(z.omega) <= cutoff) keep.push_back(z);
  auto built = parallel_map(keep.size(), [&](std::size_t i) {
    return build_block(model, keep[i].omega, keep[i].multiplicity, opt);
  });
  return built;
}

std::vector<TwoComponentState> time_basis(const JordanBlock& block, double t) {
  if (t < 0.0) throw ValidationError("evolution is defined for t >= 0 only");
  std::vector<TwoComponentState> out;
  for (int n = 0; n < block.multiplicity(); ++n) out.push_back(block.time_basis(n, t));
  return out;
}

ModalCoefficients project(const SystemModel& model, const std::vector<JordanBlock>& blocks,
                          const TwoComponentState& state) {
  ModalCoefficients c;
  c.a = parallel_map(blocks.size(), [&](std::size_t j) {
    const auto& b = blocks[j];
    const int M = b.multiplicity();
    std::vector<cdouble> a(static_cast<std::size_t>(M));
    for (int n = 0; n < M; ++n) a[std::size_t(n)] = -bilinear(model, b.basis(M - 1 - n), state) / b.w_lead();
    return a;
  });
  return c;
}

ModalCoefficients project_dual(const SystemModel& model, const std::vector<JordanBlock>& blocks,
                               const TwoComponentState& state) {
  ModalCoefficients c;
  c.a = parallel_map(blocks.size(), [&](std::size_t j) {
    const auto& b = blocks[j];
    const int M = b.multiplicity();
    std::vector<cdouble> a(static_cast<std::size_t>(M));
    for (int n = 0; n < M; ++n) {
      const auto d = b.dual(n);
      a[std::size_t(n)] = cavity_inner(model, d, state) / cavity_inner(model, d, b.basis(n));
    }
    return a;
  });
  return c;
}

ModalCoefficients advance(const std::vector<JordanBlock>& blocks, const ModalCoefficients& c, double t) {
  if (t < 0.0) throw ValidationError("evolution is defined for t >= 0 only");
  if (c.a.size() != blocks.size()) throw ValidationError("coefficient count does not match the blocks");
  ModalCoefficients out = c;
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    const auto& a = c.a[j];
    const int M = static_cast<int>(a.size());
    const cdouble e = std::exp(-I * blocks[j].omega() * t);
    for (int k = 0; k < M; ++k) {
      cdouble s = 0.0, p = 1.0;
      for (int m = 0; k + m < M; ++m) {
        s += a[std::size_t(k + m)] * p;
        p *= -I * t / double(m + 1);
      }
      out.a[j][std::size_t(k)] = e * s;
    }
  }
  return out;
}

TwoComponentState synthesize(const std::vector<JordanBlock>& blocks, const ModalCoefficients& c) {
  std::vector<TwoComponentState> states;
  std::vector<cdouble> coeffs;
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    for (int n = 0; n < blocks[j].multiplicity(); ++n) {
      states.push_back(blocks[j].basis(n));
      coeffs.push_back(c.a[j][std::size_t(n)]);
    }
  }
  return linear_combination(states, coeffs);
}

TwoComponentState evolve_modal(const SystemModel& model, const std::vector<JordanBlock>& blocks,
                               const TwoComponentState& state, double t) {
  return synthesize(blocks, advance(blocks, project(model, blocks, state), t));
}

std::vector<cdouble> modal_field(const std::vector<JordanBlock>& blocks, const ModalCoefficients& c,
                                 const std::vector<double>& xs) {
  std::vector<cdouble> out(xs.size(), 0.0);
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const auto v = blocks[j].values(xs[i]);
      for (std::size_t n = 0; n < v.size(); ++n) out[i] += c.a[j][n] * v[n];
    }
  }
  return out;
}

cdouble greens_kernel(const std::vector<JordanBlock>& blocks, double x, double y, double t) {
  if (t < 0.0) throw ValidationError("evolution is defined for t >= 0 only");
  cdouble g = 0.0;
  for (const auto& b : blocks) {
    const int M = b.multiplicity();
    const auto fy = b.values(y);
    const auto fx = b.values(x);
    const cdouble e = std::exp(-I * b.omega() * t);
    for (int n = 0; n < M; ++n) {
      cdouble fxt = 0.0, p = 1.0;
      for (int m = 0; m <= n; ++m) {
        fxt += fx[std::size_t(n - m)] * p;
        p *= -I * t / double(m + 1);
      }
      g += fy[std::size_t(M - 1 - n)] * e * fxt / (-b.w_lead());
    }
  }
  return I * g;
}

SumRuleResult sum_rule_check(const SystemModel& model, const std::vector<JordanBlock>& blocks, double y,
                             double width, int max_members) {
  if (!(y > model.domain_left && y < model.a)) throw ValidationError("sum rule point must be inside the cavity");
  if (!(width > 0.0)) throw ValidationError("test width must be positive");
  ModalCoefficients c;
  for (const auto& b : blocks) {
    const int M = b.multiplicity();
    const auto fy = b.values(y);
    std::vector<cdouble> a(static_cast<std::size_t>(M));
    for (int n = 0; n < M; ++n)
      if (max_members < 0 || n < max_members) a[std::size_t(n)] = I * fy[std::size_t(M - 1 - n)] / (-b.w_lead());
    c.a.push_back(a);
  }
  const TwoComponentState s = synthesize(blocks, c);
  auto g = [&](double x) { return std::exp(-(x - y) * (x - y) / (2.0 * width * width)); };
  auto breaks = cavity_breaks(model, model.a);
  for (double off : {-4.0, 4.0})
    if (y + off * width > model.domain_left && y + off * width < model.a) breaks.push_back(y + off * width);
  breaks.push_back(y);
  std::sort(breaks.begin(), breaks.end());
  const cdouble first = integrate_pieces([&](double x) { return s.phi(x) * g(x); }, breaks);
  cdouble second = integrate_pieces([&](double x) { return s.phat(x) * g(x); }, breaks);
  for (const auto& p : s.phat.points()) second += p.w * g(p.x);
  return {std::abs(first), std::abs(second - 1.0)};
}

TwoComponentState Snapshot::as_state() const {
  auto xs = std::make_shared<const std::vector<double>>(x);
  auto interp = [xs](std::shared_ptr<const std::vector<cdouble>> v) {
    return [xs, v](double xp) -> cdouble {
      const auto& X = *xs;
      if (xp <= X.front()) return v->front();
      if (xp >= X.back()) return v->back();
      const auto it = std::upper_bound(X.begin(), X.end(), xp);
      const std::size_t i = static_cast<std::size_t>(it - X.begin()) - 1;
      const double w = (xp - X[i]) / (X[i + 1] - X[i]);
      return (1.0 - w) * (*v)[i] + w * (*v)[i + 1];
    };
  };
  TwoComponentState s;
  s.phi = Field(interp(std::make_shared<const std::vector<cdouble>>(phi)));
  s.phat = Field(interp(std::make_shared<const std::vector<cdouble>>(phat)));
  return s;
}

std::vector<Snapshot> evolve_reference(const SystemModel& model, const TwoComponentState& state,
                                       const std::vector<double>& times, double dx, double dt,
                                       const ReferenceOptions& opt) {
  require_valid(model);
  if (times.empty()) return {};
  for (double t : times)
    if (!(t >= 0.0)) throw ValidationError("evolution is defined for t >= 0 only");
  if (!(dx > 0.0) || !(dt > 0.0)) throw ValidationError("dx and dt must be positive");
  double rho_min = 1.0;
  if (model.kind == Kind::Wave)
    for (const auto& s : model.segments) rho_min = std::min(rho_min, s.value);
  if (dt > dx * std::sqrt(rho_min) * (1.0 + 1e-12))
    throw ValidationError("CFL condition violated: dt must not exceed dx * sqrt(min rho)");

  // one run when every time is a whole number of steps, otherwise one run per time
  const double t_max = *std::max_element(times.begin(), times.end());
  const double h = t_max > 0.0 ? t_max / std::ceil(t_max / dt - 1e-9) : dt;
  bool commensurate = true;
  for (double t : times)
    if (std::abs(t / h - std::round(t / h)) > 1e-6) commensurate = false;
  if (commensurate) return run_reference(model, state, times, dx, dt, opt);
  auto parts = parallel_map(times.size(), [&](std::size_t k) {
    return run_reference(model, state, {times[k]}, dx, dt, opt).front();
  });
  return parts;
}

TwoComponentState evolve_reference(const SystemModel& model, const TwoComponentState& state, double t,
                                   double dx, double dt) {
  return evolve_reference(model, state, std::vector<double>{t}, dx, dt).front().as_state();
}

double relative_l2(const std::vector<cdouble>& u, const std::vector<cdouble>& v) {
  if (u.size() != v.size() || u.size() < 2) throw ValidationError("sample vectors must match");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double w = (i == 0 || i + 1 == u.size()) ? 0.5 : 1.0;
    num += w * std::norm(u[i] - v[i]);
    den += w * std::norm(v[i]);
  }
  return std::sqrt(num / den);
}

}  // namespace qnm
