#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qnm/design.hpp"
#include "qnm/errors.hpp"
#include "qnm/evolution.hpp"
#include "qnm/jordan.hpp"
#include "qnm/perturbation.hpp"
#include "qnm/ptmodel.hpp"
#include "qnm/report.hpp"
#include "qnm/spectral.hpp"

using namespace qnm;

namespace {


enum Exit { kOk = 0, kInput = 2, kNumerical = 3, kInternal = 4 };

struct Common {
  double tolerance = 1e-10;
  std::string out;
  std::string format = "csv";
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--tolerance", c.tolerance, "Numerical tolerance")->check(CLI::PositiveNumber);
  sub->add_option("--out", c.out, "Output file (default: standard output)");
  sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "structured"}));
}

void emit(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(c.out);
  if (!f) throw ValidationError("cannot write '" + c.out + "'");
  f << text;
}

void emit_table(const Common& c, const Table& t) { emit(c, c.format == "csv" ? to_csv(t) : to_structured(t)); }

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError(std::string("bad number in ") + what + ": '" + item + "'");
    }
  }
  return out;
}

cdouble parse_complex(const std::string& s, const char* what) {
  const auto v = parse_list(s, what);
  if (v.size() != 2) throw ValidationError(std::string(what) + " needs re,im");
  return {v[0], v[1]};
}

Box parse_box(const std::string& s) {
  const auto v = parse_list(s, "--box");
  if (v.size() != 4) throw ValidationError("--box needs re_lo,re_hi,im_lo,im_hi");
  const Box b{v[0], v[1], v[2], v[3]};
  if (!(b.re_hi > b.re_lo) || !(b.im_hi > b.im_lo)) throw ValidationError("--box is empty");
  return b;
}

struct ModelSource {
  std::string path;
  double builtin_K = 0.0;

  void add(CLI::App* sub) {
    sub->add_option("--model", path, "Model file");
    sub->add_option("--builtin-K", builtin_K, "Use the built-in double-pole model with this K");
  }
  SystemModel load() const {
    if (!path.empty()) return load_model(path);
    if (builtin_K > 0.0) return builtin_double_pole_model(builtin_K);
    throw ValidationError("a model is required (--model or --builtin-K)");
  }
};

struct SearchArgs {
  std::string box;
  double cutoff = 20.0;
  double depth = 5.0;
  double notch = 1e-3;

  void add(CLI::App* sub) {
    sub->add_option("--box", box, "Search box re_lo,re_hi,im_lo,im_hi");
    sub->add_option("--cutoff", cutoff, "Default box half-width in Re omega")->check(CLI::PositiveNumber);
    sub->add_option("--depth", depth, "Default box depth in -Im omega")->check(CLI::PositiveNumber);
  }
  Box get() const { return box.empty() ? Box{-cutoff, cutoff, -depth, -notch} : parse_box(box); }
};

// ---- spectrum

struct SpectrumCmd {
  Common common;
  ModelSource model;
  SearchArgs search;

  int run() const {
    const SystemModel m = model.load();
    SpectrumOptions opt;
    opt.refine.residual_tolerance = common.tolerance;
    const SpectrumReport r = spectrum(m, search.get(), opt);
    emit(common, common.format == "csv" ? to_csv(spectrum_table(r)) : spectrum_structured(r));
    return kOk;
  }
};

// ---- jordan

JordanBlock pick_block(const SystemModel& m, const std::string& omega, int multiplicity, const SearchArgs& search,
                       const BlockOptions& opt) {
  if (!omega.empty()) {
    const cdouble seed = parse_complex(omega, "--omega");
    if (multiplicity > 0) return build_block(m, seed, multiplicity, opt);
    const SpectralZero z = refine_zero(m, seed);
    return build_block(m, z.omega, z.multiplicity, opt);
  }
  const SpectrumReport r = spectrum(m, search.get());
  if (r.zeros.empty()) throw NumericalError("no zero in the search box");
  const SpectralZero* best = &r.zeros.front();
  for (const auto& z : r.zeros)
    if (z.multiplicity > best->multiplicity) best = &z;
  return build_block(m, best->omega, best->multiplicity, opt);
}

struct JordanCmd {
  Common common;
  ModelSource model;
  SearchArgs search;
  std::string omega;
  int multiplicity = 0;
  int samples = 11;
  std::string normalization = "preferred";
  std::string matrix_out;

  int run() const {
    const SystemModel m = model.load();
    if (samples < 2) throw ValidationError("--samples must be at least 2");
    BlockOptions opt;
    opt.multiplicity_tolerance = std::max(common.tolerance, 1e-14);
    opt.normalization = normalization == "unit" ? Normalization::Unit : Normalization::Preferred;
    const JordanBlock b = pick_block(m, omega, multiplicity, search, opt);
    const int M = b.multiplicity();

    Table t{{"x"}, {}};
    for (int n = 0; n < M; ++n) {
      t.columns.push_back("re_f" + std::to_string(n));
      t.columns.push_back("im_f" + std::to_string(n));
    }
    for (int i = 0; i < samples; ++i) {
      const double x = m.domain_left + m.length() * i / (samples - 1);
      std::vector<Cell> row{x};
      for (const auto& v : b.values(x)) {
        row.push_back(v.real());
        row.push_back(v.imag());
      }
      t.add(std::move(row));
    }
    const Eigen::MatrixXcd B = biorthogonality_matrix(b);
    Table mt{{"row", "col", "re_product", "im_product"}, {}};
    for (int r = 0; r < M; ++r)
      for (int c = 0; c < M; ++c)
        mt.add({static_cast<long long>(r), static_cast<long long>(c), B(r, c).real(), B(r, c).imag()});

    if (common.format == "csv") {
      emit(common, to_csv(t));
      if (!matrix_out.empty()) {
        std::ofstream f(matrix_out);
        if (!f) throw ValidationError("cannot write '" + matrix_out + "'");
        f << to_csv(mt);
      }
    } else {
      nlohmann::json j;
      j["omega"] = {std::stod(format_number(b.omega().real())), std::stod(format_number(b.omega().imag()))};
      j["multiplicity"] = M;
      j["w_lead"] = {std::stod(format_number(b.w_lead().real())), std::stod(format_number(b.w_lead().imag()))};
      j["samples"] = nlohmann::json::parse(to_structured(t));
      j["biorthogonality"] = nlohmann::json::parse(to_structured(mt));
      emit(common, j.dump(1) + "\n");
    }
    return kOk;
  }
};

// ---- evolve

struct EvolveCmd {
  Common common;
  ModelSource model;
  std::string times = "0,1,2";
  double cutoff = 40.0;
  double depth = 5.0;
  double pulse_lo = 0.0, pulse_hi = 1.0;
  int samples = 101;
  bool reference = false;
  bool summary = false;
  double dx = 5e-4;

  int run() const {
    const SystemModel m = model.load();
    const auto ts = parse_list(times, "--times");
    if (ts.empty()) throw ValidationError("--times is empty");
    for (double t : ts)
      if (!(t >= 0.0)) throw ValidationError("times must be non-negative");
    if (!(pulse_hi > pulse_lo) || pulse_lo < m.domain_left || pulse_hi > m.a)
      throw ValidationError("pulse must lie inside the cavity");
    if (samples < 2) throw ValidationError("--samples must be at least 2");

    const double lo = pulse_lo, hi = pulse_hi;
    TwoComponentState pulse;
    pulse.phi = Field([lo, hi](double x) {
      if (x <= lo || x >= hi) return cdouble(0.0);
      return cdouble(std::pow(std::sin(std::numbers::pi * (x - lo) / (hi - lo)), 3));
    });
    pulse.phat = Field([](double) { return cdouble(0.0); });

    const auto blocks = build_blocks(m, cutoff, depth);
    const ModalCoefficients c0 = project(m, blocks, pulse);
    std::vector<double> xs;
    for (int i = 0; i < samples; ++i) xs.push_back(m.domain_left + m.length() * i / (samples - 1));

    std::vector<Snapshot> ref;
    if (reference || summary) {
      double rho_min = 1.0;
      for (const auto& s : m.segments) rho_min = std::min(rho_min, s.value);
      ref = evolve_reference(m, pulse, ts, dx, 0.5 * dx * std::sqrt(rho_min));
    }

    Table t;
    if (summary)
      t.columns = {"t", "rel_l2_error", "modes"};
    else if (ref.empty())
      t.columns = {"t", "x", "re_modal", "im_modal"};
    else
      t.columns = {"t", "x", "re_modal", "im_modal", "re_reference", "im_reference"};
    for (std::size_t k = 0; k < ts.size(); ++k) {
      if (summary) {
        const auto u = modal_field(blocks, advance(blocks, c0, ts[k]), ref[k].x);
        t.add({ts[k], relative_l2(u, ref[k].phi), static_cast<long long>(blocks.size())});
        continue;
      }
      const auto u = modal_field(blocks, advance(blocks, c0, ts[k]), xs);
      std::optional<TwoComponentState> r;
      if (!ref.empty()) r = ref[k].as_state();
      for (std::size_t i = 0; i < xs.size(); ++i) {
        std::vector<Cell> row{ts[k], xs[i], u[i].real(), u[i].imag()};
        if (r) {
          const cdouble v = r->phi(xs[i]);
          row.push_back(v.real());
          row.push_back(v.imag());
        }
        t.add(std::move(row));
      }
    }
    emit_table(common, t);
    return kOk;
  }
};

// ---- perturb

struct PerturbCmd {
  Common common;
  ModelSource model;
  SearchArgs search;
  std::string omega;
  std::vector<std::string> segments;
  bool k_shift = false;
  std::string lambdas = "0.001";
  bool track = false;

  Perturbation perturbation(const SystemModel& m) const {
    if (k_shift) {
      if (!(model.builtin_K > 0.0)) throw ValidationError("--k-shift needs --builtin-K");
      return double_pole_k_shift(model.builtin_K);
    }
    Perturbation p;
    for (const auto& s : segments) {
      const auto v = parse_list(s, "--delta");
      if (v.size() != 3 || !(v[1] > v[0])) throw ValidationError("--delta needs x_lo,x_hi,value");
      p.delta_rho_inv.push_back({v[0], v[1], v[2]});
    }
    if (p.empty()) throw ValidationError("no perturbation given (--delta or --k-shift)");
    return p;
  }

  int run() const {
    const SystemModel m = model.load();
    if (m.kind != Kind::Wave) throw ValidationError("perturb works on wave models");
    const Perturbation p = perturbation(m);
    const JordanBlock b = pick_block(m, omega, 0, search, {});
    const auto ls = parse_list(lambdas, "--lambda");
    if (ls.empty()) throw ValidationError("--lambda is empty");

    const cdouble alpha = splitting_alpha(b, p);
    const Perturbation rho_part{p.delta_rho_inv, {}}, mu_part{{}, p.delta_mu};
    const double scale = std::abs(splitting_alpha(b, rho_part)) + std::abs(splitting_alpha(b, mu_part));
    const bool generic = b.multiplicity() > 1 && std::abs(alpha) > common.tolerance * std::max(scale, 1e-300);

    std::optional<cdouble> h00;
    if (generic && b.multiplicity() == 2) h00 = second_order_shift(b, p).total;

    Table t{{"lambda", "n", "re_omega", "im_omega", "re_alpha", "im_alpha", "generic"}, {}};
    std::vector<SplitReport> reports;
    for (double lambda : ls) {
      if (generic) {
        SplitReport r = split_block(b, lambda, alpha);
        if (h00) r.second_order = lambda * *h00;
        for (std::size_t n = 0; n < r.frequencies.size(); ++n) {
          const cdouble w = r.frequencies[n] + r.second_order;
          t.add({lambda, static_cast<long long>(n), w.real(), w.imag(), alpha.real(), alpha.imag(), true});
        }
        reports.push_back(std::move(r));
      } else {
        for (int n = 0; n < b.multiplicity(); ++n)
          t.add({lambda, static_cast<long long>(n), b.omega().real(), b.omega().imag(), alpha.real(), alpha.imag(),
                 false});
      }
    }

    std::optional<RootTrack> tr;
    if (track) {
      if (!generic || b.multiplicity() != 2) throw NonGenericError("root tracking needs a generic double pole");
      std::vector<double> tl;
      for (double l : ls)
        if (l != 0.0) tl.push_back(l);
      tr = direct_root_track(b, p, tl);
    }

    if (common.format == "csv") {
      std::string text = to_csv(t);
      if (tr) {
        Table ft{{"quantity", "re_fit", "im_fit", "re_block", "im_block"}, {}};
        ft.add({std::string("omega1_squared"), tr->omega1_sq.real(), tr->omega1_sq.imag(), alpha.real(),
                alpha.imag()});
        ft.add({std::string("omega2"), tr->omega2.real(), tr->omega2.imag(), h00->real(), h00->imag()});
        text += "\n" + to_csv(ft) + "\n" + to_csv(root_track_table(*tr));
      }
      emit(common, text);
    } else {
      nlohmann::json j;
      j["omega"] = {b.omega().real(), b.omega().imag()};
      j["multiplicity"] = b.multiplicity();
      j["alpha"] = {std::stod(format_number(alpha.real())), std::stod(format_number(alpha.imag()))};
      j["generic"] = generic;
      if (h00) j["H00"] = {std::stod(format_number(h00->real())), std::stod(format_number(h00->imag()))};
      nlohmann::json rs = nlohmann::json::array();
      for (const auto& r : reports) rs.push_back(nlohmann::json::parse(split_structured(r)));
      j["splits"] = rs;
      if (tr) {
        j["fit"] = {{"omega1_squared", {tr->omega1_sq.real(), tr->omega1_sq.imag()}},
                    {"omega2", {tr->omega2.real(), tr->omega2.imag()}}};
        j["roots"] = nlohmann::json::parse(to_structured(root_track_table(*tr)));
      }
      emit(common, j.dump(1) + "\n");
    }
    return kOk;
  }
};

// ---- construct

struct ConstructCmd {
  Common common;
  std::string profile = "sinh";
  double K = 1.0;
  double alpha = 1.0;
  int n = 5;
  int segments = 4000;
  std::string model_out;

  int run() const {
    Profile p;
    if (profile == "sinh")
      p = sinh_profile(K);
    else if (profile == "linear")
      p = linear_profile();
    else
      p = power_profile(alpha, n);
    const double g = gamma_from_profile(p);
    const double mu = point_mass_from_profile(p, g);
    std::string why;
    const bool shape = profile_admissible_shape(p, &why);
    if (mu < 0.0) throw ValidationError("inadmissible profile: the point mass at x = 1 would be negative");
    if (!model_out.empty()) {
      if (!shape) throw ValidationError(why);
      ConstructOptions opt;
      opt.segments = segments;
      save_model(rho_from_profile(p, g, opt), model_out);
    }
    Table t{{"profile", "gamma", "mu", "W02", "W03", "shape_ok"}, {}};
    t.add({profile, g, mu, w02_functional(p), w03_functional(p), shape});
    emit_table(common, t);
    return kOk;
  }
};

// ---- search3

struct Search3Cmd {
  Common common;
  int n = 5;
  std::string range = "0.5,6";
  int grid = 200;
  bool no_verify = false;

  int run() const {
    const auto r = parse_list(range, "--range");
    if (r.size() != 2 || !(r[1] > r[0])) throw ValidationError("--range needs lo,hi with lo < hi");
    if (n <= 2) throw ValidationError("--n must exceed 2");
    SearchOptions opt;
    opt.grid = grid;
    opt.alpha_tolerance = std::min(common.tolerance, 1e-8);
    opt.verify = !no_verify;
    emit_table(common, third_order_table(third_order_search(n, r[0], r[1], opt)));
    return kOk;
  }
};

// ---- pt-critical

struct PtCriticalCmd {
  Common common;
  std::string L = "5";
  int segments = 2000;

  int run() const {
    const auto ls = parse_list(L, "--L");
    if (ls.empty()) throw ValidationError("--L is empty");
    for (double l : ls)
      if (!(l > 0.0)) throw ValidationError("--L must be positive");
    PTCriticalOptions opt;
    opt.initial_segments = segments;
    opt.tolerance = std::max(common.tolerance, 1e-12);
    std::vector<std::pair<double, PTCriticalPoint>> pts;
    for (double l : ls) pts.emplace_back(l, pt_critical_point(l, opt));
    emit_table(common, pt_table(pts));
    return kOk;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasinormal-mode spectra, Jordan blocks and their perturbations for 1-d open systems"};
  app.require_subcommand(1);

  SpectrumCmd spec;
  auto* s = app.add_subcommand("spectrum", "Zeros of the Wronskian with multiplicities");
  add_common(s, spec.common);
  spec.model.add(s);
  spec.search.add(s);

  JordanCmd jor;
  auto* j = app.add_subcommand("jordan", "Normalized Jordan-block basis and its products");
  add_common(j, jor.common);
  jor.model.add(j);
  jor.search.add(j);
  j->add_option("--omega", jor.omega, "Zero to use, re,im (default: highest multiplicity in the box)");
  j->add_option("--multiplicity", jor.multiplicity, "Multiplicity (default: from the winding number)");
  j->add_option("--samples", jor.samples, "Sample points across the cavity");
  j->add_option("--normalization", jor.normalization)->check(CLI::IsMember({"preferred", "unit"}));
  j->add_option("--matrix-out", jor.matrix_out, "CSV file for the block product matrix");

  EvolveCmd ev;
  auto* e = app.add_subcommand("evolve", "Modal evolution of a sin^3 pulse, optionally against the reference solver");
  add_common(e, ev.common);
  ev.model.add(e);
  e->add_option("--times", ev.times, "Comma-separated times");
  e->add_option("--cutoff", ev.cutoff, "Keep modes with |omega| below this")->check(CLI::PositiveNumber);
  e->add_option("--depth", ev.depth, "Search depth in -Im omega")->check(CLI::PositiveNumber);
  e->add_option("--pulse-lo", ev.pulse_lo, "Left end of the pulse");
  e->add_option("--pulse-hi", ev.pulse_hi, "Right end of the pulse");
  e->add_option("--samples", ev.samples, "Output grid size");
  e->add_option("--dx", ev.dx, "Reference grid step")->check(CLI::PositiveNumber);
  e->add_flag("--reference", ev.reference, "Also run the reference solver");
  e->add_flag("--summary", ev.summary, "Only report the relative L2 error against the reference");

  PerturbCmd pe;
  auto* p = app.add_subcommand("perturb", "Splitting of a higher-order zero under a change of 1/rho");
  add_common(p, pe.common);
  pe.model.add(p);
  pe.search.add(p);
  p->add_option("--omega", pe.omega, "Zero to perturb, re,im");
  p->add_option("--delta", pe.segments, "Change of 1/rho on a segment, x_lo,x_hi,value (repeatable)");
  p->add_flag("--k-shift", pe.k_shift, "Use d rho / dK of the built-in double-pole model");
  p->add_option("--lambda", pe.lambdas, "Comma-separated perturbation strengths");
  p->add_flag("--track", pe.track, "Follow the split zeros of the perturbed model and fit them");

  ConstructCmd co;
  auto* c = app.add_subcommand("construct", "Double-pole model from a profile function");
  add_common(c, co.common);
  c->add_option("--profile", co.profile)->check(CLI::IsMember({"sinh", "linear", "power"}));
  c->add_option("--K", co.K, "sinh(K x)");
  c->add_option("--alpha", co.alpha, "x + alpha x^n");
  c->add_option("--n", co.n, "x + alpha x^n");
  c->add_option("--segments", co.segments, "Segments of the sampled density");
  c->add_option("--model-out", co.model_out, "Write the constructed model here");

  Search3Cmd s3;
  auto* t = app.add_subcommand("search3", "Third-order zeros within f = x + alpha x^n");
  add_common(t, s3.common);
  t->add_option("--n", s3.n, "Power n > 2");
  t->add_option("--range", s3.range, "alpha range lo,hi");
  t->add_option("--grid", s3.grid, "Bracketing grid size");
  t->add_flag("--no-verify", s3.no_verify, "Skip the winding-number check of admissible roots");

  PtCriticalCmd pt;
  auto* q = app.add_subcommand("pt-critical", "Critical damping point of the truncated sech^2 potential");
  add_common(q, pt.common);
  q->add_option("--L", pt.L, "Truncation half-width(s), comma-separated");
  q->add_option("--segments", pt.segments, "Initial segment count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kInput;
  }

  try {
    if (*s) return spec.run();
    if (*j) return jor.run();
    if (*e) return ev.run();
    if (*p) return pe.run();
    if (*c) return co.run();
    if (*t) return s3.run();
    if (*q) return pt.run();
  } catch (const ParseError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kInput;
  } catch (const ValidationError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kInput;
  } catch (const NumericalError& err) {
    std::cerr << "numerical failure: " << err.what() << "\n";
    return kNumerical;
  } catch (const NonGenericError& err) {
    std::cerr << "numerical failure: " << err.what() << "\n";
    return kNumerical;
  } catch (const std::exception& err) {
    std::cerr << "internal error: " << err.what() << "\n";
    return kInternal;
  }
  return kInternal;
}
