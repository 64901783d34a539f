#pragma once

// Command dispatch. Subcommands:
//   check-weight <expr> [--tmin T] [--grid LO:HI:N]
//   conjugate <expr> --ygrid LO:HI:N [--csv PATH]
//   weight-matrix <expr> --x X --kmax K [--csv PATH]
//   check-pair <w> <sigma> (--r R | --discrete) [--grid LO:HI:N] [--jmax J]
//              [--tol E] [--csv PATH]
//   growth-index <sigma> <w> [--tol E]
//   kappa <w> --t T [--tol E]
//   reduce <w> <sigma> --f <expr> --nmax N [--nq] [--csv PATH] [--seq-csv PATH]
//   jet-seminorm <jetfile> <w> --m M --pmax P
//   jet-reduce <jetfile> <w> <sigma> [--jmax J] [--pmax P] [--nmax N]
//
// Exit codes: 0 verdict holds / success, 1 verdict fails, 2 inconclusive,
// 64 usage, 65 data error. Diagnostics go to standard error; reports and
// tables to standard output, byte-identical across runs for fixed flags.

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ultra/conditions.hpp"
#include "ultra/conjugate.hpp"
#include "ultra/expr.hpp"
#include "ultra/jet.hpp"
#include "ultra/pipeline.hpp"
#include "ultra/reduction.hpp"
#include "ultra/report.hpp"
#include "ultra/weight.hpp"

namespace ultra::cli {

constexpr int kOk = 0;
constexpr int kFails = 1;
constexpr int kInconclusive = 2;
constexpr int kUsage = 64;
constexpr int kData = 65;

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Args {
  std::vector<std::string> positional;
  std::map<std::string, std::string> flags;
  std::set<std::string> switches;

  const std::string& pos(std::size_t i, const char* what) const {
    if (i >= positional.size())
      throw UsageError(std::string("missing argument: ") + what);
    return positional[i];
  }
  std::optional<std::string> flag(const std::string& name) const {
    auto it = flags.find(name);
    if (it == flags.end()) return std::nullopt;
    return it->second;
  }
  double flag_double(const std::string& name, double dflt) const {
    auto v = flag(name);
    if (!v) return dflt;
    try {
      return std::stod(*v);
    } catch (const std::exception&) {
      throw UsageError("flag --" + name + " expects a number, got '" + *v + "'");
    }
  }
  int flag_int(const std::string& name, int dflt) const {
    auto v = flag(name);
    if (!v) return dflt;
    try {
      return std::stoi(*v);
    } catch (const std::exception&) {
      throw UsageError("flag --" + name + " expects an integer, got '" + *v + "'");
    }
  }
  bool on(const std::string& name) const { return switches.count(name) > 0; }
};

inline Args parse_args(const std::vector<std::string>& argv,
                       const std::set<std::string>& value_flags,
                       const std::set<std::string>& bool_flags) {
  Args out;
  for (std::size_t i = 0; i < argv.size(); ++i) {
    const std::string& a = argv[i];
    if (a.rfind("--", 0) == 0) {
      const std::string name = a.substr(2);
      if (bool_flags.count(name)) {
        out.switches.insert(name);
      } else if (value_flags.count(name)) {
        if (i + 1 >= argv.size()) throw UsageError("flag --" + name + " needs a value");
        out.flags[name] = argv[++i];
      } else {
        throw UsageError("unknown flag --" + name);
      }
    } else {
      out.positional.push_back(a);
    }
  }
  return out;
}

inline GeometricGrid parse_grid_spec(const std::string& text, bool positive_lo) {
  GeometricGrid g;
  char colon1 = 0, colon2 = 0;
  std::istringstream is(text);
  if (!(is >> g.lo >> colon1 >> g.hi >> colon2 >> g.count) || colon1 != ':' ||
      colon2 != ':' || !(g.hi > g.lo) || g.count < 2 || (positive_lo && !(g.lo > 0.0)))
    throw UsageError("grid must be LO:HI:N with HI > LO" +
                     std::string(positive_lo ? " > 0" : " >= 0") + " and N >= 2, got '" +
                     text + "'");
  return g;
}

inline GeometricGrid parse_grid(const std::string& text) {
  return parse_grid_spec(text, true);
}

// A weight from expression text. Without an explicit t_min, probe the ladder
// t_min = e^k until the expression is finite, nonnegative, and nondecreasing
// on [t_min, 100 t_min] (e.g. t/(log t)^2 lands on t_min = e^2).
inline WeightFunction auto_weight(const std::string& text, std::optional<double> tmin) {
  if (tmin) return WeightFunction(parse_expression(text), *tmin, text);
  const Expr e = parse_expression(text);
  for (int k = 0; k <= 12; ++k) {
    const double t0 = std::exp(static_cast<double>(k));
    const double v0 = eval(e, t0);
    if (!std::isfinite(v0) || v0 < 0.0) continue;
    bool ok = true;
    double prev = v0;
    for (int i = 1; i <= 32 && ok; ++i) {
      const double t = t0 * std::pow(100.0, i / 32.0);
      const double v = eval(e, t);
      if (!std::isfinite(v) || v < prev - midpoint_slack(prev)) ok = false;
      prev = v;
    }
    if (ok) return WeightFunction(e, t0, text);
  }
  throw WeightEvalError(text, 0.0, "no workable t_min found on the probe ladder");
}

inline const char* verdict_word(Verdict v) { return to_cstring(v); }

inline int verdict_exit(Verdict v) {
  switch (v) {
    case Verdict::Holds: return kOk;
    case Verdict::Fails: return kFails;
    case Verdict::Inconclusive: return kInconclusive;
  }
  return kInconclusive;
}

inline std::ofstream open_csv(const std::string& path) {
  std::ofstream f(path, std::ios::binary);  // LF endings everywhere
  if (!f) throw JetError("cannot open CSV output path '" + path + "'");
  return f;
}

namespace detail {

inline void grid_kv(Report& rep, const char* key, const GeometricGrid& g) {
  rep.kv(key, format_sig(g.lo, 12) + ":" + format_sig(g.hi, 12) + ":" +
                  std::to_string(g.count));
}

inline void witness_table(Report& rep, const PairVerdict& v, std::size_t cap = 12) {
  if (v.witnesses.empty()) return;
  rep.table("witnesses", {"t", "index", "value"});
  for (std::size_t i = 0; i < v.witnesses.size() && i < cap; ++i)
    rep.row({std::get<0>(v.witnesses[i]), std::get<1>(v.witnesses[i]),
             std::get<2>(v.witnesses[i])});
}

}  // namespace detail

inline int cmd_check_weight(const Args& args, std::ostream& out) {
  std::optional<double> tmin;
  if (args.flag("tmin")) tmin = args.flag_double("tmin", 1.0);
  WeightFunction w = auto_weight(args.pos(0, "<expr>"), tmin);
  GeometricGrid grid{10.0, 1e12, 200};
  if (auto g = args.flag("grid")) grid = parse_grid(*g);

  AxiomReport rep = check_weight_axioms(w, grid);
  Report r;
  r.section("check-weight");
  r.kv("expr", w.name());
  r.kv("tmin", w.t_min());
  detail::grid_kv(r, "grid", grid);
  r.section("axioms");
  r.kv("increasing", verdict_word(rep.increasing));
  r.kv("moderate_growth", verdict_word(rep.moderate_growth.verdict));
  r.kv("C2", rep.c2);
  r.kv("log_small", verdict_word(rep.log_small.verdict));
  r.kv("phi_convex", verdict_word(rep.phi_convex));
  r.kv("concave", verdict_word(rep.concave));
  if (!rep.moderate_growth.witnesses.empty()) {
    r.table("moderate_growth_witnesses", {"t", "ratio"});
    for (const auto& [t, ratio] : rep.moderate_growth.witnesses) r.row({t, ratio});
  }
  r.render(out);

  const Verdict vs[] = {rep.increasing, rep.moderate_growth.verdict,
                        rep.log_small.verdict, rep.phi_convex};
  for (Verdict v : vs)
    if (v == Verdict::Fails) return kFails;
  for (Verdict v : vs)
    if (v == Verdict::Inconclusive) return kInconclusive;
  return kOk;
}

inline int cmd_conjugate(const Args& args, std::ostream& out) {
  WeightFunction w = auto_weight(args.pos(0, "<expr>"), std::nullopt);
  const auto gtext = args.flag("ygrid");
  if (!gtext) throw UsageError("conjugate requires --ygrid LO:HI:N");
  const GeometricGrid g = parse_grid_spec(*gtext, false);  // linear spacing in y
  std::vector<double> ys;
  for (int i = 0; i < g.count; ++i)
    ys.push_back(g.lo + (g.hi - g.lo) * i / (g.count - 1));

  const auto phi = phi_of(normalized(WeightHandle(w)));
  ConjugateTable table = young_conjugate_auto(phi, ys);

  Report r;
  r.section("conjugate");
  r.kv("expr", w.name());
  r.kv("tmin", w.t_min());
  r.kv("ygrid", *gtext);
  r.kv("normalization", "max(0, w(t) - w(1))");
  r.kv("s_max_used", table.s_max);
  r.table("phi_star", {"y", "value", "argmax_s"});
  for (std::size_t i = 0; i < table.y_grid.size(); ++i)
    r.row({table.y_grid[i], table.values[i], table.s_star[i]});
  r.render(out);

  if (auto path = args.flag("csv")) {
    auto f = open_csv(*path);
    CsvWriter csv(f, {"index", "value", "log_value"});
    for (std::size_t i = 0; i < table.values.size(); ++i)
      csv.row({static_cast<double>(i), table.values[i], std::log(table.values[i])});
  }
  return kOk;
}

inline int cmd_weight_matrix(const Args& args, std::ostream& out) {
  WeightFunction w = auto_weight(args.pos(0, "<expr>"), std::nullopt);
  if (!args.flag("x")) throw UsageError("weight-matrix requires --x X");
  if (!args.flag("kmax")) throw UsageError("weight-matrix requires --kmax K");
  const double x = args.flag_double("x", 1.0);
  const int kmax = args.flag_int("kmax", 8);
  if (!(x > 0.0) || kmax < 0) throw UsageError("need x > 0 and kmax >= 0");

  WeightMatrix m = weight_matrix(WeightHandle(w), x, kmax);
  Report r;
  r.section("weight-matrix");
  r.kv("expr", w.name());
  r.kv("x", x);
  r.kv("kmax", kmax);
  r.kv("normalization", "max(0, w(t) - w(1))");
  r.table("W", {"k", "value", "log_value"});
  for (int k = 0; k <= kmax; ++k)
    r.row({static_cast<double>(k),
           m.overflow[static_cast<std::size_t>(k)]
               ? std::numeric_limits<double>::infinity()
               : m.values[static_cast<std::size_t>(k)],
           m.log_values[static_cast<std::size_t>(k)]});
  r.render(out);

  if (auto path = args.flag("csv")) {
    auto f = open_csv(*path);
    CsvWriter csv(f, {"index", "value", "log_value"});
    for (int k = 0; k <= kmax; ++k)
      csv.row({static_cast<double>(k), m.values[static_cast<std::size_t>(k)],
               m.log_values[static_cast<std::size_t>(k)]});
  }
  return kOk;
}

inline int cmd_check_pair(const Args& args, std::ostream& out) {
  std::optional<double> tmin;
  if (args.flag("tmin")) tmin = args.flag_double("tmin", 1.0);
  WeightFunction w = auto_weight(args.pos(0, "<w>"), tmin);
  WeightFunction sigma = auto_weight(args.pos(1, "<sigma>"), tmin);
  const bool discrete = args.on("discrete");
  const auto r_flag = args.flag("r");
  if (discrete == r_flag.has_value())
    throw UsageError("check-pair needs exactly one of --r R or --discrete");

  Report rep;
  rep.section("check-pair");
  rep.kv("w", w.name());
  rep.kv("w_tmin", w.t_min());
  rep.kv("sigma", sigma.name());
  rep.kv("sigma_tmin", sigma.t_min());

  if (r_flag) {
    const double rr = args.flag_double("r", 1.0);
    if (!(rr > 0.0) || rr > 1.0) throw UsageError("--r must lie in (0, 1]");
    GeometricGrid grid = default_pair_grid();
    if (auto g = args.flag("grid")) grid = parse_grid(*g);
    const double tol = args.flag_double("tol", 1e-8);
    PairVerdict v = check_r_strong(w, sigma, rr, grid, tol);
    rep.kv("condition", "r_strong_integral");
    rep.kv("r", rr);
    detail::grid_kv(rep, "grid", grid);
    rep.kv("quad_tol", tol);
    rep.kv("verdict", verdict_word(v.verdict));
    if (v.C) rep.kv("C", *v.C);
    if (v.data.count("beta")) rep.kv("tail_exponent", v.data.at("beta"));
    detail::witness_table(rep, v);
    rep.render(out);

    if (auto path = args.flag("csv")) {
      auto f = open_csv(*path);
      CsvWriter csv(f, {"t", "sigma_r", "sigma", "M"});
      for (double t : grid.points()) {
        SigmaR s = sigma_r(w, rr, t, tol);
        const double st = sigma(t);
        csv.row({t, s.value, st, s.value / (st + 1.0)});
      }
    }
    return verdict_exit(v.verdict);
  }

  DiscreteSearch search;
  search.j_max = args.flag_int("jmax", search.j_max);
  PairVerdict v = check_discrete_condition(w, sigma, search);
  rep.kv("condition", "discrete_growth");
  rep.kv("K_grid", "2, e, 4, 8");
  rep.kv("H_exponents", "0.1 .. 0.95 (10 steps)");
  rep.kv("t0_grid", "1, 10, 100");
  rep.kv("jmax", search.j_max);
  rep.kv("verdict", verdict_word(v.verdict));
  if (v.verdict == Verdict::Holds) {
    rep.kv("C", *v.C);
    rep.kv("K", *v.K);
    rep.kv("H", *v.H);
    rep.kv("t0", *v.t0);
  }
  detail::witness_table(rep, v);
  rep.render(out);
  return verdict_exit(v.verdict);
}

inline int cmd_growth_index(const Args& args, std::ostream& out) {
  std::optional<double> tmin;
  if (args.flag("tmin")) tmin = args.flag_double("tmin", 1.0);
  WeightFunction sigma = auto_weight(args.pos(0, "<sigma>"), tmin);
  WeightFunction w = auto_weight(args.pos(1, "<w>"), tmin);
  const double tol = args.flag_double("tol", 0.01);

  GrowthIndex g = growth_index(sigma, w, tol);
  Report rep;
  rep.section("growth-index");
  rep.kv("sigma", sigma.name());
  rep.kv("w", w.name());
  rep.kv("bracket_tol", tol);
  detail::grid_kv(rep, "grid", default_pair_grid());
  if (g.not_strong) {
    rep.kv("gamma", "< 1 (pair not strong)");
  } else {
    rep.kv("gamma", g.gamma);
    rep.kv("r_star", g.r_star);
    rep.kv("r_bracket_lo", g.r_lo);
    rep.kv("r_bracket_hi", g.r_hi);
    rep.kv("capped_at_probe_floor", g.capped);
  }
  rep.table("probes", {"r", "verdict"});
  for (const auto& [r, verdict] : g.probes)
    rep.row(std::vector<std::string>{format_sig(r, 12), verdict_word(verdict)});
  rep.render(out);
  return g.not_strong ? kFails : kOk;
}

inline int cmd_kappa(const Args& args, std::ostream& out) {
  std::optional<double> tmin;
  if (args.flag("tmin")) tmin = args.flag_double("tmin", 1.0);
  WeightFunction w = auto_weight(args.pos(0, "<w>"), tmin);
  if (!args.flag("t")) throw UsageError("kappa requires --t T");
  const double t = args.flag_double("t", 1.0);
  const double tol = args.flag_double("tol", 1e-8);
  if (!(t > 0.0)) throw UsageError("--t must be positive");

  SigmaR k = kappa(w, t, tol);
  Report rep;
  rep.section("kappa");
  rep.kv("w", w.name());
  rep.kv("tmin", w.t_min());
  rep.kv("t", t);
  rep.kv("quad_tol", tol);
  rep.kv("status", k.divergent() ? "divergent" : (k.status == ImproperIntegral::Status::Truncated ? "converged (truncated at argument cap)" : "converged"));
  if (!k.divergent()) {
    rep.kv("value", k.value);
    rep.kv("ramp_part", k.ramp_part);
  }
  rep.kv("tail_exponent", k.beta);
  rep.render(out);

  // curve export: (t, sigma_r, kappa, tau_r) over --grid with --r/--K
  if (auto path = args.flag("csv")) {
    GeometricGrid grid{10.0, 1e8, 64};
    if (auto g = args.flag("grid")) grid = parse_grid(*g);
    const double rr = args.flag_double("r", 0.75);
    const double K = args.flag_double("K", 2.0);
    auto f = open_csv(*path);
    CsvWriter csv(f, {"t", "sigma_r", "kappa", "tau_r"});
    for (double tt : grid.points()) {
      SigmaR sr = sigma_r(w, rr, tt, tol);
      SigmaR kp = kappa(w, tt, tol);
      TauR tr = tau_r(w, K, rr, tt, 40);
      csv.row({tt, sr.value, kp.value, tr.value});
    }
  }
  if (k.status == ImproperIntegral::Status::Error) return kInconclusive;
  return k.divergent() ? kFails : kOk;
}

inline int cmd_reduce(const Args& args, std::ostream& out, std::ostream& err) {
  std::optional<double> tmin;
  if (args.flag("tmin")) tmin = args.flag_double("tmin", 1.0);
  WeightFunction w = auto_weight(args.pos(0, "<w>"), tmin);
  WeightFunction sigma = auto_weight(args.pos(1, "<sigma>"), tmin);
  if (!args.flag("f")) throw UsageError("reduce requires --f <expr>");
  WeightFunction f = auto_weight(*args.flag("f"), tmin);
  const int n_max = args.flag_int("nmax", 8);
  if (n_max < 3) throw UsageError("--nmax must be >= 3");

  Report rep;
  rep.section("reduce");
  rep.kv("w", w.name());
  rep.kv("sigma", sigma.name());
  rep.kv("f", f.name());
  rep.kv("nmax", n_max);
  rep.kv("nq", args.on("nq"));
  rep.kv("margin", 1.05);

  // hypothesis battery
  const GeometricGrid axiom_grid{std::max(10.0, 4.0 * w.t_min()), 1e12, 200};
  AxiomReport ax = check_weight_axioms(w, axiom_grid);
  AsymptoticVerdict o_t = asymptotic_verdict(
      sigma, [](double t) { return t; }, AsymptoticRelation::LittleO,
      GeometricGrid{std::max(10.0, 4.0 * sigma.t_min()), 1e12, 200});
  PairVerdict disc = check_discrete_condition(w, sigma);
  rep.section("hypotheses");
  rep.kv("w_concave", verdict_word(ax.concave));
  rep.kv("w_moderate_growth", verdict_word(ax.moderate_growth.verdict));
  rep.kv("sigma_o_t", verdict_word(o_t.verdict));
  rep.kv("discrete_condition", verdict_word(disc.verdict));
  if (ax.concave != Verdict::Holds || ax.moderate_growth.verdict != Verdict::Holds ||
      o_t.verdict != Verdict::Holds || disc.verdict != Verdict::Holds) {
    rep.render(out);
    err << "reduce: hypothesis battery failed\n";
    return kFails;
  }
  rep.kv("C", *disc.C);
  rep.kv("K", *disc.K);
  rep.kv("H", *disc.H);
  rep.kv("t0", *disc.t0);

  ReductionOptions opt;
  opt.n_max = n_max;
  opt.enforce_nq = args.on("nq");
  ReductionResult res;
  try {
    res = build_reduction(make_reduction_input(
        w, sigma, WeightHandle(f), {*disc.C, *disc.K, *disc.H, *disc.t0}, opt));
  } catch (const ReductionError& e) {
    rep.render(out);
    err << "reduce: " << e.what() << "\n";
    return kFails;
  }

  rep.section("sequences");
  rep.table("xyz", {"n", "x_n", "y_n", "z_n"});
  for (int n = 1; n <= n_max; ++n)
    rep.row({static_cast<double>(n), res.x[static_cast<std::size_t>(n)],
             res.y[static_cast<std::size_t>(n)], res.z[static_cast<std::size_t>(n)]});
  if (opt.enforce_nq) {
    rep.table("nq_tails", {"n", "tail", "budget"});
    for (int n = 2; n <= n_max; ++n)
      rep.row({static_cast<double>(n), res.nq_tail_value[static_cast<std::size_t>(n)],
               1.0 / (static_cast<double>(n) * n * n)});
  }

  ValidationReport val = validate_reduction(res);
  rep.section("validation");
  for (const auto& c : val.claims) {
    rep.kv(c.name, c.pass ? "pass" : "fail");
    rep.kv(c.name + " min_margin", c.min_margin);
  }
  rep.kv("continuity", val.continuity_pass ? "pass" : "fail");
  rep.kv("max_continuity_err", val.max_continuity_err);
  rep.kv("w_tilde_concave", val.omega_tilde_concave);
  rep.kv("w_tilde_log_convex", val.omega_tilde_log_convex);
  rep.kv("sigma_tilde_log_convex", val.sigma_tilde_log_convex);
  rep.kv("transfer_D", val.transfer_D);
  rep.kv("recert_found", val.recert.found);
  if (val.recert.found) {
    rep.kv("recert_H_tilde", val.recert.H_tilde);
    rep.kv("recert_D_tilde", val.recert.D_tilde);
    rep.kv("recert_N_tilde", val.recert.N_tilde);
  }
  if (opt.enforce_nq) {
    rep.kv("nq_partial_sum", val.nq_partial_sum);
    rep.kv("nq_budget", val.nq_budget);
    rep.kv("nq_bound", val.nq_partial_sums_pass ? "pass" : "fail");
  }
  rep.kv("all_pass", val.all_pass());
  rep.render(out);

  if (auto path = args.flag("csv")) {
    auto fcsv = open_csv(*path);
    CsvWriter csv(fcsv, {"t", "w", "w_tilde", "sigma", "sigma_tilde", "f"});
    const double lo = res.range_lo(), hi = res.range_hi();
    for (int i = 0; i <= 512; ++i) {
      const double t = lo * std::pow(hi / lo, i / 512.0);
      csv.row({t, w(t), res.omega_tilde_unchecked(t), sigma(t),
               res.sigma_tilde_unchecked(t), f(t)});
    }
  }
  if (auto path = args.flag("seq-csv")) {
    auto fcsv = open_csv(*path);
    CsvWriter csv(fcsv, {"n", "x_n", "y_n", "z_n"});
    for (int n = 1; n <= n_max; ++n)
      csv.row({static_cast<double>(n), res.x[static_cast<std::size_t>(n)],
               res.y[static_cast<std::size_t>(n)], res.z[static_cast<std::size_t>(n)]});
  }
  return val.all_pass() ? kOk : kFails;
}

inline Jet load_jet(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw JetError("cannot open jet file '" + path + "'");
  return parse_jet(f);
}

inline int cmd_jet_seminorm(const Args& args, std::ostream& out) {
  Jet jet = load_jet(args.pos(0, "<jetfile>"));
  WeightFunction w = auto_weight(args.pos(1, "<w>"), std::nullopt);
  if (!args.flag("m")) throw UsageError("jet-seminorm requires --m M");
  if (!args.flag("pmax")) throw UsageError("jet-seminorm requires --pmax P");
  const int m = args.flag_int("m", 1);
  const int pmax = args.flag_int("pmax", jet.p_cap());
  if (m < 1) throw UsageError("--m must be >= 1");
  if (pmax < 0 || pmax > jet.p_cap())
    throw UsageError("--pmax must lie in [0, pcap]");

  JetSeminorms sn = beurling_seminorms(jet, w, m, pmax);
  Report rep;
  rep.section("jet-seminorm");
  rep.kv("jet_points", jet.n_points());
  rep.kv("jet_dim", jet.dim());
  rep.kv("jet_pcap", jet.p_cap());
  rep.kv("w", w.name());
  rep.kv("m", m);
  rep.kv("pmax", pmax);
  rep.section("values");
  rep.kv("norm", sn.norm);
  rep.kv("norm_arg_alpha_rank", sn.norm_arg.alpha_rank);
  rep.kv("norm_arg_point", sn.norm_arg.x_idx);
  rep.kv("seminorm", sn.seminorm);
  rep.kv("seminorm_arg_p", sn.seminorm_arg.p);
  rep.kv("seminorm_arg_alpha_rank", sn.seminorm_arg.alpha_rank);
  rep.kv("seminorm_arg_x", sn.seminorm_arg.x_idx);
  rep.kv("seminorm_arg_y", sn.seminorm_arg.y_idx);
  rep.render(out);
  return kOk;
}

inline int cmd_jet_reduce(const Args& args, std::ostream& out, std::ostream& err) {
  Jet jet = load_jet(args.pos(0, "<jetfile>"));
  WeightFunction w = auto_weight(args.pos(1, "<w>"), std::nullopt);
  WeightFunction sigma = auto_weight(args.pos(2, "<sigma>"), std::nullopt);
  PipelineConfig cfg;
  cfg.j_max = args.flag_int("jmax", cfg.j_max);
  cfg.p_max = std::min(args.flag_int("pmax", std::min(cfg.p_max, jet.p_cap())),
                       jet.p_cap());
  cfg.n_max = args.flag_int("nmax", cfg.n_max);
  if (cfg.j_max <= cfg.n_max * cfg.n_max)
    throw UsageError("--jmax must exceed nmax^2");

  PipelineReport pr = beurling_to_roumieu_pipeline(jet, w, sigma, cfg);
  Report rep;
  rep.section("jet-reduce");
  rep.kv("jet_points", jet.n_points());
  rep.kv("w", w.name());
  rep.kv("sigma", sigma.name());
  rep.kv("jmax", cfg.j_max);
  rep.kv("pmax", cfg.p_max);
  rep.kv("nmax", cfg.n_max);
  rep.section("stages");
  for (const auto& s : pr.stages) {
    rep.kv(s.name, s.pass ? "pass" : "fail");
    rep.kv(s.name + " detail", s.detail);
  }
  if (pr.reduction) {
    rep.section("reduction_range");
    rep.kv("x_2", pr.reduction->range_lo());
    rep.kv("x_nmax", pr.reduction->range_hi());
    rep.kv("B", pr.B);
  }
  if (pr.membership) {
    rep.section("membership");
    rep.table("per_x", {"x", "stable", "norm_sup", "semi_sup"});
    for (const auto& row : pr.membership->table)
      rep.row(std::vector<std::string>{format_sig(row.x, 12), row.stable ? "yes" : "no",
                                       format_sig(row.norm_sup, 12),
                                       format_sig(row.semi_sup, 12)});
  }
  rep.kv("all_pass", pr.all_pass());
  rep.render(out);
  if (pr.aborted) err << "jet-reduce: " << pr.abort_reason << "\n";
  return pr.all_pass() ? kOk : kFails;
}

inline int dispatch(const std::vector<std::string>& argv, std::ostream& out,
                    std::ostream& err) {
  if (argv.empty()) {
    err << "usage: ultra <subcommand> [args]\n"
           "subcommands: check-weight, conjugate, weight-matrix, check-pair,\n"
           "             growth-index, kappa, reduce, jet-seminorm, jet-reduce\n";
    return kUsage;
  }
  const std::string cmd = argv[0];
  const std::vector<std::string> rest(argv.begin() + 1, argv.end());
  try {
    if (cmd == "check-weight") {
      Args a = parse_args(rest, {"tmin", "grid"}, {});
      return cmd_check_weight(a, out);
    }
    if (cmd == "conjugate") {
      Args a = parse_args(rest, {"ygrid", "csv"}, {});
      return cmd_conjugate(a, out);
    }
    if (cmd == "weight-matrix") {
      Args a = parse_args(rest, {"x", "kmax", "csv"}, {});
      return cmd_weight_matrix(a, out);
    }
    if (cmd == "check-pair") {
      Args a = parse_args(rest, {"r", "grid", "jmax", "tol", "tmin", "csv"}, {"discrete"});
      return cmd_check_pair(a, out);
    }
    if (cmd == "growth-index") {
      Args a = parse_args(rest, {"tol", "tmin"}, {});
      return cmd_growth_index(a, out);
    }
    if (cmd == "kappa") {
      Args a = parse_args(rest, {"t", "tol", "tmin", "csv", "grid", "r", "K"}, {});
      return cmd_kappa(a, out);
    }
    if (cmd == "reduce") {
      Args a = parse_args(rest, {"f", "nmax", "csv", "seq-csv", "tmin"}, {"nq"});
      return cmd_reduce(a, out, err);
    }
    if (cmd == "jet-seminorm") {
      Args a = parse_args(rest, {"m", "pmax"}, {});
      return cmd_jet_seminorm(a, out);
    }
    if (cmd == "jet-reduce") {
      Args a = parse_args(rest, {"jmax", "pmax", "nmax"}, {});
      return cmd_jet_reduce(a, out, err);
    }
    err << "ultra: unknown subcommand '" << cmd << "'\n";
    return kUsage;
  } catch (const UsageError& e) {
    err << "ultra " << cmd << ": " << e.what() << "\n";
    return kUsage;
  } catch (const SyntaxError& e) {
    err << "ultra " << cmd << ": " << e.what() << "\n";
    return kUsage;
  } catch (const JetError& e) {
    err << "ultra " << cmd << ": " << e.what() << "\n";
    return kData;
  } catch (const WeightEvalError& e) {
    err << "ultra " << cmd << ": " << e.what() << "\n";
    return kData;
  } catch (const ArgmaxBoundaryError& e) {
    err << "ultra " << cmd << ": " << e.what() << "\n";
    return kData;
  } catch (const ReductionError& e) {
    err << "ultra " << cmd << ": " << e.what() << "\n";
    return kFails;
  } catch (const std::invalid_argument& e) {
    err << "ultra " << cmd << ": " << e.what() << "\n";
    return kUsage;
  }
}

}  // namespace ultra::cli
