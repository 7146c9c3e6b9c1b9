#pragma once

// Command-line front end. `run` parses argv, executes one subcommand and
// writes a Report (CSV or JSON) to --out or the given stream.
//
// Exit codes: 0 success, 2 usage or input error (bad flags, unparsable
// potential, parameters outside the domain), 1 computational failure
// (NonConvergence, Inconclusive, NonFiniteSolution, Overflow, I/O).

#include <fracsl/errors.hpp>
#include <fracsl/fractional_ops.hpp>
#include <fracsl/potential.hpp>
#include <fracsl/report.hpp>
#include <fracsl/special_functions.hpp>
#include <fracsl/spectrum.hpp>
#include <fracsl/volterra.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace fracsl::cli {

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline bool parse_number(std::string_view text, double& out) {
  const std::string s = trim(text);
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto res = std::from_chars(first, s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size() && std::isfinite(out);
}

inline double number_or_throw(std::string_view token, const std::string& what) {
  double v = 0.0;
  if (!parse_number(token, v)) throw ParseError("invalid " + what, std::string(token));
  return v;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

inline SampledFunction read_samples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open potential file '" + path + "'");
  SampledFunction f;
  std::string line;
  bool first_data_line = true;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto cols = split(t, ',');
    double x = 0.0, v = 0.0;
    const bool ok = cols.size() == 2 && parse_number(cols[0], x) && parse_number(cols[1], v);
    if (!ok) {
      if (first_data_line) {  // header row
        first_data_line = false;
        continue;
      }
      throw ParseError("potential samples must be 't,value' rows in " + path, t);
    }
    first_data_line = false;
    f.nodes.push_back(x);
    f.values.push_back(v);
  }
  try {
    validate(f);
  } catch (const DomainError& e) {
    throw ParseError(std::string("bad potential samples: ") + e.what(), path);
  }
  return f;
}

}  // namespace detail

/// "zero" | "const:<c>" | "poly:<c0>,<c1>,..." | "csv:<path>".
inline Potential parse_potential(const std::string& spec) {
  const std::string s = detail::trim(spec);
  if (s == "zero") return Potential::zero();
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw ParseError("unknown potential", s);
  const std::string kind = s.substr(0, colon);
  const std::string rest = s.substr(colon + 1);
  if (kind == "const") return Potential::constant(detail::number_or_throw(rest, "constant potential"));
  if (kind == "poly") {
    std::vector<double> c;
    for (const auto& tok : detail::split(rest, ',')) c.push_back(detail::number_or_throw(tok, "polynomial coefficient"));
    return Potential::polynomial(std::move(c));
  }
  if (kind == "csv") {
    if (rest.empty()) throw ParseError("csv potential needs a path", s);
    return Potential::sampled(detail::read_samples(rest), rest);
  }
  throw ParseError("unknown potential kind", kind);
}

namespace detail {

// Registers options and remembers how to echo them into the report.
class Echo {
 public:
  template <class T>
  CLI::Option* add(CLI::App* app, const std::string& flag, T& var, const std::string& help) {
    auto* opt = app->add_option(flag, var, help);
    const std::string key = snake(flag);
    fields_.push_back({key, [&var] { return to_text(var); }});
    return opt;
  }
  CLI::Option* flag(CLI::App* app, const std::string& flag, bool& var, const std::string& help) {
    auto* opt = app->add_flag(flag, var, help);
    fields_.push_back({snake(flag), [&var] { return std::string(var ? "true" : "false"); }});
    return opt;
  }
  std::vector<std::pair<std::string, std::string>> values() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [k, f] : fields_) out.emplace_back(k, f());
    return out;
  }

 private:
  static std::string snake(const std::string& flag) {
    std::string s = flag.substr(flag.find_first_not_of('-'));
    std::replace(s.begin(), s.end(), '-', '_');
    return s;
  }
  static std::string to_text(double v) { return fracsl::detail::format_double(v); }
  static std::string to_text(int v) { return std::to_string(v); }
  static std::string to_text(unsigned v) { return std::to_string(v); }
  static std::string to_text(std::size_t v) { return std::to_string(v); }
  static std::string to_text(const std::string& v) { return v; }

  std::vector<std::pair<std::string, std::function<std::string()>>> fields_;
};

inline Cell text(std::string s) { return Cell{std::move(s)}; }
inline Cell num(double v) { return Cell{v}; }
inline Cell integer(long long v) { return Cell{static_cast<std::int64_t>(v)}; }

inline const char* regime_name(MittagLeffler::Regime r) {
  switch (r) {
    case MittagLeffler::Regime::origin: return "origin";
    case MittagLeffler::Regime::series: return "series";
    case MittagLeffler::Regime::extended: return "extended";
    case MittagLeffler::Regime::asymptotic: return "asymptotic";
    case MittagLeffler::Regime::positive: return "positive";
  }
  return "unknown";
}

inline const char* detection_name(Detection d) {
  switch (d) {
    case Detection::sign_change: return "sign_change";
    case Detection::grid_zero: return "grid_zero";
    case Detection::tangent: return "tangent";
  }
  return "unknown";
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << content;
  if (!out) throw IoError("write failed for '" + path + "'");
}

struct Options {
  double alpha = 0.9;
  double lambda = 10.0;
  double delta = 1.0;
  double theta = 1.0;
  double z = 0.0;
  std::string q = "zero";
  std::size_t nodes = 1024;
  double lambda_max = 0.0;
  double tol = -1.0;  // per-command default
  std::string format = "csv";
  std::string out;
  double c1 = 0.0;
  double c2 = 1.0;
  int n_max = 5;
  int points = 64;
  unsigned threads = 0;
  std::string trace;
  int trace_points = 2000;
  std::string curve;
  bool classical = false;
  bool with_residual = false;
};

inline void run_ml(const Options& o, Report& r) {
  MLEvalConfig cfg;
  if (o.tol > 0.0) cfg.rel_tol = o.tol;
  const MittagLeffler e({o.delta, o.theta}, cfg, std::abs(o.z));
  r.columns = {"z", "delta", "theta", "value", "derivative", "regime"};
  const double v = e(o.z);
  const double d = e.derivative(o.z);
  r.rows.push_back({num(o.z), num(o.delta), num(o.theta), num(v), num(d), text(regime_name(e.regime(o.z)))});
  r.summary.emplace_back("value", num(v));
}

inline void run_solve(const Options& o, Report& r) {
  const Potential q = parse_potential(o.q);
  const BoundaryData b{o.c1, o.c2};
  Solution sol = o.classical ? classical_solve(o.lambda, q, b, o.nodes) : solve(o.alpha, o.lambda, q, b, o.nodes);
  r.columns = {"t", "y"};
  for (std::size_t i = 0; i < sol.mesh.size(); ++i) r.rows.push_back({num(sol.mesh[i]), num(sol.y[i])});
  r.summary.emplace_back("alpha", num(sol.alpha));
  r.summary.emplace_back("lambda", num(sol.lambda));
  r.summary.emplace_back("potential", text(q.descriptor()));
  r.summary.emplace_back("singular_at_zero", Cell{sol.singular_at_zero()});
  const double bf = sol.alpha == 1.0 ? sol.y.back() : rl_integral_left(sol.sampled(), 1.0 - sol.alpha, 1.0);
  r.summary.emplace_back("boundary_functional", num(bf));
  if (o.with_residual) r.summary.emplace_back("residual", num(residual(sol, q)));
}

inline SearchConfig search_config(const Options& o) {
  SearchConfig cfg;
  cfg.lambda_max = o.lambda_max;
  if (o.tol > 0.0) cfg.root_tol = o.tol;
  cfg.mesh_nodes = o.nodes;
  cfg.scan_points_per_interval = o.points;
  cfg.threads = o.threads;
  return cfg;
}

inline void run_spectrum(const Options& o, Report& r) {
  const Potential q = parse_potential(o.q);
  const SearchConfig cfg = search_config(o);
  const SpectrumResult s = find_real_eigenvalues(o.alpha, q, cfg);
  r.columns = {"lambda", "residual", "interval_index", "refinement_iters", "detection", "low_confidence"};
  for (const auto& e : s.eigenvalues) {
    r.rows.push_back({num(e.value), num(e.residual), integer(e.bracket ? e.bracket->index : -1),
                      integer(e.refinement_iters), text(detection_name(e.detection)), Cell{e.low_confidence}});
  }
  r.summary.emplace_back("alpha", num(s.alpha));
  r.summary.emplace_back("potential", text(s.potential_descriptor));
  r.summary.emplace_back("n_star", integer(s.n_star));
  r.summary.emplace_back("search_bound", num(s.search_bound));
  r.summary.emplace_back("certified", Cell{s.certified});
  if (!o.trace.empty()) {
    const Characteristic f(o.alpha, q, cfg);
    std::ostringstream os;
    os << "lambda,delta\n";
    const int n = std::max(2, o.trace_points);
    for (int i = 1; i <= n; ++i) {
      const double l = s.search_bound * i / n;
      os << fracsl::detail::format_double(l) << ',' << fracsl::detail::format_double(f(l)) << '\n';
    }
    write_file(o.trace, os.str());
  }
}

inline void run_intervals(const Options& o, Report& r) {
  r.columns = {"n", "lo", "hi", "asymptotic_eigenvalue"};
  for (const auto& iv : bracket_intervals(o.alpha, o.n_max)) {
    r.rows.push_back({integer(iv.index), num(iv.lo), num(iv.hi), num(asymptotic_eigenvalue(o.alpha, iv.index))});
  }
  r.summary.emplace_back("alpha", num(o.alpha));
}

inline void run_critical_alpha(const Options& o, Report& r) {
  SearchConfig cfg = search_config(o);
  cfg.root_tol = SearchConfig{}.root_tol;  // --tol is the alpha tolerance here
  const double tol = o.tol > 0.0 ? o.tol : 1e-3;
  std::map<double, int> curve;
  const double a = critical_alpha(cfg, tol, [&](double alpha, int k) { curve[alpha] = k; });
  r.columns = {"critical_alpha", "alpha_tol"};
  r.rows.push_back({num(a), num(tol)});
  r.summary.emplace_back("critical_alpha", num(a));
  r.summary.emplace_back("n_star_evaluations", integer(static_cast<long long>(curve.size())));
  if (!o.curve.empty()) {
    std::ostringstream os;
    os << "alpha,n_star\n";
    for (const auto& [alpha, k] : curve) os << fracsl::detail::format_double(alpha) << ',' << k << '\n';
    write_file(o.curve, os.str());
  }
}

inline bool usage_error(const Error& e) {
  if (dynamic_cast<const OverflowError*>(&e)) return false;
  return dynamic_cast<const DomainError*>(&e) || dynamic_cast<const ParseError*>(&e);
}

}  // namespace detail

/// Runs one CLI invocation; argv[0] is the program name.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Real eigenvalues of fractional Sturm-Liouville problems"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));
  detail::Options o;
  std::map<CLI::App*, detail::Echo> echoes;

  auto common = [&](CLI::App* sub, detail::Echo& e) {
    e.add(sub, "--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    e.add(sub, "--out", o.out, "output file (default: standard output)");
  };

  auto* ml_cmd = app.add_subcommand("ml", "evaluate E_{delta,theta}(z) and its derivative");
  {
    auto& e = echoes[ml_cmd];
    e.add(ml_cmd, "--delta", o.delta, "delta > 0")->required();
    e.add(ml_cmd, "--theta", o.theta, "theta")->required();
    e.add(ml_cmd, "--z", o.z, "real argument")->required();
    e.add(ml_cmd, "--tol", o.tol, "relative tolerance (default 1e-14)");
    common(ml_cmd, e);
  }
  auto* solve_cmd = app.add_subcommand("solve", "solve the Volterra equation for y on [0,1]");
  {
    auto& e = echoes[solve_cmd];
    e.add(solve_cmd, "--alpha", o.alpha, "order in [0.5, 1]")->required();
    e.add(solve_cmd, "--lambda", o.lambda, "spectral parameter")->required();
    e.add(solve_cmd, "--q", o.q, "potential: zero | const:c | poly:c0,c1,... | csv:path");
    e.add(solve_cmd, "--c1", o.c1, "I^{1-alpha} y(0+)");
    e.add(solve_cmd, "--c2", o.c2, "D^alpha y(0+)");
    e.add(solve_cmd, "--nodes", o.nodes, "mesh nodes (>= 16)");
    e.flag(solve_cmd, "--classical", o.classical, "use the alpha = 1 sine kernel");
    e.flag(solve_cmd, "--residual", o.with_residual, "also report the equation residual");
    common(solve_cmd, e);
  }
  auto* spec_cmd = app.add_subcommand("spectrum", "find the real eigenvalues");
  {
    auto& e = echoes[spec_cmd];
    e.add(spec_cmd, "--alpha", o.alpha, "order in (0.5, 1]")->required();
    e.add(spec_cmd, "--q", o.q, "potential: zero | const:c | poly:c0,c1,... | csv:path");
    e.add(spec_cmd, "--lambda-max", o.lambda_max, "scan bound (0 = automatic)");
    e.add(spec_cmd, "--tol", o.tol, "root tolerance (default 1e-10)");
    e.add(spec_cmd, "--nodes", o.nodes, "mesh nodes for q != 0");
    e.add(spec_cmd, "--points", o.points, "scan points per interval");
    e.add(spec_cmd, "--threads", o.threads, "scan threads (0 = all, capped by FRAC_SPECTRA_THREADS)");
    e.add(spec_cmd, "--trace", o.trace, "write lambda,delta samples to this CSV file");
    e.add(spec_cmd, "--trace-points", o.trace_points, "samples in the trace");
    common(spec_cmd, e);
  }
  auto* iv_cmd = app.add_subcommand("intervals", "list the bracketing intervals I_n(alpha)");
  {
    auto& e = echoes[iv_cmd];
    e.add(iv_cmd, "--alpha", o.alpha, "order in (0.5, 1]")->required();
    e.add(iv_cmd, "--n-max", o.n_max, "largest interval index");
    common(iv_cmd, e);
  }
  auto* crit_cmd = app.add_subcommand("critical-alpha", "locate the smallest alpha with real eigenvalues");
  {
    auto& e = echoes[crit_cmd];
    e.add(crit_cmd, "--tol", o.tol, "alpha tolerance (default 1e-3, >= 1e-4)");
    e.add(crit_cmd, "--points", o.points, "scan points per interval");
    e.add(crit_cmd, "--threads", o.threads, "scan threads");
    e.add(crit_cmd, "--curve", o.curve, "write alpha,n_star samples to this CSV file");
    common(crit_cmd, e);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  Report report;
  report.command = sub->get_name();
  report.config = echoes[sub].values();
  int code = 0;
  try {
    if (sub == ml_cmd) detail::run_ml(o, report);
    if (sub == solve_cmd) detail::run_solve(o, report);
    if (sub == spec_cmd) detail::run_spectrum(o, report);
    if (sub == iv_cmd) detail::run_intervals(o, report);
    if (sub == crit_cmd) detail::run_critical_alpha(o, report);
  } catch (const Error& e) {
    report.fail(e);
    report.columns.clear();
    report.rows.clear();
    code = detail::usage_error(e) ? 2 : 1;
    err << e.name() << ": " << e.what() << '\n';
  } catch (const std::exception& e) {
    report.fail(Error(e.what()));
    report.columns.clear();
    report.rows.clear();
    code = 1;
    err << "Error: " << e.what() << '\n';
  }

  const std::string text = o.format == "json" ? to_json(report) : to_csv(report);
  if (o.out.empty()) {
    out << text;
  } else {
    try {
      detail::write_file(o.out, text);
    } catch (const IoError& e) {
      err << e.name() << ": " << e.what() << '\n';
      return 1;
    }
  }
  return code;
}

/// Convenience overload: args exclude the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  std::vector<const char*> argv{"fracsl"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace fracsl::cli
