// Acceptance runner: one PASS/FAIL line per criterion.
#include <fracsl/fracsl.hpp>

#include <CLI11.hpp>

#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace fracsl;

namespace {

constexpr double kPi = std::numbers::pi;

struct Verdict {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  std::string title;
  double time_limit_s;
  std::function<Verdict()> check;
};

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

double rel_err(double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-300); }

double max_abs_rel(const std::vector<double>& a, const std::vector<double>& b) {
  double scale = 0.0, diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    scale = std::max(scale, std::abs(b[i]));
    diff = std::max(diff, std::abs(a[i] - b[i]));
  }
  return diff / scale;
}

SearchConfig bounded(double lambda_max) {
  SearchConfig c;
  c.lambda_max = lambda_max;
  return c;
}

std::map<int, std::vector<double>> zeros_by_interval(const SpectrumResult& r) {
  std::map<int, std::vector<double>> out;
  for (const auto& e : r.eigenvalues) out[e.bracket ? e.bracket->index : -1].push_back(e.value);
  return out;
}

Verdict ml_identities() {
  double e1 = 0.0, e2 = 0.0, e3 = 0.0;
  for (int i = 0; i < 400; ++i) {
    const double z = -100.0 + 110.0 * i / 399.0;
    e1 = std::max(e1, std::abs(ml({1, 1}, z) - std::exp(z)) / std::max(1.0, std::exp(z)));
  }
  for (int i = 0; i < 400; ++i) {
    const double z = 100.0 * i / 399.0;
    const double s = std::sqrt(z);
    e2 = std::max(e2, rel_err(ml({2, 1}, z), std::cosh(s)));
    e2 = std::max(e2, rel_err(ml({2, 2}, z), z == 0.0 ? 1.0 : std::sinh(s) / s));
  }
  for (int i = 1; i <= 400; ++i) {
    const double z = -100.0 * i / 400.0;
    const double s = std::sqrt(-z);
    e3 = std::max(e3, std::abs(ml({2, 1}, z) - std::cos(s)));
    e3 = std::max(e3, std::abs(ml({2, 2}, z) - std::sin(s) / s));
  }
  const double worst = std::max({e1, e2, e3});
  return {worst <= 1e-10, "exp " + fmt(e1) + ", cosh/sinh " + fmt(e2) + ", cos/sin " + fmt(e3)};
}

Verdict recurrence() {
  double worst = 0.0;
  for (double a : {0.6, 0.7, 0.8, 0.9, 1.0}) {
    const double d = 2 * a;
    for (double t : {0.0, 1.0, 2.0, 2 * d}) {
      const MittagLeffler lhs_e({d, t}, {}, 500.0);
      const MittagLeffler rhs_e({d, t + d}, {}, 500.0);
      for (int i = 0; i <= 200; ++i) {
        const double z = -0.1 - (500.0 - 0.1) * i / 200.0;
        const double lhs = lhs_e(z);
        const double zr = z * rhs_e(z);
        const double g = gamma_recip(t);
        const double scale = std::max({std::abs(lhs), std::abs(zr), std::abs(g)});
        worst = std::max(worst, std::abs(lhs - (zr + g)) / scale);
      }
    }
  }
  return {worst <= 1e-9, "max rel err " + fmt(worst)};
}

Verdict quadrature() {
  // Constants: exact up to rounding at every refinement.
  double const_err = 0.0;
  for (double c : {1.0, -2.0, 5.0}) {
    for (double a : {0.55, 0.75, 0.95}) {
      for (double t : {0.25, 0.5, 1.0}) {
        const double want = c * std::pow(t, a) / std::tgamma(a + 1.0);
        for (int n : {128, 256, 512, 1024}) {
          QuadratureConfig q;
          q.refinement = n;
          const double got = rl_integral_left([c](double) { return c; }, a, t, q);
          const_err = std::max(const_err, std::abs(got - want) / std::abs(want));
        }
      }
    }
  }
  // Order over three doublings, measured where the error is not rounding.
  double min_order = 1e300, err1024 = 0.0;
  for (double a : {0.55, 0.75, 0.95}) {
    for (double t : {0.25, 0.5, 1.0}) {
      const double want = std::tgamma(3.0) / std::tgamma(3.0 + a) * std::pow(t, 2.0 + a);
      double prev = 0.0;
      for (int k = 0; k < 4; ++k) {
        QuadratureConfig q;
        q.refinement = 128 << k;
        const double err = std::abs(rl_integral_left([](double s) { return s * s; }, a, t, q) - want);
        if (k > 0) min_order = std::min(min_order, std::log2(prev / err));
        if (q.refinement == 1024) err1024 = std::max(err1024, err);
        prev = err;
      }
    }
  }
  const bool ok = const_err <= 1e-12 && min_order >= 1.9 && err1024 <= 1e-6;
  return {ok, "constants rel err " + fmt(const_err) + ", s^2 min order " + fmt(min_order) + ", s^2 err at 1024 " +
                  fmt(err1024)};
}

Verdict kernel_bound_and_limits() {
  double worst = 0.0;
  for (double a : {0.5, 0.55, 0.6, 0.75, 0.9, 0.99, 1.0}) {
    const FractionalVolterra v(a);
    for (double l : {1.0, 10.0, 100.0, 1000.0}) {
      for (int i = 1; i <= 4096; ++i) worst = std::max(worst, std::abs(v.kernel(l, i / 4096.0)));
    }
  }
  bool ok = worst <= 1.0 + 1e-12;
  std::string detail = "sup |K| " + fmt(worst) + "; at u=1e-6:";
  const double half = kernel(0.5, 10.0, 1e-6);
  ok = ok && std::abs(half - 1.0) <= 1e-3;
  detail += " a=0.5 " + fmt(half);
  for (double a : {0.6, 0.75, 0.9, 1.0}) {
    const double k = kernel(a, 10.0, 1e-6);
    ok = ok && std::abs(k) <= 1e-3;
    detail += " a=" + fmt(a) + " " + fmt(k);
  }
  return {ok, detail};
}

Verdict classical_limit() {
  bool ok = true;
  std::string detail;
  for (auto [a, tol] : {std::pair{0.999, 0.02}, std::pair{0.9999, 0.005}}) {
    const auto r = find_real_eigenvalues(a, Potential::zero(), bounded(300.0));
    double worst = r.eigenvalues.size() >= 5 ? 0.0 : 1e300;
    for (std::size_t n = 1; n <= std::min<std::size_t>(5, r.eigenvalues.size()); ++n) {
      worst = std::max(worst, rel_err(r.eigenvalues[n - 1].value, n * n * kPi * kPi));
    }
    ok = ok && worst <= tol;
    detail += (detail.empty() ? "" : ", ") + ("a=" + fmt(a) + " max rel err " + fmt(worst));
  }
  return {ok, detail};
}

Verdict critical() {
  const double c = critical_alpha({}, 1e-3);
  return {c >= 0.7275 && c <= 0.7375, "critical alpha " + fmt(c) + ", window [0.7275, 0.7375]"};
}

Verdict emptiness() {
  bool ok = true;
  std::string detail;
  for (double a : {0.55, 0.6, 0.7}) {
    const auto r = find_real_eigenvalues(a, Potential::zero(), bounded(1e6));
    ok = ok && r.eigenvalues.empty();
    detail += (detail.empty() ? "" : ", ") + ("a=" + fmt(a) + ": " + std::to_string(r.eigenvalues.size()) + " zeros");
  }
  return {ok, detail};
}

// The scan runs to max(I_0.hi, hi of the last interval holding a zero);
// every interval wholly below that bound is complete.
Verdict containment() {
  bool ok = true;
  std::string detail;
  for (double a : {0.75, 0.8, 0.9, 0.95}) {
    const auto r = find_real_eigenvalues(a, Potential::zero());
    const auto by = zeros_by_interval(r);
    int top = 0;
    for (const auto& [n, z] : by) top = std::max(top, n);
    const auto iv = bracket_intervals(a, top);
    std::string why;
    if (by.count(-1)) why = "zeros outside the intervals";
    for (int n = 0; n <= top && why.empty(); ++n) {
      if (iv[n].hi > r.search_bound && n > 0) break;
      const auto it = by.find(n);
      const std::size_t count = it == by.end() ? 0 : it->second.size();
      if (count < 2) {
        why = "I_" + std::to_string(n) + " holds " + std::to_string(count) + " zeros";
        break;
      }
      const auto [lo, hi] = a_priori_bounds(a, n);
      const double first = it->second.front();
      if (!(lo < first && first < hi)) why = "first zero of I_" + std::to_string(n) + " outside its a-priori bounds";
    }
    ok = ok && why.empty();
    detail += (detail.empty() ? "" : "; ") +
              ("a=" + fmt(a) + ": " + std::to_string(r.eigenvalues.size()) + " zeros" + (why.empty() ? "" : ", " + why));
  }
  return {ok, detail};
}

Verdict estimate_quality() {
  const auto r = find_real_eigenvalues(0.95, Potential::zero());
  const auto by = zeros_by_interval(r);
  std::vector<double> err;
  for (int n = 1; n <= 4; ++n) {
    if (!by.count(n)) return {false, "I_" + std::to_string(n) + " holds no zero"};
    const double first = by.at(n).front();
    err.push_back(rel_err(asymptotic_eigenvalue(0.95, n), first));
  }
  bool ok = true;
  std::string detail = "rel errs";
  for (std::size_t i = 0; i < err.size(); ++i) {
    if (i > 0) ok = ok && err[i] <= err[i - 1];
    detail += " " + fmt(err[i]);
  }
  return {ok, detail};
}

Verdict volterra_oracles() {
  const std::size_t nodes = 4097;
  const double l = 12.0;
  double vs_classical = 0.0, vs_ode = 0.0;
  const std::vector<std::pair<Potential, std::function<double(double)>>> cases = {
      {Potential::zero(), [](double) { return 0.0; }},
      {Potential::constant(1.0), [](double) { return 1.0; }},
      {Potential::polynomial({0, 1}), [](double t) { return t; }}};
  for (const auto& [q, qf] : cases) {
    const auto f = solve(1.0, l, q, {0, 1}, nodes);
    const auto c = classical_solve(l, q, {0, 1}, nodes);
    vs_classical = std::max(vs_classical, max_abs_rel(f.y, c.y));
    const double want = oracle::shoot(l, qf, 0.0, 1.0);
    vs_ode = std::max({vs_ode, rel_err(f.y.back(), want), rel_err(c.y.back(), want)});
  }
  // Order against a 4x finer self-solution.
  double min_margin = 1e300;
  std::string orders;
  const auto q = Potential::polynomial({1, -2, 3});
  for (double a : {0.5, 0.6, 0.7, 0.75, 0.85, 1.0}) {
    const FractionalVolterra v(a);
    const auto ref = v.solve(20.0, q, {0, 1}, 4 * 512 + 1);
    const auto coarse = v.solve(20.0, q, {0, 1}, 256 + 1);
    const auto fine = v.solve(20.0, q, {0, 1}, 512 + 1);
    double e1 = 0.0, e2 = 0.0;
    for (std::size_t i = 1; i < coarse.mesh.size(); ++i) e1 = std::max(e1, std::abs(coarse.y[i] - ref.y[8 * i]));
    for (std::size_t i = 1; i < fine.mesh.size(); ++i) e2 = std::max(e2, std::abs(fine.y[i] - ref.y[4 * i]));
    const double order = std::log2(e1 / e2);
    min_margin = std::min(min_margin, order - (a >= 0.75 ? 1.5 : 1.0));
    orders += " " + fmt(order);
  }
  const bool ok = vs_classical <= 1e-6 && vs_ode <= 1e-6 && min_margin >= 0.0;
  return {ok, "vs classical " + fmt(vs_classical) + ", vs ODE " + fmt(vs_ode) + ", orders" + orders};
}

Verdict n_star_growth() {
  const int n8 = n_star(0.8), n9 = n_star(0.9), n99 = n_star(0.99);
  return {n99 > n9 && n9 > n8 && n8 >= 2,
          "N*(0.8)=" + std::to_string(n8) + " N*(0.9)=" + std::to_string(n9) + " N*(0.99)=" + std::to_string(n99)};
}

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {"Mittag-Leffler identities", 5, ml_identities},
      {"recurrence E(d,t,z) = z E(d,t+d,z) + 1/Gamma(t)", 5, recurrence},
      {"fractional integral quadrature", 10, quadrature},
      {"kernel bound and limits at u = 1e-6", 5, kernel_bound_and_limits},
      {"classical limit of the spectrum", 120, classical_limit},
      {"critical alpha", 300, critical},
      {"no real eigenvalues below the critical order", 120, emptiness},
      {"interval containment and a-priori bounds", 300, containment},
      {"asymptotic estimate quality at alpha = 0.95", 120, estimate_quality},
      {"Volterra solver oracles and mesh order", 120, volterra_oracles},
      {"growth of N*", 180, n_star_growth},
  };
  return all;
}

bool run_one(int n) {
  const auto& c = criteria()[n - 1];
  const auto start = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = c.check();
  } catch (const std::exception& e) {
    v = {false, std::string("threw ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs > c.time_limit_s) {
    v.pass = false;
    v.detail += "; over the time limit";
  }
  std::cout << "criterion " << n << ": " << (v.pass ? "PASS" : "FAIL") << "  " << c.title << "  (" << v.detail << "; "
            << std::fixed << std::setprecision(2) << secs << " s of " << std::setprecision(0) << c.time_limit_s
            << " s)" << std::defaultfloat << std::endl;
  return v.pass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  int which = 0;
  app.add_option("--criterion", which, "run only this criterion (1-11)")
      ->check(CLI::Range(1, static_cast<int>(criteria().size())));
  CLI11_PARSE(app, argc, argv);

  bool ok = true;
  if (which > 0) return run_one(which) ? 0 : 1;
  for (int n = 1; n <= static_cast<int>(criteria().size()); ++n) ok = run_one(n) && ok;
  return ok ? 0 : 1;
}
