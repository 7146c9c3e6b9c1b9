#pragma once

// Real eigenvalues of -C D^a (D^a y) + q y = l y with I^{1-a} y = 0 at both
// ends: zeros in l of the characteristic function
//
//   Delta(l) = I^{1-a} y(1),   y the solution with c1 = 0, c2 = 1,
//
// which for q = 0 is E_{2a,2}(-l). Candidate zeros are bracketed on a scan
// grid laid out along the intervals
//
//   I_n(a) = ( ((2n + 1/2 + 1/(2a)) pi / sin(pi/(2a)))^{2a},
//              ((2n + 3/2 + 1/(2a)) pi / sin(pi/(2a)))^{2a} )
//
// and the gaps between them, then refined with TOMS 748 (and Newton for
// q = 0).

#include <fracsl/errors.hpp>
#include <fracsl/fractional_ops.hpp>
#include <fracsl/potential.hpp>
#include <fracsl/special_functions.hpp>
#include <fracsl/volterra.hpp>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

namespace fracsl {

struct Interval {
  int index = 0;
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const noexcept { return x > lo && x < hi; }
  bool operator==(const Interval&) const = default;
};

/// How a zero was located.
enum class Detection {
  sign_change,  // opposite signs at neighbouring scan points
  grid_zero,    // Delta vanished exactly at a scan point
  tangent,      // local minimisation of |Delta| between same-sign points
};

struct Eigenvalue {
  double value = 0.0;
  double residual = 0.0;  // |Delta(value)|
  std::optional<Interval> bracket;
  int refinement_iters = 0;
  Detection detection = Detection::sign_change;
  /// Set for near-tangent (almost double) zeros.
  bool low_confidence = false;

  bool operator==(const Eigenvalue&) const = default;
};

struct SpectrumResult {
  double alpha = 1.0;
  std::string potential_descriptor;
  std::vector<Eigenvalue> eigenvalues;
  int n_star = 0;
  double search_bound = 0.0;
  /// True when search_bound came from the tail certificate (q = 0).
  bool certified = false;

  bool operator==(const SpectrumResult&) const = default;
};

struct SearchConfig {
  /// Upper end of the scan; 0 selects the automatic bound.
  double lambda_max = 0.0;
  int scan_points_per_interval = 64;
  double root_tol = 1e-10;
  int newton_max_iters = 5;
  std::size_t mesh_nodes = 1024;
  /// The automatic bound is never pushed past this.
  double lambda_cap = 1e12;
  /// Worker threads for the scan; 0 means hardware concurrency. Always
  /// capped by FRAC_SPECTRA_THREADS when that is set.
  unsigned threads = 0;
  MLEvalConfig ml;
};

inline void validate(const SearchConfig& c) {
  if (!(c.lambda_max >= 0.0) || !std::isfinite(c.lambda_max)) throw DomainError("lambda_max must be >= 0 (0 = auto)");
  if (c.scan_points_per_interval < 4) throw DomainError("scan_points_per_interval must be >= 4");
  if (!(c.root_tol > 0.0)) throw DomainError("root_tol must be > 0");
  if (c.newton_max_iters < 0) throw DomainError("newton_max_iters must be >= 0");
  if (c.mesh_nodes < 16) throw DomainError("mesh_nodes must be >= 16");
  if (!(c.lambda_cap > 0.0)) throw DomainError("lambda_cap must be > 0");
  validate(c.ml);
}

namespace detail {

inline void check_alpha_spectrum(double alpha) {
  if (!(alpha > 0.5 && alpha <= 1.0)) throw DomainError("alpha must lie in (0.5, 1]");
}

// ((x + 1/(2a)) pi / sin(pi/(2a)))^{2a}; x = 2n + 1/2 and 2n + 3/2 give the
// ends of I_n.
inline double bracket_point(double alpha, double x) {
  const double s = std::sin(std::numbers::pi / (2.0 * alpha));
  return std::pow((x + 0.5 / alpha) * std::numbers::pi / s, 2.0 * alpha);
}

// Inverse of bracket_point.
inline double bracket_coordinate(double alpha, double lambda) {
  const double s = std::sin(std::numbers::pi / (2.0 * alpha));
  return std::pow(lambda, 0.5 / alpha) * s / std::numbers::pi - 0.5 / alpha;
}

inline unsigned scan_threads(unsigned requested) {
  unsigned n = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
  if (const char* env = std::getenv("FRAC_SPECTRA_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return std::max(1u, n);
}

// f(x[i]) for all i; results and the first failure (lowest index) do not
// depend on the thread count.
inline std::vector<double> evaluate_all(const std::function<double(double)>& f,
                                        const std::vector<double>& x, unsigned threads) {
  std::vector<double> out(x.size());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, x.size() / 64)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = f(x[i]);
    return out;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  const std::size_t chunk = (x.size() + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      const std::size_t lo = t * chunk;
      const std::size_t hi = std::min(x.size(), lo + chunk);
      for (std::size_t i = lo; i < hi; ++i) {
        try {
          out[i] = f(x[i]);
        } catch (...) {
          errors[t] = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (unsigned t = 0; t < threads; ++t) {
    if (errors[t]) std::rethrow_exception(errors[t]);
  }
  return out;
}

inline int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace detail

/// I_n(alpha) for n = 0..n_max. alpha = 1 gives the limits
/// ((2n+1)^2 pi^2, (2n+2)^2 pi^2).
inline std::vector<Interval> bracket_intervals(double alpha, int n_max) {
  detail::check_alpha_spectrum(alpha);
  if (n_max < 0) throw DomainError("n_max must be >= 0");
  std::vector<Interval> out;
  out.reserve(static_cast<std::size_t>(n_max) + 1);
  for (int n = 0; n <= n_max; ++n) {
    if (alpha == 1.0) {
      const double pi2 = std::numbers::pi * std::numbers::pi;
      out.push_back({n, (2.0 * n + 1) * (2.0 * n + 1) * pi2, (2.0 * n + 2) * (2.0 * n + 2) * pi2});
    } else {
      out.push_back({n, detail::bracket_point(alpha, 2.0 * n + 0.5), detail::bracket_point(alpha, 2.0 * n + 1.5)});
    }
  }
  return out;
}

/// The I_n holding lambda, if any.
inline std::optional<Interval> containing_interval(double alpha, double lambda) {
  detail::check_alpha_spectrum(alpha);
  if (!(lambda > 0.0)) return std::nullopt;
  const double x = detail::bracket_coordinate(alpha, lambda);
  if (x <= 0.5) return std::nullopt;
  const int n = static_cast<int>(std::floor((x - 0.5) / 2.0));
  for (int k = std::max(0, n - 1); k <= n + 1; ++k) {
    const Interval iv = bracket_intervals(alpha, k).back();
    if (iv.contains(lambda)) return iv;
  }
  return std::nullopt;
}

/// Approximation ((2n+2) pi / sin(pi/(2a)))^{2a} of the first zero in I_n.
inline double asymptotic_eigenvalue(double alpha, int n) {
  detail::check_alpha_spectrum(alpha);
  if (n < 0) throw DomainError("n must be >= 0");
  return detail::bracket_point(alpha, 2.0 * n + 2.0 - 0.5 / alpha);
}

/// Two-sided a-priori bound on the first zero in I_n: the ends of I_n.
inline std::pair<double, double> a_priori_bounds(double alpha, int n) {
  const Interval iv = bracket_intervals(alpha, n).back();
  return {iv.lo, iv.hi};
}

/// Delta(lambda) for one (alpha, q). Cheap closed form for q = 0; otherwise
/// one Volterra solve per call. Thread-safe.
class Characteristic {
 public:
  Characteristic(double alpha, Potential q, const SearchConfig& cfg = {})
      : alpha_((detail::check_alpha_spectrum(alpha), alpha)), q_(std::move(q)), nodes_(cfg.mesh_nodes) {
    if (q_.is_zero()) {
      e_.emplace(MLParams{2.0 * alpha, 2.0}, cfg.ml, std::numeric_limits<double>::infinity());
    } else {
      volterra_.emplace(alpha, cfg.ml);
    }
  }

  double alpha() const noexcept { return alpha_; }
  const Potential& potential() const noexcept { return q_; }
  bool closed_form() const noexcept { return e_.has_value(); }
  const MittagLeffler* evaluator() const noexcept { return e_ ? &*e_ : nullptr; }

  double operator()(double lambda) const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("characteristic needs lambda > 0");
    if (e_) return (*e_)(-lambda);
    const Solution sol = volterra_->solve(lambda, q_, BoundaryData{0.0, 1.0}, nodes_);
    if (alpha_ == 1.0) return sol.y.back();
    return rl_integral_left(sol.sampled(), 1.0 - alpha_, 1.0);
  }

  /// d Delta / d lambda; closed form only.
  double derivative(double lambda) const {
    if (!e_) throw DomainError("characteristic derivative is only available for q = 0");
    return -e_->derivative(-lambda);
  }

 private:
  double alpha_;
  Potential q_;
  std::size_t nodes_;
  std::optional<MittagLeffler> e_;
  std::optional<FractionalVolterra> volterra_;
};

inline double characteristic(double alpha, double lambda, const Potential& q, const SearchConfig& cfg = {}) {
  if (!(lambda > 0.0)) throw DomainError("characteristic needs lambda > 0");
  return Characteristic(alpha, q, cfg)(lambda);
}

/// Smallest lambda beyond which E_{2a,2}(-lambda) provably stays positive,
/// given the asymptotic expansion is accurate there: the exponential pair's
/// amplitude is below half the leading algebraic term 1/(lambda
/// Gamma(2-2a)), the remaining algebraic terms below a quarter, and both
/// ratios are decreasing. Infinite for alpha = 1.
inline double certified_zero_free_bound(double alpha, const MLEvalConfig& ml_cfg = {}) {
  detail::check_alpha_spectrum(alpha);
  if (alpha == 1.0) return std::numeric_limits<double>::infinity();
  const double delta = 2.0 * alpha;
  const MittagLeffler e({delta, 2.0}, ml_cfg);
  const double c1 = gamma_recip(2.0 - delta);
  const double cosv = std::cos(std::numbers::pi / delta);
  const double w_turn = (delta - 1.0) / std::abs(cosv);
  const int n_terms = ml_cfg.asymptotic_terms + 2;
  std::vector<double> c(static_cast<std::size_t>(n_terms) + 1);
  for (int k = 2; k <= n_terms; ++k) c[static_cast<std::size_t>(k)] = std::abs(gamma_recip(2.0 - delta * k));

  double lambda = std::max({e.asymptotic_switch(), std::pow(w_turn, delta), 1.0});
  for (; lambda < 1e300; lambda *= 1.01) {
    const double w = std::pow(lambda, 1.0 / delta);
    const double log_ratio_exp =
        std::log(2.0 / delta) - std::log(w) + w * cosv + std::log(lambda) - std::log(c1);
    double ratio_alg = 0.0;
    for (int k = 2; k <= n_terms; ++k) ratio_alg += c[static_cast<std::size_t>(k)] * std::pow(lambda, 1.0 - k) / c1;
    if (log_ratio_exp <= std::log(0.5) && ratio_alg <= 0.25) return lambda;
  }
  return std::numeric_limits<double>::infinity();
}

namespace detail {

struct ScanGrid {
  std::vector<double> lambda;
  std::vector<int> segment;  // 0 = (0, I_0.lo), 2n+1 = I_n, 2n+2 = gap after I_n
};

// Points uniform in lambda^{1/(2a)} inside every segment, up to `upper`.
inline ScanGrid build_scan_grid(double alpha, double upper, int per_segment) {
  ScanGrid g;
  double seg_lo = 0.0;
  for (int s = 0;; ++s) {
    const double seg_hi = bracket_point(alpha, s + 0.5);
    const double top = std::min(seg_hi, upper);
    const double p = 0.5 / alpha;
    const double xi_lo = std::pow(seg_lo, p);
    const double xi_hi = std::pow(top, p);
    for (int i = 1; i <= per_segment; ++i) {
      const double xi = xi_lo + (xi_hi - xi_lo) * i / per_segment;
      const double l = i == per_segment ? top : std::pow(xi, 2.0 * alpha);
      if (l > 0.0 && (g.lambda.empty() || l > g.lambda.back())) {
        g.lambda.push_back(l);
        g.segment.push_back(s);
      }
    }
    if (seg_hi >= upper) break;
    seg_lo = seg_hi;
  }
  return g;
}

struct Candidate {
  double lo;
  double hi;
  Detection detection;
  bool low_confidence;
};

}  // namespace detail

/// Scan (0, bound], refine every zero of Delta and tag it with its I_n.
inline SpectrumResult find_real_eigenvalues(double alpha, const Potential& q, const SearchConfig& cfg = {}) {
  detail::check_alpha_spectrum(alpha);
  validate(cfg);
  const Characteristic delta_fn(alpha, q, cfg);

  SpectrumResult result;
  result.alpha = alpha;
  result.potential_descriptor = q.descriptor();

  double upper = cfg.lambda_max;
  if (upper == 0.0) {
    if (alpha == 1.0) throw DomainError("alpha = 1 has infinitely many real eigenvalues; set lambda_max");
    upper = certified_zero_free_bound(alpha, cfg.ml);
    if (!(upper <= cfg.lambda_cap)) {
      throw Inconclusive("zero-free tail starts beyond lambda_cap for alpha = " + std::to_string(alpha));
    }
    result.certified = q.is_zero();
    if (!q.is_zero()) {
      // Keep roughly 32 mesh nodes per oscillation of y.
      const double h_cells = static_cast<double>(cfg.mesh_nodes - 1);
      const double resolved = std::pow(std::numbers::pi * h_cells / 16.0, 2);
      if (upper > resolved) {
        throw Inconclusive("automatic bound " + std::to_string(upper) +
                           " exceeds what mesh_nodes resolves; raise mesh_nodes or set lambda_max");
      }
    }
  }

  const auto f = [&](double l) { return delta_fn(l); };
  const unsigned threads = detail::scan_threads(cfg.threads);
  auto scan = [&](double hi_bound) {
    detail::ScanGrid g = detail::build_scan_grid(alpha, hi_bound, cfg.scan_points_per_interval);
    std::vector<double> v = detail::evaluate_all(f, g.lambda, threads);
    return std::pair{std::move(g), std::move(v)};
  };
  auto [grid, values] = scan(upper);

  // Potentials other than zero have no tail certificate: keep extending
  // until two whole intervals (with their gaps) near the top are root-free.
  if (cfg.lambda_max == 0.0 && !q.is_zero()) {
    for (;;) {
      const int top_segment = grid.segment.back();
      int last_sign_change_segment = -1;
      for (std::size_t i = 1; i < values.size(); ++i) {
        if (detail::sign_of(values[i]) != detail::sign_of(values[i - 1])) last_sign_change_segment = grid.segment[i];
      }
      if (top_segment - last_sign_change_segment >= 4) break;
      const double next = detail::bracket_point(alpha, top_segment + 4.5);
      if (next > cfg.lambda_cap) throw Inconclusive("real zeros persist up to lambda_cap");
      std::tie(grid, values) = scan(next);
      upper = next;
    }
  }
  result.search_bound = grid.lambda.back();

  // Bracketing candidates in increasing order.
  std::vector<detail::Candidate> cands;
  const std::size_t n = grid.lambda.size();
  auto lam = [&](std::size_t i) { return i == 0 ? 0.0 : grid.lambda[i - 1]; };
  auto val = [&](std::size_t i) { return i == 0 ? 1.0 : values[i - 1]; };  // Delta(0+) = 1
  for (std::size_t i = 1; i <= n; ++i) {
    const double a = val(i - 1);
    const double b = val(i);
    if (b == 0.0) {
      cands.push_back({lam(i), lam(i), Detection::grid_zero, false});
      continue;
    }
    if (a == 0.0) continue;
    if (detail::sign_of(a) != detail::sign_of(b)) {
      // One extra level: several zeros may share a scan cell.
      constexpr int kSplit = 4;
      double prev_l = lam(i - 1);
      double prev_v = a;
      for (int k = 1; k <= kSplit; ++k) {
        const double l = k == kSplit ? lam(i) : lam(i - 1) + (lam(i) - lam(i - 1)) * k / kSplit;
        const double v = k == kSplit ? b : f(l);
        if (v == 0.0) {
          cands.push_back({l, l, Detection::grid_zero, false});
        } else if (prev_v != 0.0 && detail::sign_of(v) != detail::sign_of(prev_v)) {
          cands.push_back({prev_l, l, Detection::sign_change, false});
        }
        prev_l = l;
        prev_v = v;
      }
      continue;
    }
    // Local minimum of |Delta| without a sign change: look for a dip below
    // the axis (a near-tangent pair) between the neighbours.
    if (i + 1 <= n && std::abs(b) < std::abs(a) && std::abs(b) <= std::abs(val(i + 1)) &&
        detail::sign_of(val(i + 1)) == detail::sign_of(b)) {
      const double s = detail::sign_of(b);
      const auto fs = [&](double l) { return s * f(l); };
      const auto [l_min, v_min] = boost::math::tools::brent_find_minima(fs, lam(i - 1), lam(i + 1), 50);
      if (v_min < 0.0) {
        cands.push_back({lam(i - 1), l_min, Detection::tangent, true});
        cands.push_back({l_min, lam(i + 1), Detection::tangent, true});
      } else if (v_min <= cfg.root_tol) {
        cands.push_back({l_min, l_min, Detection::tangent, true});
      }
    }
  }

  // Refine.
  std::vector<Eigenvalue> roots;
  for (const auto& c : cands) {
    Eigenvalue ev;
    ev.detection = c.detection;
    ev.low_confidence = c.low_confidence;
    double root = c.lo;
    if (c.hi > c.lo) {
      std::uintmax_t iters = 200;
      const double tol = cfg.root_tol;
      auto stop = [tol](double x, double y) { return std::abs(y - x) <= tol * std::max(1.0, std::abs(x)); };
      const auto [a, b] = boost::math::tools::toms748_solve(f, c.lo, c.hi, stop, iters);
      ev.refinement_iters = static_cast<int>(iters);
      root = 0.5 * (a + b);
      double fr = f(root);
      if (delta_fn.closed_form()) {
        for (int k = 0; k < cfg.newton_max_iters && fr != 0.0; ++k) {
          const double d = delta_fn.derivative(root);
          if (d == 0.0 || !std::isfinite(d)) break;
          const double next = root - fr / d;
          if (!(next >= c.lo && next <= c.hi)) break;
          const double fn = f(next);
          if (!(std::abs(fn) < std::abs(fr))) break;
          root = next;
          fr = fn;
          ++ev.refinement_iters;
        }
      }
      ev.residual = std::abs(fr);
    } else {
      ev.residual = std::abs(f(root));
    }
    ev.value = root;
    ev.bracket = containing_interval(alpha, root);
    roots.push_back(ev);
  }
  std::sort(roots.begin(), roots.end(), [](const Eigenvalue& x, const Eigenvalue& y) { return x.value < y.value; });
  for (const auto& r : roots) {
    const double merge = 10.0 * cfg.root_tol * std::max(1.0, std::abs(r.value));
    if (!result.eigenvalues.empty() && r.value - result.eigenvalues.back().value <= merge) continue;
    result.eigenvalues.push_back(r);
  }
  result.n_star = static_cast<int>(result.eigenvalues.size());
  return result;
}

/// Number of real zeros of E_{2a,2}(-lambda). With the automatic bound the
/// count is certified by the tail bound; with an explicit lambda_max below
/// it, zeros in the top two intervals make the count Inconclusive.
inline int n_star(double alpha, const SearchConfig& cfg = {}) {
  detail::check_alpha_spectrum(alpha);
  if (alpha == 1.0) throw Inconclusive("alpha = 1 has infinitely many real zeros");
  const SpectrumResult r = find_real_eigenvalues(alpha, Potential::zero(), cfg);
  if (cfg.lambda_max > 0.0 && cfg.lambda_max < certified_zero_free_bound(alpha, cfg.ml) && !r.eigenvalues.empty()) {
    const double x_top = detail::bracket_coordinate(alpha, r.search_bound);
    const double x_last = detail::bracket_coordinate(alpha, r.eigenvalues.back().value);
    if (x_top - x_last < 4.0) {
      throw Inconclusive("real zeros are still found near lambda_max = " + std::to_string(cfg.lambda_max));
    }
  }
  return r.n_star;
}

/// Transition point of alpha -> (n_star(alpha) >= 1): a coarse grid checks
/// that the predicate switches once from false to true, then bisection
/// narrows the switch to alpha_tol.
inline double critical_alpha(const SearchConfig& cfg = {}, double alpha_tol = 1e-3,
                             const std::function<void(double, int)>& trace = {}) {
  if (!(alpha_tol >= 1e-4)) throw DomainError("alpha_tol must be >= 1e-4");
  auto count = [&](double a) {
    SearchConfig c = cfg;
    c.lambda_max = 0.0;
    const int k = n_star(a, c);
    if (trace) trace(a, k);
    return k;
  };
  std::vector<double> coarse;
  for (int i = 0; i <= 9; ++i) coarse.push_back(0.51 + 0.05 * i);  // 0.51 .. 0.96
  coarse.push_back(0.99);
  std::vector<bool> pred;
  for (double a : coarse) pred.push_back(count(a) >= 1);
  std::size_t first_true = pred.size();
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i]) {
      first_true = i;
      break;
    }
  }
  if (first_true == pred.size()) throw Inconclusive("no real zeros found on the alpha grid");
  if (first_true == 0) throw Inconclusive("real zeros already present at the smallest grid alpha");
  for (std::size_t i = first_true; i < pred.size(); ++i) {
    if (!pred[i]) throw Inconclusive("zero-existence predicate is not monotone in alpha on the grid");
  }
  double lo = coarse[first_true - 1];
  double hi = coarse[first_true];
  while (hi - lo > alpha_tol) {
    const double mid = 0.5 * (lo + hi);
    (count(mid) >= 1 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace fracsl
