#pragma once

// Left-sided Riemann-Liouville integral and Caputo / Riemann-Liouville
// derivatives of order in (0, 1] for functions sampled on [0, 1].
//
// The integral uses product integration: the interpolant of f is integrated
// exactly against (t - s)^{order-1} on every cell, so piecewise-linear data
// are handled without quadrature error and smooth f converge at O(h^2).

#include <fracsl/errors.hpp>
#include <fracsl/special_functions.hpp>

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace fracsl {

enum class Interpolation {
  linear,
  /// On the first cell f(s) = values[1] * (s / nodes[1])^power; linear
  /// elsewhere. values[0] is ignored (the function may be unbounded at 0).
  power_near_zero,
};

struct SampledFunction {
  std::vector<double> nodes;
  std::vector<double> values;
  Interpolation interp = Interpolation::linear;
  double power = 0.0;

  std::size_t size() const noexcept { return nodes.size(); }

  template <class F>
  static SampledFunction uniform(std::size_t cells, F&& f) {
    SampledFunction out;
    out.nodes.resize(cells + 1);
    out.values.resize(cells + 1);
    for (std::size_t i = 0; i <= cells; ++i) {
      out.nodes[i] = i == cells ? 1.0 : static_cast<double>(i) / static_cast<double>(cells);
      out.values[i] = f(out.nodes[i]);
    }
    return out;
  }

  double operator()(double t) const {
    if (t <= nodes.front()) return interp == Interpolation::linear ? values.front() : first_cell(t);
    if (t >= nodes.back()) return values.back();
    const auto it = std::upper_bound(nodes.begin(), nodes.end(), t);
    const std::size_t j = static_cast<std::size_t>(it - nodes.begin()) - 1;
    if (j == 0 && interp == Interpolation::power_near_zero) return first_cell(t);
    const double w = (t - nodes[j]) / (nodes[j + 1] - nodes[j]);
    return values[j] + w * (values[j + 1] - values[j]);
  }

 private:
  double first_cell(double t) const {
    if (t <= 0.0) return power > 0.0 ? 0.0 : (power == 0.0 ? values[1] : INFINITY);
    return values[1] * std::pow(t / nodes[1], power);
  }
};

inline void validate(const SampledFunction& f) {
  if (f.nodes.size() < 2 || f.nodes.size() != f.values.size()) {
    throw DomainError("sampled function needs at least two nodes and one value per node");
  }
  if (f.nodes.front() != 0.0 || f.nodes.back() != 1.0) {
    throw DomainError("sampled function nodes must start at 0 and end at 1");
  }
  for (std::size_t i = 1; i < f.nodes.size(); ++i) {
    if (!(f.nodes[i] > f.nodes[i - 1])) throw DomainError("sampled function nodes must increase strictly");
  }
  for (double v : f.values) {
    if (!std::isfinite(v)) throw DomainError("sampled function values must be finite");
  }
  if (f.interp == Interpolation::power_near_zero && !(f.power > -1.0)) {
    throw DomainError("power_near_zero interpolation needs power > -1");
  }
}

enum class QuadratureScheme { product_trapezoidal };

struct QuadratureConfig {
  QuadratureScheme scheme = QuadratureScheme::product_trapezoidal;
  /// Number of uniform cells used when the integrand is given as a callable.
  /// Sampled integrands are integrated on their own nodes.
  int refinement = 1024;
};

/// Value of a fractional derivative together with a coarse-mesh flag
/// (fewer than 16 nodes).
struct FractionalValue {
  double value = 0.0;
  bool accuracy_warning = false;
};

namespace detail {

inline constexpr std::size_t kMinAccurateNodes = 16;

// b^p - a^p for 0 <= a <= b without cancellation.
inline double pow_diff(double b, double a, double p) {
  if (a <= 0.0) return std::pow(b, p);
  return std::pow(a, p) * std::expm1(p * std::log1p((b - a) / a));
}

// integral over [a, b] (b <= t) of (fa + slope (s - a)) (t - s)^{order-1} ds
inline double linear_cell_moment(double a, double b, double fa, double slope, double t, double order) {
  const double u_hi = t - a;
  const double u_lo = t - b;
  const double m0 = pow_diff(u_hi, u_lo, order) / order;
  const double m1 = pow_diff(u_hi, u_lo, order + 1.0) / (order + 1.0);
  return (fa + slope * u_hi) * m0 - slope * m1;
}

// integral over [0, x] (x <= t) of c s^p (t - s)^{order-1} ds
inline double power_cell_moment(double x, double c, double p, double t, double order) {
  const double a = p + 1.0;
  const double scale = c * std::pow(t, p + order);
  if (x >= t) return scale * boost::math::beta(a, order);
  return scale * boost::math::beta(a, order, x / t);
}

// Unnormalised integral: Gamma(order) * I^order f (t).
inline double rl_sum(const SampledFunction& f, double order, double t) {
  double acc = 0.0;
  const auto& x = f.nodes;
  const auto& v = f.values;
  for (std::size_t j = 0; j + 1 < x.size() && x[j] < t; ++j) {
    const double b = std::min(x[j + 1], t);
    if (j == 0 && f.interp == Interpolation::power_near_zero) {
      const double c = v[1] / std::pow(x[1], f.power);
      acc += power_cell_moment(b, c, f.power, t, order);
      continue;
    }
    const double slope = (v[j + 1] - v[j]) / (x[j + 1] - x[j]);
    acc += linear_cell_moment(x[j], b, v[j], slope, t, order);
  }
  return acc;
}

// Limit of I^order f at t -> 0+.
inline double rl_limit_at_zero(const SampledFunction& f, double order) {
  if (f.interp == Interpolation::power_near_zero) {
    const double e = f.power + order;
    const double c = f.values[1] / std::pow(f.nodes[1], f.power);
    if (e == 0.0) return c * std::tgamma(f.power + 1.0);
    if (e < 0.0) return std::copysign(INFINITY, c);
  }
  return 0.0;
}

inline double rl_integral_unchecked(const SampledFunction& f, double order, double t) {
  if (order == 0.0) return f(t);
  if (t <= 0.0) return rl_limit_at_zero(f, order);
  return rl_sum(f, order, t) * gamma_recip(order);
}

inline std::vector<double> nodal_derivative(std::span<const double> x, std::span<const double> v) {
  const std::size_t n = x.size();
  std::vector<double> d(n, 0.0);
  if (n == 2) {
    d[0] = d[1] = (v[1] - v[0]) / (x[1] - x[0]);
    return d;
  }
  {
    const double h1 = x[1] - x[0];
    const double h2 = x[2] - x[1];
    d[0] = -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * v[0] + (h1 + h2) / (h1 * h2) * v[1] -
           h1 / (h2 * (h1 + h2)) * v[2];
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h1 = x[i] - x[i - 1];
    const double h2 = x[i + 1] - x[i];
    d[i] = -h2 / (h1 * (h1 + h2)) * v[i - 1] + (h2 - h1) / (h1 * h2) * v[i] +
           h1 / (h2 * (h1 + h2)) * v[i + 1];
  }
  {
    const double h1 = x[n - 2] - x[n - 3];
    const double h2 = x[n - 1] - x[n - 2];
    d[n - 1] = h2 / (h1 * (h1 + h2)) * v[n - 3] - (h1 + h2) / (h1 * h2) * v[n - 2] +
               (2.0 * h2 + h1) / (h2 * (h1 + h2)) * v[n - 1];
  }
  return d;
}

// Half the width of the cell holding t (the narrower neighbour when t is a
// node), capped at t/2.
inline double difference_step(const SampledFunction& f, double t) {
  const auto& x = f.nodes;
  const auto j = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), t) - x.begin());
  double w = j == x.size() ? x.back() - x[x.size() - 2] : x[j] - x[j - 1];
  if (j >= 2 && j < x.size() && x[j - 1] == t) w = std::min(w, x[j - 1] - x[j - 2]);
  return 0.5 * std::min(w, t);
}

inline double rl_derivative_unchecked(const SampledFunction& f, double alpha, double t) {
  const double order = 1.0 - alpha;
  const double eta = difference_step(f, t);
  auto g = [&](double s) { return rl_integral_unchecked(f, order, s); };
  if (t + eta <= 1.0) return (g(t + eta) - g(t - eta)) / (2.0 * eta);
  return (3.0 * g(t) - 4.0 * g(t - eta) + g(t - 2.0 * eta)) / (2.0 * eta);
}

inline void check_order(double alpha, bool allow_zero = false) {
  const bool ok = allow_zero ? (alpha >= 0.0 && alpha <= 1.0) : (alpha > 0.0 && alpha <= 1.0);
  if (!ok) throw DomainError("fractional order must lie in (0, 1]");
}

inline void check_time(double t) {
  if (!(t > 0.0 && t <= 1.0)) throw DomainError("evaluation point must lie in (0, 1]");
}

}  // namespace detail

/// Left Riemann-Liouville integral I^order_{0+} f (t). order = 0 is the
/// identity.
inline double rl_integral_left(const SampledFunction& f, double order, double t,
                               const QuadratureConfig& = {}) {
  validate(f);
  detail::check_order(order, true);
  detail::check_time(t);
  return detail::rl_integral_unchecked(f, order, t);
}

/// Same, for an integrand given as a callable, sampled on cfg.refinement
/// uniform cells of [0, t].
inline double rl_integral_left(const std::function<double(double)>& f, double order, double t,
                               const QuadratureConfig& cfg = {}) {
  detail::check_order(order, true);
  detail::check_time(t);
  if (cfg.refinement < 1) throw DomainError("quadrature refinement must be >= 1");
  if (order == 0.0) return f(t);
  const auto cells = static_cast<std::size_t>(cfg.refinement);
  double acc = 0.0;
  double fa = f(0.0);
  for (std::size_t j = 0; j < cells; ++j) {
    const double a = t * static_cast<double>(j) / static_cast<double>(cells);
    const double b = j + 1 == cells ? t : t * static_cast<double>(j + 1) / static_cast<double>(cells);
    const double fb = f(b);
    acc += detail::linear_cell_moment(a, b, fa, (fb - fa) / (b - a), t, order);
    fa = fb;
  }
  return acc * gamma_recip(order);
}

/// I^order f at every node; entry 0 holds the t -> 0+ limit.
inline std::vector<double> rl_integral_left_at_nodes(const SampledFunction& f, double order) {
  validate(f);
  detail::check_order(order, true);
  std::vector<double> out(f.size());
  out[0] = order == 0.0 ? f.values[0] : detail::rl_limit_at_zero(f, order);
  for (std::size_t i = 1; i < f.size(); ++i) out[i] = detail::rl_integral_unchecked(f, order, f.nodes[i]);
  return out;
}

/// Left Caputo derivative: I^{1-alpha} applied to the nodal derivative of f
/// (three-point stencils, one-sided at the ends).
inline FractionalValue caputo_left(const SampledFunction& f, double alpha, double t,
                                   const QuadratureConfig& = {}) {
  validate(f);
  detail::check_order(alpha);
  detail::check_time(t);
  if (f.interp != Interpolation::linear) {
    throw DomainError("Caputo derivative needs a function that is differentiable at 0");
  }
  SampledFunction d{f.nodes, detail::nodal_derivative(f.nodes, f.values)};
  return {detail::rl_integral_unchecked(d, 1.0 - alpha, t), f.size() < detail::kMinAccurateNodes};
}

inline std::vector<double> caputo_left_at_nodes(const SampledFunction& f, double alpha) {
  validate(f);
  detail::check_order(alpha);
  if (f.interp != Interpolation::linear) {
    throw DomainError("Caputo derivative needs a function that is differentiable at 0");
  }
  SampledFunction d{f.nodes, detail::nodal_derivative(f.nodes, f.values)};
  std::vector<double> out(f.size());
  out[0] = alpha == 1.0 ? d.values[0] : 0.0;
  for (std::size_t i = 1; i < f.size(); ++i) out[i] = detail::rl_integral_unchecked(d, 1.0 - alpha, f.nodes[i]);
  return out;
}

/// Left Riemann-Liouville derivative d/dt I^{1-alpha} f, by central
/// differences of the product-integrated I^{1-alpha} f at t +- eta with
/// eta half the local cell width (backward differences at t = 1).
inline FractionalValue rl_derivative_left(const SampledFunction& f, double alpha, double t,
                                          const QuadratureConfig& = {}) {
  validate(f);
  detail::check_order(alpha);
  detail::check_time(t);
  return {detail::rl_derivative_unchecked(f, alpha, t), f.size() < detail::kMinAccurateNodes};
}

/// RL derivative at every node. Entry 0 is a quadratic extrapolation from
/// nodes 1..3 assuming even spacing there (the derivative is generally
/// singular at 0).
inline std::vector<double> rl_derivative_left_at_nodes(const SampledFunction& f, double alpha) {
  validate(f);
  detail::check_order(alpha);
  std::vector<double> out(f.size());
  for (std::size_t i = 1; i < f.size(); ++i) out[i] = detail::rl_derivative_unchecked(f, alpha, f.nodes[i]);
  if (f.size() >= 4) {
    out[0] = 3.0 * out[1] - 3.0 * out[2] + out[3];
  } else {
    out[0] = out[1];
  }
  return out;
}

}  // namespace fracsl
