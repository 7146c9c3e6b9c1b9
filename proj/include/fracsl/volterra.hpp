#pragma once

// Volterra form of the fractional Sturm-Liouville initial value problem
//
//   y(t) = c1 t^{a-1} E_{2a,a}(-l t^{2a}) + c2 t^a E_{2a,a+1}(-l t^{2a})
//          + int_0^t K(t-s) q(s) y(s) ds,
//   K(u) = u^{2a-1} E_{2a,2a}(-l u^{2a}),
//
// solved on a uniform mesh by product integration: q*y is interpolated
// linearly and integrated exactly against K through the moments
//
//   M0(x) = int_0^x K       = x^{2a}   E_{2a,2a+1}(-l x^{2a}),
//   P(x)  = int_0^x (x-u) K = x^{2a+1} E_{2a,2a+2}(-l x^{2a}).
//
// The newest node enters implicitly, so every step solves one scalar linear
// equation.

#include <fracsl/errors.hpp>
#include <fracsl/fractional_ops.hpp>
#include <fracsl/potential.hpp>
#include <fracsl/special_functions.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace fracsl {

/// c1 = I^{1-a} y(0+), c2 = D^a y(0+). At a = 1 these are y(0) and y'(0).
struct BoundaryData {
  double c1 = 0.0;
  double c2 = 1.0;
};

/// Mesh values of y. When c1 != 0 and alpha < 1, y is unbounded at 0 and
/// y[0] holds the regularised value 0; the singular mode is c1 * t^{a-1}
/// E_{2a,a}(-l t^{2a}).
struct Solution {
  double alpha = 1.0;
  double lambda = 0.0;
  BoundaryData boundary;
  std::vector<double> mesh;
  std::vector<double> y;

  bool singular_at_zero() const noexcept { return boundary.c1 != 0.0 && alpha < 1.0; }

  /// y as a sampled function; the singular case uses a power law on the
  /// first cell.
  SampledFunction sampled() const {
    SampledFunction f{mesh, y};
    if (singular_at_zero()) {
      f.interp = Interpolation::power_near_zero;
      f.power = alpha - 1.0;
    }
    return f;
  }
};

namespace detail {

inline void check_alpha_volterra(double alpha) {
  if (!(alpha >= 0.5 && alpha <= 1.0)) throw DomainError("alpha must lie in [0.5, 1]");
}

inline std::vector<double> uniform_mesh(std::size_t n_nodes) {
  std::vector<double> t(n_nodes);
  const double cells = static_cast<double>(n_nodes - 1);
  for (std::size_t i = 0; i < n_nodes; ++i) t[i] = i + 1 == n_nodes ? 1.0 : static_cast<double>(i) / cells;
  return t;
}

// Forward stepping of y_n = F_n + sum_j [Wa(n-j) g_j + Wb(n-j) g_{j+1}],
// g = q*y, given the moments M0, P on the mesh (index m <-> x = m h).
inline std::vector<double> step_product_trapezoid(const std::vector<double>& m0,
                                                  const std::vector<double>& p,
                                                  const std::vector<double>& forcing,
                                                  const std::vector<double>& qv, double h,
                                                  double y0) {
  const std::size_t n_nodes = forcing.size();
  // wb[m]: weight of the right end of a cell whose far end sits m steps back;
  // wa[m]: weight of its left end.
  std::vector<double> wa(n_nodes, 0.0);
  std::vector<double> wb(n_nodes, 0.0);
  for (std::size_t m = 1; m < n_nodes; ++m) {
    const double b = (p[m] - p[m - 1] - h * m0[m - 1]) / h;
    wb[m] = b;
    wa[m] = (m0[m] - m0[m - 1]) - b;
  }
  // Combined weight of an interior node i seen from node n: W[n - i].
  std::vector<double> w(n_nodes, 0.0);
  for (std::size_t m = 1; m + 1 < n_nodes; ++m) w[m] = wa[m] + wb[m + 1];

  std::vector<double> y(n_nodes, 0.0);
  std::vector<double> g(n_nodes, 0.0);
  y[0] = y0;
  g[0] = qv[0] * y0;
  for (std::size_t n = 1; n < n_nodes; ++n) {
    double acc = forcing[n] + wa[n] * g[0];
    for (std::size_t i = 1; i < n; ++i) acc += w[n - i] * g[i];
    const double denom = 1.0 - wb[1] * qv[n];
    if (denom == 0.0 || !std::isfinite(acc)) {
      throw NonFiniteSolution("Volterra step " + std::to_string(n) + " is singular or overflowed");
    }
    y[n] = acc / denom;
    if (!std::isfinite(y[n])) {
      throw NonFiniteSolution("Volterra solution overflowed at step " + std::to_string(n));
    }
    g[n] = qv[n] * y[n];
  }
  return y;
}

inline std::vector<double> potential_at(const Potential& q, const std::vector<double>& t) {
  std::vector<double> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = q(t[i]);
  return out;
}

// (k x - sin k x) / k^3 and (1 - cos k x) / k^2 without cancellation.
inline double sine_kernel_p(double k, double x) {
  const double s = k * x;
  if (s < 0.5) {
    // s^3/3! - s^5/5! + ...
    double term = s * s * s / 6.0;
    double acc = 0.0;
    for (int j = 0; j < 12; ++j) {
      acc += term;
      term *= -s * s / ((2.0 * j + 4.0) * (2.0 * j + 5.0));
    }
    return acc / (k * k * k);
  }
  return (s - std::sin(s)) / (k * k * k);
}

inline double sine_kernel_m0(double k, double x) {
  const double half = std::sin(0.5 * k * x);
  return 2.0 * half * half / (k * k);
}

}  // namespace detail

/// Mittag-Leffler evaluators for one alpha, reused across lambda values.
/// Immutable; one instance may be shared by concurrent solves.
class FractionalVolterra {
 public:
  explicit FractionalVolterra(double alpha, const MLEvalConfig& cfg = {})
      : alpha_((detail::check_alpha_volterra(alpha), alpha)),
        kern_({2 * alpha, 2 * alpha}, cfg, kInf),
        m0_({2 * alpha, 2 * alpha + 1}, cfg, kInf),
        p_({2 * alpha, 2 * alpha + 2}, cfg, kInf),
        phi1_({2 * alpha, alpha}, cfg, kInf),
        phi2_({2 * alpha, alpha + 1}, cfg, kInf) {}

  double alpha() const noexcept { return alpha_; }

  double kernel(double lambda, double u) const {
    if (!(u >= 0.0)) throw DomainError("kernel argument u = t - s must be >= 0");
    if (u == 0.0) return alpha_ == 0.5 ? 1.0 : 0.0;
    const double ua = std::pow(u, 2 * alpha_);
    return std::pow(u, 2 * alpha_ - 1) * kern_(-lambda * ua);
  }

  double free_solution(double lambda, const BoundaryData& b, double t) const {
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("t must lie in [0, 1]");
    double out = 0.0;
    if (b.c1 != 0.0) {
      if (t == 0.0 && alpha_ < 1.0) throw DomainError("the c1 mode is unbounded at t = 0");
      out += b.c1 * phi1(lambda, t);
    }
    if (b.c2 != 0.0 && t > 0.0) out += b.c2 * phi2(lambda, t);
    return out;
  }

  Solution solve(double lambda, const Potential& q, const BoundaryData& b, std::size_t n_nodes) const {
    if (n_nodes < 16) throw DomainError("solve needs at least 16 mesh nodes");
    if (!std::isfinite(lambda)) throw DomainError("lambda must be finite");
    const std::vector<double> t = detail::uniform_mesh(n_nodes);
    const double h = 1.0 / static_cast<double>(n_nodes - 1);
    const bool singular = b.c1 != 0.0 && alpha_ < 1.0;

    std::vector<double> m0(n_nodes, 0.0), p(n_nodes, 0.0), forcing(n_nodes, 0.0);
    for (std::size_t m = 1; m < n_nodes; ++m) {
      const double x = t[m];
      const double z = -lambda * std::pow(x, 2 * alpha_);
      if (!q.is_zero()) {
        m0[m] = std::pow(x, 2 * alpha_) * m0_(z);
        p[m] = std::pow(x, 2 * alpha_ + 1) * p_(z);
      }
      forcing[m] = b.c2 * std::pow(x, alpha_) * phi2_(z);
      if (b.c1 != 0.0) forcing[m] += singular ? 0.0 : b.c1 * phi1_(z);
    }
    const std::vector<double> qv = detail::potential_at(q, t);
    double y0 = singular ? 0.0 : b.c1;

    if (singular && !q.is_zero()) {
      for (std::size_t m = 1; m < n_nodes; ++m) forcing[m] += singular_forcing(lambda, q, b.c1, t[m]);
    }
    std::vector<double> y;
    if (q.is_zero()) {
      y = forcing;
      y[0] = y0;
    } else {
      y = detail::step_product_trapezoid(m0, p, forcing, qv, h, y0);
    }
    if (singular) {
      for (std::size_t m = 1; m < n_nodes; ++m) {
        y[m] += b.c1 * phi1(lambda, t[m]);
        if (!std::isfinite(y[m])) throw NonFiniteSolution("Volterra solution overflowed");
      }
      y[0] = 0.0;
    }
    return Solution{alpha_, lambda, b, t, std::move(y)};
  }

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  double phi1(double lambda, double t) const {
    return std::pow(t, alpha_ - 1) * phi1_(-lambda * std::pow(t, 2 * alpha_));
  }
  double phi2(double lambda, double t) const {
    return std::pow(t, alpha_) * phi2_(-lambda * std::pow(t, 2 * alpha_));
  }

  // c1 int_0^t K(t-s) q(s) s^{a-1} E_{2a,a}(-l s^{2a}) ds with s = sigma^{1/a},
  // which absorbs the s^{a-1} singularity.
  double singular_forcing(double lambda, const Potential& q, double c1, double t) const {
    auto f = [&](double sigma) {
      const double s = std::min(std::pow(sigma, 1.0 / alpha_), t);
      return kernel(lambda, t - s) * q(s) * phi1_(-lambda * sigma * sigma);
    };
    const double top = std::pow(t, alpha_);
    const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, top, 12, 1e-12);
    return c1 * v / alpha_;
  }

  double alpha_;
  MittagLeffler kern_, m0_, p_, phi1_, phi2_;
};

/// K(u) = u^{2a-1} E_{2a,2a}(-l u^{2a}); K(0) is the limit (1 at a = 1/2,
/// 0 above).
inline double kernel(double alpha, double lambda, double u) {
  detail::check_alpha_volterra(alpha);
  if (!(u >= 0.0)) throw DomainError("kernel argument u = t - s must be >= 0");
  if (u == 0.0) return alpha == 0.5 ? 1.0 : 0.0;
  const MLParams p{2 * alpha, 2 * alpha};
  return std::pow(u, 2 * alpha - 1) * ml(p, -lambda * std::pow(u, 2 * alpha));
}

/// Solution of the q = 0 problem.
inline double free_solution(double alpha, double lambda, const BoundaryData& b, double t) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in (0, 1]");
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("t must lie in [0, 1]");
  const double z = -lambda * std::pow(t, 2 * alpha);
  double out = 0.0;
  if (b.c1 != 0.0) {
    if (t == 0.0 && alpha < 1.0) throw DomainError("the c1 mode is unbounded at t = 0");
    out += b.c1 * std::pow(t, alpha - 1) * ml({2 * alpha, alpha}, z);
  }
  if (b.c2 != 0.0 && t > 0.0) out += b.c2 * std::pow(t, alpha) * ml({2 * alpha, alpha + 1}, z);
  return out;
}

inline Solution solve(double alpha, double lambda, const Potential& q, const BoundaryData& b,
                      std::size_t n_nodes) {
  return FractionalVolterra(alpha).solve(lambda, q, b, n_nodes);
}

/// Classical problem -y'' + q y = l y, y(0) = b.c1, y'(0) = b.c2, as the
/// Volterra equation with kernel sin(k u)/k, k = sqrt(l).
inline Solution classical_solve(double lambda, const Potential& q, const BoundaryData& b,
                                std::size_t n_nodes) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("classical_solve needs lambda > 0");
  if (n_nodes < 16) throw DomainError("solve needs at least 16 mesh nodes");
  const double k = std::sqrt(lambda);
  const std::vector<double> t = detail::uniform_mesh(n_nodes);
  const double h = 1.0 / static_cast<double>(n_nodes - 1);
  std::vector<double> m0(n_nodes), p(n_nodes), forcing(n_nodes);
  for (std::size_t m = 0; m < n_nodes; ++m) {
    m0[m] = detail::sine_kernel_m0(k, t[m]);
    p[m] = detail::sine_kernel_p(k, t[m]);
    forcing[m] = b.c1 * std::cos(k * t[m]) + b.c2 * std::sin(k * t[m]) / k;
  }
  std::vector<double> y = q.is_zero()
                              ? forcing
                              : detail::step_product_trapezoid(m0, p, forcing, detail::potential_at(q, t), h, b.c1);
  return Solution{1.0, lambda, b, t, std::move(y)};
}

/// sup over interior nodes t_i >= t_min of |-C D^a(D^a y) + q y - l y|, both
/// derivatives taken numerically with fractional_ops. The leading terms
/// c1 t^{a-1}/Gamma(a) + c2 t^a/Gamma(a+1) are differentiated in closed form
/// (D^a maps them to c2); piecewise-linear data cannot follow them near 0.
inline double residual(const Solution& sol, const Potential& q, double t_min = 0.0) {
  const std::size_t n = sol.mesh.size();
  if (n < 8) throw DomainError("residual needs at least eight mesh nodes");
  if (!(t_min >= 0.0 && t_min < 1.0)) throw DomainError("residual window start must lie in [0, 1)");
  const double a = sol.alpha;
  const BoundaryData& b = sol.boundary;
  SampledFunction r{sol.mesh, sol.y};
  for (std::size_t i = 1; i < n; ++i) {
    const double t = sol.mesh[i];
    r.values[i] -= b.c2 * std::pow(t, a) * gamma_recip(a + 1.0) + b.c1 * std::pow(t, a - 1.0) * gamma_recip(a);
  }
  r.values[0] = 0.0;
  // Entry 0 comes extrapolated from nodes 1..3 (the exact limit is 0); an
  // exact value there would break the smooth error pattern the stencils
  // rely on. The one-sided quotient at t = 1 is only first order, so that
  // end is extrapolated too.
  SampledFunction v{sol.mesh, rl_derivative_left_at_nodes(r, a)};
  v.values[n - 1] = 3.0 * v.values[n - 2] - 3.0 * v.values[n - 3] + v.values[n - 4];
  const std::vector<double> w = caputo_left_at_nodes(v, a);
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (sol.mesh[i] < t_min) continue;
    const double res = -w[i] + (q(sol.mesh[i]) - sol.lambda) * sol.y[i];
    worst = std::max(worst, std::abs(res));
  }
  return worst;
}

}  // namespace fracsl
