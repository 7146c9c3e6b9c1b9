#pragma once

// Real-argument generalized Mittag-Leffler function
//
//     E_{delta,theta}(z) = sum_{k>=0} z^k / Gamma(delta*k + theta),
//
// its z-derivative, and the reciprocal Gamma function. Three regimes are
// blended by `MittagLeffler`:
//
//   * |z| <= series_radius: the power series in double precision;
//   * negative z in the band between the two radii (or wherever the
//     asymptotic expansion is not yet accurate to rel_tol): the same series
//     summed in MPFR at a precision sized to the cancellation;
//   * z <= -asymptotic_radius, 0 < delta <= 2: the algebraic expansion
//     -sum_{k=1}^{N} z^{-k}/Gamma(theta - delta*k) plus the pair of
//     exponentially small terms (1/delta) Z^{1-theta} exp(Z),
//     Z = |z|^{1/delta} exp(+-i pi/delta).
//
// Large positive arguments are refused with OverflowError.

#include <fracsl/detail/mpfr.hpp>
#include <fracsl/errors.hpp>

#include <boost/math/special_functions/sin_pi.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

namespace fracsl {

/// Parameters (delta, theta) of E_{delta,theta}. delta > 0; theta is any real.
struct MLParams {
  double delta = 1.0;
  double theta = 1.0;
};

struct MLEvalConfig {
  double series_radius = 5.0;       // r0
  double asymptotic_radius = 50.0;  // r1
  int asymptotic_terms = 10;        // N
  double rel_tol = 1e-14;
  int max_series_terms = 100000;
  int working_precision_digits = 50;
};

inline void validate(const MLParams& p) {
  if (!(p.delta > 0.0) || !std::isfinite(p.delta) || !std::isfinite(p.theta)) {
    throw DomainError("Mittag-Leffler parameters require finite delta > 0 and finite theta");
  }
}

inline void validate(const MLEvalConfig& c) {
  if (!(c.series_radius > 0.0) || !(c.series_radius <= c.asymptotic_radius)) {
    throw DomainError("MLEvalConfig requires 0 < series_radius <= asymptotic_radius");
  }
  if (c.asymptotic_terms < 1 || !(c.rel_tol > 0.0) || c.max_series_terms < 1 ||
      c.working_precision_digits < 1) {
    throw DomainError("MLEvalConfig requires N >= 1, rel_tol > 0 and positive term/digit budgets");
  }
}

/// 1/Gamma(x). Exactly 0 at the poles x = 0, -1, -2, ...
inline double gamma_recip(double x) {
  if (std::isnan(x)) return x;
  if (x <= 0.0 && x == std::floor(x)) return 0.0;
  if (x > 0.0) {
    if (x < 170.0) return 1.0 / std::tgamma(x);
    return std::exp(-std::lgamma(x));
  }
  // Reflection keeps full relative accuracy next to the poles.
  const double s = boost::math::sin_pi(x);
  const double y = 1.0 - x;
  if (y < 170.0) return s * std::tgamma(y) / std::numbers::pi;
  const double mag = std::exp(std::lgamma(y) + std::log(std::abs(s)) - std::log(std::numbers::pi));
  return std::copysign(mag, s);
}

namespace detail {

// log|1/Gamma(x)|, -inf at poles.
inline double log_abs_gamma_recip(double x) {
  if (x <= 0.0 && x == std::floor(x)) return -std::numeric_limits<double>::infinity();
  if (x > 0.0) return -std::lgamma(x);
  return std::log(std::abs(gamma_recip(x)));
}

// Index of the largest series term for |z| = r (terms grow while
// r < (delta*k + theta)^delta, roughly).
inline long series_peak_index(const MLParams& p, double r) {
  if (r <= 1.0) return 0;
  const double k = (std::pow(r, 1.0 / p.delta) - p.theta) / p.delta;
  return k > 0.0 ? static_cast<long>(std::ceil(k)) : 0;
}

// log-magnitude of the largest term of sum |z|^k/|Gamma(delta k + theta)|.
inline double series_log_max_term(const MLParams& p, double r) {
  const long peak = series_peak_index(p, r);
  double best = -std::numeric_limits<double>::infinity();
  const double lr = r > 0.0 ? std::log(r) : -std::numeric_limits<double>::infinity();
  for (long k = std::max<long>(0, peak - 3); k <= peak + 3; ++k) {
    const double lk = (k == 0 ? 0.0 : k * lr) + log_abs_gamma_recip(p.delta * k + p.theta);
    best = std::max(best, lk);
  }
  return best;
}

// Number of terms after which |term| < exp(log_cut) for all later k.
inline long series_terms_needed(const MLParams& p, double r, double log_cut, long max_terms) {
  const long peak = series_peak_index(p, r);
  const double lr = r > 0.0 ? std::log(r) : -std::numeric_limits<double>::infinity();
  for (long k = peak + 1; k < max_terms; ++k) {
    const double lk = k * lr + log_abs_gamma_recip(p.delta * k + p.theta);
    const double lk1 = (k + 1) * lr + log_abs_gamma_recip(p.delta * (k + 1) + p.theta);
    if (lk < log_cut && lk1 < log_cut) return k + 2;
  }
  throw NonConvergence("Mittag-Leffler series needs more than max_series_terms terms");
}

// Coefficients 1/Gamma(delta k + theta), k = 0..K-1, in MPFR.
class HighPrecisionSeries {
 public:
  HighPrecisionSeries(const MLParams& p, double max_abs_z, int digits, long max_terms)
      : params_(p), bits_(digits_to_bits(digits)), digits_(digits), max_abs_z_(max_abs_z) {
    const double log_cut = series_log_max_term(p, max_abs_z) - (digits + 4) * std::log(10.0);
    const long terms = series_terms_needed(p, std::max(max_abs_z, 1.0), log_cut, max_terms);
    coeffs_.reserve(static_cast<std::size_t>(terms));
    log_abs_coeffs_.reserve(static_cast<std::size_t>(terms));
    for (long k = 0; k < terms; ++k) {
      BigFloat c(bits_);
      reciprocal_gamma_at(c, p.delta, k, p.theta);
      coeffs_.push_back(std::move(c));
      log_abs_coeffs_.push_back(log_abs_gamma_recip(p.delta * k + p.theta));
    }
  }

  double max_abs_z() const noexcept { return max_abs_z_; }
  int digits() const noexcept { return digits_; }

  double value(double z) const { return evaluate(z, false); }
  double derivative(double z) const { return evaluate(z, true); }

 private:
  std::size_t terms_for(double z) const {
    const double r = std::abs(z);
    if (r == 0.0) return 2;
    const double lr = std::log(r);
    double log_max = -std::numeric_limits<double>::infinity();
    const long peak = series_peak_index(params_, r);
    for (long k = std::max<long>(0, peak - 3);
         k <= peak + 3 && k < static_cast<long>(log_abs_coeffs_.size()); ++k) {
      log_max = std::max(log_max, k * lr + log_abs_coeffs_[static_cast<std::size_t>(k)]);
    }
    const double log_cut = log_max - (digits_ + 4) * std::log(10.0);
    for (std::size_t k = static_cast<std::size_t>(peak) + 1; k + 1 < log_abs_coeffs_.size(); ++k) {
      if (k * lr + log_abs_coeffs_[k] < log_cut && (k + 1) * lr + log_abs_coeffs_[k + 1] < log_cut) {
        return k + 2;
      }
    }
    return log_abs_coeffs_.size();
  }

  double evaluate(double z, bool derivative) const {
    const std::size_t terms = terms_for(z);
    BigFloat zz(bits_, z);
    BigFloat acc(bits_);
    BigFloat c(bits_);
    const std::size_t first = derivative ? 1 : 0;
    for (std::size_t k = terms; k-- > first;) {
      mpfr_mul(acc.get(), acc.get(), zz.get(), MPFR_RNDN);
      if (derivative) {
        mpfr_mul_ui(c.get(), coeffs_[k].get(), static_cast<unsigned long>(k), MPFR_RNDN);
        mpfr_add(acc.get(), acc.get(), c.get(), MPFR_RNDN);
      } else {
        mpfr_add(acc.get(), acc.get(), coeffs_[k].get(), MPFR_RNDN);
      }
    }
    return acc.to_double();
  }

  MLParams params_;
  mpfr_prec_t bits_;
  int digits_;
  double max_abs_z_;
  std::vector<BigFloat> coeffs_;
  std::vector<double> log_abs_coeffs_;
};

// Digits needed so that `working` significant digits survive the
// cancellation of the alternating series at |z| = r.
inline int extended_digits_for(const MLParams& p, double r, int working) {
  const double lost = std::max(0.0, series_log_max_term(p, r) / std::log(10.0));
  return working + static_cast<int>(std::ceil(lost));
}

// Exponentially small contribution for real z < 0 (delta in [1, 2]):
// the conjugate pair (1/delta) Z^{1-theta} e^Z, Z = w e^{+-i pi/delta},
// w = |z|^{1/delta}; a single real term on the Stokes line delta = 1.
struct ExponentialPart {
  double value = 0.0;
  double derivative = 0.0;
  double amplitude = 0.0;
};

inline ExponentialPart exponential_part_negative(const MLParams& p, double z) {
  ExponentialPart out;
  if (p.delta < 1.0 || p.delta > 2.0) return out;
  const double w = std::pow(-z, 1.0 / p.delta);
  const double phi = std::numbers::pi / p.delta;
  const std::complex<double> zc(z, 0.0);
  const std::complex<double> big_z = std::polar(w, phi);
  const std::complex<double> term =
      std::exp(big_z + (1.0 - p.theta) * std::log(big_z)) / p.delta;
  // dZ/dz = Z/(delta z)
  const std::complex<double> dterm = term * (big_z + (1.0 - p.theta)) / (p.delta * zc);
  const double factor = p.delta == 1.0 ? 1.0 : 2.0;
  out.value = factor * term.real();
  out.derivative = factor * dterm.real();
  out.amplitude = factor * std::abs(term);
  return out;
}

}  // namespace detail

/// Truncated power series in double precision.
inline double ml_series(const MLParams& p, double z, const MLEvalConfig& cfg = {}) {
  validate(p);
  if (z == 0.0) return gamma_recip(p.theta);
  const double r = std::abs(z);
  const long peak = detail::series_peak_index(p, r);
  const double log_r = std::log(r);
  double sum = 0.0;
  double max_term = 0.0;
  double power = 1.0;  // z^k while it stays finite
  int small_in_a_row = 0;
  for (long k = 0; k < cfg.max_series_terms; ++k) {
    const double arg = p.delta * k + p.theta;
    double term;
    if (std::isfinite(power) && std::abs(power) > 1e-280 && arg < 170.0) {
      term = power * gamma_recip(arg);
    } else {
      const double sign = (z < 0.0 && (k % 2 == 1)) ? -1.0 : 1.0;
      const double lg = detail::log_abs_gamma_recip(arg);
      term = arg > 0.0 ? sign * std::exp(k * log_r + lg) : power * gamma_recip(arg);
    }
    sum += term;
    max_term = std::max(max_term, std::abs(term));
    const double floor = std::max(std::abs(sum), std::numeric_limits<double>::epsilon() * max_term);
    if (k > peak && std::abs(term) <= cfg.rel_tol * floor) {
      if (++small_in_a_row >= 2) return sum;
    } else {
      small_in_a_row = 0;
    }
    power *= z;
  }
  if (r <= cfg.series_radius) {
    throw NonConvergence("Mittag-Leffler series did not converge within max_series_terms");
  }
  return sum;
}

/// Algebraic asymptotic expansion for z -> -infinity (0 < delta < 2):
/// -sum_{k=1}^{N} z^{-k}/Gamma(theta - delta k).
inline double ml_asymptotic_negative(const MLParams& p, double z, const MLEvalConfig& cfg = {}) {
  validate(p);
  if (!(z < 0.0)) throw DomainError("asymptotic expansion needs z < 0");
  if (!(p.delta > 0.0 && p.delta < 2.0)) throw DomainError("asymptotic expansion needs 0 < delta < 2");
  double sum = 0.0;
  double inv = 1.0;
  for (int k = 1; k <= cfg.asymptotic_terms; ++k) {
    inv /= z;
    sum -= gamma_recip(p.theta - p.delta * k) * inv;
  }
  return sum;
}

/// Evaluator for one (delta, theta). Immutable after construction and safe
/// to share between threads. `max_abs_z` sizes the cached high-precision
/// coefficient table; arguments beyond it are still evaluated, just slower.
class MittagLeffler {
 public:
  enum class Regime { origin, series, extended, asymptotic, positive };

  explicit MittagLeffler(MLParams p, MLEvalConfig cfg = {}, double max_abs_z = 0.0)
      : p_(p), cfg_(cfg) {
    validate(p_);
    validate(cfg_);
    init_series_table();
    init_asymptotic();
    const double band_top = std::min(std::abs(max_abs_z), switch_abs_z_);
    if (band_top > double_series_limit_) {
      const int digits = detail::extended_digits_for(p_, band_top, cfg_.working_precision_digits);
      table_ = std::make_shared<const detail::HighPrecisionSeries>(p_, band_top, digits,
                                                                   cfg_.max_series_terms);
    }
  }

  const MLParams& params() const noexcept { return p_; }
  const MLEvalConfig& config() const noexcept { return cfg_; }

  /// Smallest |z| from which negative arguments use the asymptotic branch
  /// (infinity when delta > 2).
  double asymptotic_switch() const noexcept { return switch_abs_z_; }

  Regime regime(double z) const noexcept {
    if (z == 0.0) return Regime::origin;
    if (z > 0.0) return z <= cfg_.series_radius ? Regime::series : Regime::positive;
    const double r = -z;
    if (r <= double_series_limit_) return Regime::series;
    if (r >= switch_abs_z_) return Regime::asymptotic;
    return Regime::extended;
  }

  double operator()(double z) const { return evaluate(z, false); }
  double value(double z) const { return evaluate(z, false); }
  double derivative(double z) const { return evaluate(z, true); }

  /// The asymptotic branch (algebraic terms plus the exponential pair) at
  /// z < 0, whatever regime z falls in.
  double asymptotic_branch(double z) const {
    if (!(z < 0.0)) throw DomainError("asymptotic branch needs z < 0");
    if (p_.delta > 2.0) throw DomainError("asymptotic branch needs delta <= 2");
    return asymptotic(z, false);
  }

  /// Estimated truncation error of the asymptotic branch at z < 0 relative
  /// to the size of the expansion; the branch is used where this is below
  /// rel_tol.
  double asymptotic_relative_error(double z) const {
    const double r = -z;
    double scale = detail::exponential_part_negative(p_, z).amplitude;
    double inv = 1.0;
    for (int k = 1; k <= cfg_.asymptotic_terms; ++k) {
      inv /= r;
      scale = std::max(scale, std::abs(asym_coeffs_[static_cast<std::size_t>(k)]) * inv);
    }
    const int n = cfg_.asymptotic_terms;
    const double e1 = std::abs(asym_coeffs_[static_cast<std::size_t>(n + 1)]) * std::pow(r, -(n + 1));
    const double e2 = std::abs(asym_coeffs_[static_cast<std::size_t>(n + 2)]) * std::pow(r, -(n + 2));
    const double err = e1 + e2;
    if (err == 0.0) return 0.0;
    if (scale == 0.0) return std::numeric_limits<double>::infinity();
    return err / scale;
  }

 private:
  void init_series_table() {
    // The double-precision series is used while the alternating cancellation
    // stays below ~e^6 (only bites for delta < ~0.9 inside r0).
    double limit = cfg_.series_radius;
    limit = std::min(limit, std::pow(6.0, p_.delta));
    double_series_limit_ = limit;
    const double r = std::max(cfg_.series_radius, 1.0);
    const double log_cut = detail::series_log_max_term(p_, r) +
                           std::log(std::min(cfg_.rel_tol, 1e-17));
    const long terms = detail::series_terms_needed(p_, r, log_cut, cfg_.max_series_terms);
    series_coeffs_.resize(static_cast<std::size_t>(terms));
    for (long k = 0; k < terms; ++k) {
      series_coeffs_[static_cast<std::size_t>(k)] = gamma_recip(p_.delta * k + p_.theta);
    }
  }

  void init_asymptotic() {
    const int n = cfg_.asymptotic_terms;
    asym_coeffs_.assign(static_cast<std::size_t>(n + 3), 0.0);
    for (int k = 1; k <= n + 2; ++k) {
      asym_coeffs_[static_cast<std::size_t>(k)] = gamma_recip(p_.theta - p_.delta * k);
    }
    switch_abs_z_ = std::numeric_limits<double>::infinity();
    if (p_.delta > 2.0) return;
    // Acceptance is monotone once past the optimal-truncation point; walk a
    // geometric grid from r1 and take the first accepted radius.
    for (double r = cfg_.asymptotic_radius; r < 1e300; r *= 1.02) {
      if (asymptotic_relative_error(-r) <= cfg_.rel_tol) {
        switch_abs_z_ = r;
        return;
      }
    }
  }

  double horner_double(double z, bool derivative) const {
    double acc = 0.0;
    const std::size_t first = derivative ? 1 : 0;
    for (std::size_t k = series_coeffs_.size(); k-- > first;) {
      acc = acc * z + (derivative ? static_cast<double>(k) * series_coeffs_[k] : series_coeffs_[k]);
    }
    return acc;
  }

  double asymptotic(double z, bool derivative) const {
    double sum = 0.0;
    double inv = 1.0;
    for (int k = 1; k <= cfg_.asymptotic_terms; ++k) {
      inv /= z;
      const double c = asym_coeffs_[static_cast<std::size_t>(k)];
      sum += derivative ? k * c * inv / z : -c * inv;
    }
    const auto e = detail::exponential_part_negative(p_, z);
    return sum + (derivative ? e.derivative : e.value);
  }

  double positive_large(double z, bool derivative) const {
    const double w = std::pow(z, 1.0 / p_.delta);
    const double log_mag = w + ((1.0 - p_.theta) / p_.delta) * std::log(z) - std::log(p_.delta);
    if (log_mag > 700.0) {
      throw OverflowError("E_{delta,theta}(z) overflows double for z = " + std::to_string(z));
    }
    if (!derivative) return ml_series(p_, z, cfg_);
    // d/dz E_{d,t} = (E_{d,t-1} - (t-1) E_{d,t}) / (d z)
    const double a = ml_series({p_.delta, p_.theta - 1.0}, z, cfg_);
    const double b = ml_series(p_, z, cfg_);
    return (a - (p_.theta - 1.0) * b) / (p_.delta * z);
  }

  double evaluate(double z, bool derivative) const {
    if (!std::isfinite(z)) throw DomainError("Mittag-Leffler argument must be finite");
    switch (regime(z)) {
      case Regime::origin:
        return derivative ? gamma_recip(p_.delta + p_.theta) : gamma_recip(p_.theta);
      case Regime::series:
        return horner_double(z, derivative);
      case Regime::positive:
        return positive_large(z, derivative);
      case Regime::asymptotic:
        return asymptotic(z, derivative);
      case Regime::extended:
        break;
    }
    if (table_ && -z <= table_->max_abs_z()) {
      return derivative ? table_->derivative(z) : table_->value(z);
    }
    const int digits = detail::extended_digits_for(p_, -z, cfg_.working_precision_digits);
    const detail::HighPrecisionSeries once(p_, -z, digits, cfg_.max_series_terms);
    return derivative ? once.derivative(z) : once.value(z);
  }

  MLParams p_;
  MLEvalConfig cfg_;
  double double_series_limit_ = 0.0;
  double switch_abs_z_ = 0.0;
  std::vector<double> series_coeffs_;
  std::vector<double> asym_coeffs_;
  std::shared_ptr<const detail::HighPrecisionSeries> table_;
};

/// E_{delta,theta}(z) through the regime dispatcher.
inline double ml(const MLParams& p, double z, const MLEvalConfig& cfg = {}) {
  return MittagLeffler(p, cfg, std::abs(z))(z);
}

/// d/dz E_{delta,theta}(z).
inline double ml_dz(const MLParams& p, double z, const MLEvalConfig& cfg = {}) {
  return MittagLeffler(p, cfg, std::abs(z)).derivative(z);
}

}  // namespace fracsl
