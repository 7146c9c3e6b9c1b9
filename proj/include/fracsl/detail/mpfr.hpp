#pragma once

#include <mpfr.h>

#include <cmath>
#include <utility>

namespace fracsl::detail {

// Owning handle around mpfr_t. Every value carries its own precision, so
// objects from different threads never share state.
class BigFloat {
 public:
  explicit BigFloat(mpfr_prec_t bits) { mpfr_init2(v_, bits); mpfr_set_zero(v_, 1); }
  BigFloat(mpfr_prec_t bits, double x) { mpfr_init2(v_, bits); mpfr_set_d(v_, x, MPFR_RNDN); }
  BigFloat(const BigFloat& other) {
    mpfr_init2(v_, mpfr_get_prec(other.v_));
    mpfr_set(v_, other.v_, MPFR_RNDN);
  }
  BigFloat(BigFloat&& other) noexcept {
    mpfr_init2(v_, MPFR_PREC_MIN);
    mpfr_swap(v_, other.v_);
  }
  BigFloat& operator=(BigFloat other) noexcept {
    mpfr_swap(v_, other.v_);
    return *this;
  }
  ~BigFloat() { mpfr_clear(v_); }

  mpfr_ptr get() noexcept { return v_; }
  mpfr_srcptr get() const noexcept { return v_; }
  mpfr_prec_t precision() const noexcept { return mpfr_get_prec(v_); }
  double to_double() const noexcept { return mpfr_get_d(v_, MPFR_RNDN); }

 private:
  mpfr_t v_;
};

inline mpfr_prec_t digits_to_bits(int digits) {
  return static_cast<mpfr_prec_t>(std::ceil(digits * 3.3219280948873623)) + 8;
}

// 1/Gamma(delta*k + theta) at the precision of `out`; exact zero at poles.
inline void reciprocal_gamma_at(BigFloat& out, double delta, long k, double theta) {
  BigFloat arg(out.precision() + 64, delta);
  mpfr_mul_si(arg.get(), arg.get(), k, MPFR_RNDN);
  BigFloat th(out.precision() + 64, theta);
  mpfr_add(arg.get(), arg.get(), th.get(), MPFR_RNDN);
  if (mpfr_integer_p(arg.get()) && mpfr_sgn(arg.get()) <= 0) {
    mpfr_set_zero(out.get(), 1);
    return;
  }
  mpfr_gamma(out.get(), arg.get(), MPFR_RNDN);
  mpfr_ui_div(out.get(), 1, out.get(), MPFR_RNDN);
}

}  // namespace fracsl::detail
