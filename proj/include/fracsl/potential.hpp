#pragma once

#include <fracsl/errors.hpp>
#include <fracsl/fractional_ops.hpp>

#include <cmath>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace fracsl {

/// The potential q on [0, 1].
class Potential {
 public:
  enum class Kind { zero, constant, polynomial, sampled };

  Potential() = default;

  static Potential zero() { return Potential{}; }

  static Potential constant(double c) {
    if (!std::isfinite(c)) throw DomainError("constant potential must be finite");
    Potential q;
    q.data_ = Constant{c};
    return q;
  }

  /// q(t) = coeffs[0] + coeffs[1] t + ...
  static Potential polynomial(std::vector<double> coeffs) {
    if (coeffs.empty()) throw DomainError("polynomial potential needs at least one coefficient");
    for (double c : coeffs) {
      if (!std::isfinite(c)) throw DomainError("polynomial coefficients must be finite");
    }
    Potential q;
    q.data_ = Polynomial{std::move(coeffs)};
    return q;
  }

  static Potential sampled(SampledFunction f, std::string source = {}) {
    validate(f);
    if (f.interp != Interpolation::linear) throw DomainError("sampled potential must use linear interpolation");
    Potential q;
    q.data_ = Sampled{std::move(f), std::move(source)};
    return q;
  }

  Kind kind() const noexcept { return static_cast<Kind>(data_.index()); }
  bool is_zero() const noexcept { return kind() == Kind::zero; }

  double operator()(double t) const {
    return std::visit(
        [t](const auto& d) -> double {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, Zero>) {
            return 0.0;
          } else if constexpr (std::is_same_v<T, Constant>) {
            return d.c;
          } else if constexpr (std::is_same_v<T, Polynomial>) {
            double acc = 0.0;
            for (auto it = d.coeffs.rbegin(); it != d.coeffs.rend(); ++it) acc = acc * t + *it;
            return acc;
          } else {
            return d.f(t);
          }
        },
        data_);
  }

  double constant_value() const { return std::get<Constant>(data_).c; }
  const std::vector<double>& coefficients() const { return std::get<Polynomial>(data_).coeffs; }
  const SampledFunction& samples() const { return std::get<Sampled>(data_).f; }

  /// Text form accepted back by the CLI parser (sampled data without a
  /// source path are summarised instead).
  std::string descriptor() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind()) {
      case Kind::zero:
        os << "zero";
        break;
      case Kind::constant:
        os << "const:" << constant_value();
        break;
      case Kind::polynomial: {
        os << "poly:";
        const auto& c = coefficients();
        for (std::size_t i = 0; i < c.size(); ++i) os << (i ? "," : "") << c[i];
        break;
      }
      case Kind::sampled: {
        const auto& s = std::get<Sampled>(data_);
        if (!s.source.empty()) {
          os << "csv:" << s.source;
        } else {
          os << "sampled:" << s.f.size() << "-nodes";
        }
        break;
      }
    }
    return os.str();
  }

 private:
  struct Zero {};
  struct Constant {
    double c;
  };
  struct Polynomial {
    std::vector<double> coeffs;
  };
  struct Sampled {
    SampledFunction f;
    std::string source;
  };
  std::variant<Zero, Constant, Polynomial, Sampled> data_;
};

}  // namespace fracsl
