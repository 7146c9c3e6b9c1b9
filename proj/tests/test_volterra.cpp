#include <fracsl/volterra.hpp>

#include "catch_amalgamated.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

using namespace fracsl;
using Catch::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

double max_abs_rel(const std::vector<double>& a, const std::vector<double>& b) {
  double scale = 0.0, diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    scale = std::max(scale, std::abs(b[i]));
    diff = std::max(diff, std::abs(a[i] - b[i]));
  }
  return diff / scale;
}

}  // namespace

TEST_CASE("kernel examples and limits", "[volterra][kernel]") {
  CHECK(kernel(1.0, kPi * kPi, 0.5) == Approx(1.0 / kPi).epsilon(1e-13));
  CHECK(kernel(0.5, 10.0, 0.0) == 1.0);
  CHECK(kernel(0.75, 10.0, 0.0) == 0.0);
  CHECK_THROWS_AS(kernel(0.75, 10.0, -0.1), DomainError);
  CHECK_THROWS_AS(kernel(0.4, 10.0, 0.5), DomainError);

  SECTION("equals -E_{2a,0}(-l u^{2a}) / (l u)") {
    for (double a : {0.5, 0.7, 0.85, 1.0}) {
      for (double u : {0.01, 0.3, 0.9}) {
        const double l = 37.0;
        const double other = -ml({2 * a, 0}, -l * std::pow(u, 2 * a)) / (l * u);
        CHECK(kernel(a, l, u) == Approx(other).epsilon(1e-9).margin(1e-14));
      }
    }
  }
}

TEST_CASE("kernel limits at u = 1e-6", "[volterra][kernel][limits]") {
  CHECK(std::abs(kernel(0.5, 10.0, 1e-6) - 1.0) <= 1e-3);
  for (double a : {0.6, 0.75, 0.9, 1.0}) {
    INFO("alpha=" << a);
    CHECK(std::abs(kernel(a, 10.0, 1e-6)) <= 1e-3);
  }
}

TEST_CASE("kernel follows u^{2a-1}/Gamma(2a) near 0", "[volterra][kernel]") {
  for (double a : {0.5, 0.6, 0.75, 0.9, 1.0}) {
    for (double u : {1e-6, 1e-9, 1e-12}) {
      const double lead = std::pow(u, 2 * a - 1) * gamma_recip(2 * a);
      INFO("alpha=" << a << " u=" << u);
      CHECK(kernel(a, 10.0, u) == Approx(lead).epsilon(1e-5));
    }
    // Strictly decreasing towards the limit 0 above a = 1/2.
    if (a > 0.5) CHECK(kernel(a, 10.0, 1e-12) < kernel(a, 10.0, 1e-9));
  }
}

TEST_CASE("kernel is bounded by one", "[volterra][kernel]") {
  for (double a : {0.5, 0.55, 0.6, 0.75, 0.9, 0.99, 1.0}) {
    const FractionalVolterra v(a);
    for (double l : {1.0, 10.0, 100.0, 1000.0}) {
      double worst = 0.0;
      for (int i = 1; i <= 4096; ++i) worst = std::max(worst, std::abs(v.kernel(l, i / 4096.0)));
      INFO("alpha=" << a << " lambda=" << l << " max=" << worst);
      CHECK(worst <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("free_solution examples", "[volterra][free]") {
  CHECK(free_solution(1.0, kPi * kPi, {0, 1}, 0.5) == Approx(1.0 / kPi).epsilon(1e-13));
  for (double a : {0.5, 0.75, 1.0}) {
    const double t = 1e-8;
    CHECK(free_solution(a, 30.0, {0, 1}, t) == Approx(std::pow(t, a) / std::tgamma(a + 1)).epsilon(1e-6));
    CHECK(free_solution(a, 30.0, {0, 1}, 0.0) == 0.0);
  }
  CHECK(free_solution(0.75, 20.0, {0, 1}, 1.0) == Approx(oracle::ml(1.5, 1.75, -20.0)).epsilon(1e-12));
  CHECK(free_solution(0.75, 20.0, {0, 1}, 1.0) == Approx(0.013814352318067615563).epsilon(1e-12));
  // c1 mode at a = 1 is cos.
  CHECK(free_solution(1.0, 4.0, {1, 0}, 0.7) == Approx(std::cos(1.4)).epsilon(1e-13));
  CHECK_THROWS_AS(free_solution(0.75, 20.0, {1, 0}, 0.0), DomainError);
}

TEST_CASE("q = 0 reproduces the free solution", "[volterra][solve]") {
  for (double a : {0.5, 0.75, 0.9, 1.0}) {
    for (double l : {0.0, 3.0, kPi * kPi, 500.0}) {
      for (BoundaryData b : {BoundaryData{0, 1}, BoundaryData{2, -1}}) {
        const auto s = solve(a, l, Potential::zero(), b, 65);
        for (std::size_t i = 1; i < s.mesh.size(); ++i) {
          INFO("alpha=" << a << " lambda=" << l << " c1=" << b.c1 << " i=" << i);
          CHECK(std::abs(s.y[i] - free_solution(a, l, b, s.mesh[i])) <= 1e-12);
        }
      }
    }
  }
  const auto s = solve(1.0, kPi * kPi, Potential::zero(), {0, 1}, 1025);
  CHECK(std::abs(s.y.back()) <= 1e-14);
}

TEST_CASE("classical reduction at alpha = 1", "[volterra][classical]") {
  const std::size_t n = 1025;
  for (double l : {kPi * kPi, 12.0, 60.0}) {
    const auto zero_f = solve(1.0, l, Potential::zero(), {0, 1}, n);
    const auto zero_c = classical_solve(l, Potential::zero(), {0, 1}, n);
    CHECK(max_abs_rel(zero_f.y, zero_c.y) <= 1e-9);
    for (const auto& q : {Potential::constant(1.0), Potential::polynomial({0, 1}), Potential::polynomial({2, -1, 3})}) {
      const auto f = solve(1.0, l, q, {0, 1}, n);
      const auto c = classical_solve(l, q, {0, 1}, n);
      INFO("lambda=" << l << " q=" << q.descriptor());
      CHECK(max_abs_rel(f.y, c.y) <= 1e-6);
    }
  }
  const auto c = classical_solve(4 * kPi * kPi, Potential::zero(), {0, 1}, 257);
  CHECK(std::abs(c.y.back()) <= 1e-14);
  for (std::size_t i = 0; i < c.mesh.size(); ++i) {
    CHECK(c.y[i] == Approx(std::sin(2 * kPi * c.mesh[i]) / (2 * kPi)).margin(1e-14));
  }
}

TEST_CASE("classical_solve against an adaptive ODE integration", "[volterra][classical][oracle]") {
  const auto q = Potential::polynomial({0, 1});
  const double want = oracle::shoot(12.0, [](double t) { return t; }, 0.0, 1.0);
  const auto c = classical_solve(12.0, q, {0, 1}, 4097);
  CHECK(std::abs(c.y.back() - want) <= 1e-6 * std::abs(want));
  for (double l : {5.0, 40.0}) {
    const double w = oracle::shoot(l, [](double) { return 1.0; }, 0.3, -0.5);
    const auto cc = classical_solve(l, Potential::constant(1.0), {0.3, -0.5}, 4097);
    CHECK(std::abs(cc.y.back() - w) <= 1e-6 * std::max(std::abs(w), 1e-2));
  }
}

TEST_CASE("constant potential is a shifted spectral parameter", "[volterra][solve][shift]") {
  // -D(Dy) + c y = l y is the q = 0 problem at l - c.
  const double l = 25.0, c = 4.0;
  for (double a : {0.5, 0.6, 0.75, 0.9, 1.0}) {
    const FractionalVolterra v(a);
    const auto s = v.solve(l, Potential::constant(c), {0, 1}, 2049);
    for (std::size_t i = 64; i < s.mesh.size(); i += 64) {
      const double want = v.free_solution(l - c, {0, 1}, s.mesh[i]);
      INFO("alpha=" << a << " t=" << s.mesh[i]);
      CHECK(std::abs(s.y[i] - want) <= 1e-5 * std::max(1.0, std::abs(want)));
    }
  }
  SECTION("with the t^{a-1} mode switched on") {
    // Each node needs its own quadrature of the singular forcing, so the
    // meshes stay small; the check is on the error and its decrease.
    const BoundaryData b{1, 0.5};
    for (double a : {0.5, 0.6, 0.75, 0.9, 1.0}) {
      const FractionalVolterra v(a);
      const auto coarse = v.solve(l, Potential::constant(c), b, 129);
      const auto fine = v.solve(l, Potential::constant(c), b, 257);
      double e1 = 0.0, e2 = 0.0;
      for (std::size_t i = 1; i < coarse.mesh.size(); ++i) {
        const double t = coarse.mesh[i];
        const double want = v.free_solution(l - c, b, t);
        const double scale = std::max(1.0, std::abs(want));
        e1 = std::max(e1, std::abs(coarse.y[i] - want) / scale);
        e2 = std::max(e2, std::abs(fine.y[2 * i] - want) / scale);
      }
      INFO("alpha=" << a << " coarse=" << e1 << " fine=" << e2);
      CHECK(e2 <= 1e-3);
      CHECK(e2 <= e1 / 2.0);
      if (a < 1.0) CHECK(fine.y[0] == 0.0);
      CHECK(fine.singular_at_zero() == (a < 1.0));
    }
  }
}

TEST_CASE("mesh refinement order", "[volterra][order]") {
  const auto q = Potential::polynomial({1, -2, 3});
  for (double a : {0.5, 0.6, 0.7, 0.75, 0.85, 1.0}) {
    const double l = 20.0;
    const FractionalVolterra v(a);
    const auto ref = v.solve(l, q, {0, 1}, 4 * 512 + 1);
    const auto coarse = v.solve(l, q, {0, 1}, 256 + 1);
    const auto fine = v.solve(l, q, {0, 1}, 512 + 1);
    double e1 = 0.0, e2 = 0.0;
    for (std::size_t i = 1; i < coarse.mesh.size(); ++i) e1 = std::max(e1, std::abs(coarse.y[i] - ref.y[8 * i]));
    for (std::size_t i = 1; i < fine.mesh.size(); ++i) e2 = std::max(e2, std::abs(fine.y[i] - ref.y[4 * i]));
    const double order = std::log2(e1 / e2);
    INFO("alpha=" << a << " e1=" << e1 << " e2=" << e2 << " order=" << order);
    CHECK(order >= (a >= 0.75 ? 1.5 : 1.0));
  }
}

TEST_CASE("free solution decays like lambda^{-1/2}", "[volterra][decay]") {
  // For a < 1 the peak of |y| sits at t ~ lambda^{-1/(2a)}, far inside the
  // first mesh cell at large lambda, so the sup is taken on a geometric grid.
  for (double a : {0.6, 0.75, 0.9, 1.0}) {
    const FractionalVolterra v(a);
    double lo = INFINITY, hi = 0.0;
    for (double l : {1e2, 1e3, 1e4, 1e5, 1e6}) {
      double m = 0.0;
      for (int i = 0; i <= 4000; ++i) {
        const double t = std::pow(10.0, -12.0 + 12.0 * i / 4000.0);
        m = std::max(m, std::abs(v.free_solution(l, {0, 1}, t)));
      }
      const double c = m * std::sqrt(l);
      lo = std::min(lo, c);
      hi = std::max(hi, c);
    }
    INFO("alpha=" << a << " C in [" << lo << ", " << hi << "]");
    CHECK(hi / lo <= 2.0);
  }
}

TEST_CASE("equation residual", "[volterra][residual]") {
  SECTION("sine solution") {
    const auto s = solve(1.0, kPi * kPi, Potential::zero(), {0, 1}, 1024);
    CHECK(residual(s, Potential::zero()) <= 1e-3);
  }
  SECTION("halves under mesh doubling") {
    // For a < 1 the remainder y - c2 t^a/Gamma(a+1) still behaves like
    // t^{3a} at 0, which holds the first few nodes to O(h^a); away from
    // them the residual is second order.
    const auto q = Potential::polynomial({0, 1});
    for (auto [a, t_min] : {std::pair{1.0, 0.0}, std::pair{0.8, 1.0 / 32.0}, std::pair{0.6, 1.0 / 32.0}}) {
      double prev = residual(solve(a, 5.0, q, {0, 1}, 256), q, t_min);
      for (std::size_t n : {512, 1024, 2048}) {
        const double r = residual(solve(a, 5.0, q, {0, 1}, n), q, t_min);
        INFO("alpha=" << a << " nodes=" << n << " residual=" << r << " previous=" << prev);
        CHECK(r <= 0.5 * prev);
        prev = r;
      }
    }
  }
  SECTION("decreases over the whole mesh") {
    const auto q = Potential::polynomial({0, 1});
    for (double a : {0.6, 0.8, 0.9}) {
      double prev = residual(solve(a, 5.0, q, {0, 1}, 256), q);
      for (std::size_t n : {512, 1024, 2048}) {
        const double r = residual(solve(a, 5.0, q, {0, 1}, n), q);
        INFO("alpha=" << a << " nodes=" << n);
        CHECK(r < prev);
        prev = r;
      }
    }
  }
  SECTION("fractional self-consistency") {
    const double r = residual(solve(0.8, 5.0, Potential::zero(), {0, 1}, 2048), Potential::zero());
    CHECK(std::isfinite(r));
    CHECK(r <= 1e-2);
  }
}

TEST_CASE("solve is deterministic and validates input", "[volterra][errors]") {
  const auto q = Potential::polynomial({0, 1});
  CHECK(solve(0.7, 30.0, q, {0, 1}, 300).y == solve(0.7, 30.0, q, {0, 1}, 300).y);
  CHECK_THROWS_AS(solve(0.4, 1.0, q, {0, 1}, 64), DomainError);
  CHECK_THROWS_AS(solve(1.1, 1.0, q, {0, 1}, 64), DomainError);
  CHECK_THROWS_AS(solve(0.7, 1.0, q, {0, 1}, 15), DomainError);
  CHECK_THROWS_AS(solve(0.7, INFINITY, q, {0, 1}, 64), DomainError);
  CHECK_THROWS_AS(classical_solve(-1.0, q, {0, 1}, 64), DomainError);
  CHECK_THROWS_AS(solve(1.0, 0.0, Potential::constant(1e8), {0, 1}, 4097), NonFiniteSolution);
}
