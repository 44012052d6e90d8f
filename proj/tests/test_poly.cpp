#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <vector>

#include "qmeixner/poly.hpp"

using namespace qmeixner;

TEST_CASE("Poly canonical form") {
  CHECK(Poly().is_zero());
  CHECK(Poly().degree() == -1);
  CHECK(Poly(std::vector<double>{1.0, 2.0, 0.0, 0.0}).degree() == 1);
  CHECK(Poly::constant(0.0).is_zero());
  CHECK(Poly::constant(3.0).degree() == 0);
  CHECK(Poly::monomial(4).degree() == 4);
  CHECK(Poly::monomial(4)[4] == 1.0);
  CHECK(Poly::monomial(4)[2] == 0.0);
  CHECK(Poly::monomial(4)[17] == 0.0);  // out-of-range coefficient reads as 0
}

TEST_CASE("eval is the Horner value") {
  CHECK(eval(Poly(), 3.0) == 0.0);
  CHECK(eval(Poly(std::vector<double>{1.0, 2.0, 1.0}), 2.0) == 9.0);
  CHECK(eval(Poly::monomial(3), -1.5) == Catch::Approx(-3.375).epsilon(1e-15));
}

TEST_CASE("ring operations") {
  const Poly y = Poly::monomial(1);

  SECTION("add cancels to the canonical zero") {
    const Poly z = add(y, scale(y, -1.0));
    CHECK(z.is_zero());
    CHECK(z.coeffs().empty());
  }
  SECTION("scale by zero") { CHECK(scale(Poly::monomial(5), 0.0).is_zero()); }
  SECTION("mul_by_linear") {
    const Poly p = mul_by_linear(Poly::constant(1.0), 2.0);  // y - 2
    CHECK(p.degree() == 1);
    CHECK(p[0] == -2.0);
    CHECK(p[1] == 1.0);
    CHECK(mul_by_linear(Poly(), 3.0).is_zero());
  }
  SECTION("derivative") {
    const Poly d = derivative(Poly::monomial(2));  // 2y
    CHECK(d.degree() == 1);
    CHECK(d[1] == 2.0);
    CHECK(derivative(Poly::constant(7.0)).is_zero());
    CHECK(derivative(Poly()).is_zero());
  }
}

TEST_CASE("divided_difference by synthetic division") {
  SECTION("known factorizations") {
    const Poly g = divided_difference(Poly::monomial(2), 1.0);  // y + 1
    CHECK(g.degree() == 1);
    CHECK(g[0] == Catch::Approx(1.0));
    CHECK(g[1] == Catch::Approx(1.0));

    const Poly g3 = divided_difference(Poly::monomial(3), 2.0);  // y^2 + 2y + 4
    CHECK(g3[0] == Catch::Approx(4.0));
    CHECK(g3[1] == Catch::Approx(2.0));
    CHECK(g3[2] == Catch::Approx(1.0));

    CHECK(divided_difference(Poly::constant(5.0), 0.3).is_zero());
    CHECK(divided_difference(Poly(), 0.3).is_zero());
  }

  SECTION("g(y)(y - x0) + p(x0) reproduces p at random points") {
    std::mt19937_64 gen(991);
    std::uniform_real_distribution<double> coeff(-2.0, 2.0);
    std::uniform_real_distribution<double> pt(-3.0, 3.0);
    for (int trial = 0; trial < 30; ++trial) {
      std::vector<double> c(11);
      for (double& ci : c) ci = coeff(gen);
      const Poly p(c);
      const double x0 = pt(gen);
      const Poly g = divided_difference(p, x0);
      CHECK(g.degree() == p.degree() - 1);
      for (int j = 0; j < 20; ++j) {
        const double y = pt(gen);
        const double recon = eval(g, y) * (y - x0) + eval(p, x0);
        CHECK(recon == Catch::Approx(eval(p, y)).epsilon(1e-10).margin(1e-10));
      }
    }
  }
}

TEST_CASE("generator_integrand") {
  SECTION("closed forms") {
    // (y^2 - x^2)/(y - x) = y + x, whose x-derivative is the constant 1
    const Poly r2 = generator_integrand(Poly::monomial(2), 0.77);
    CHECK(r2.degree() == 0);
    CHECK(r2[0] == Catch::Approx(1.0));

    const double x0 = -1.3;
    const Poly r3 = generator_integrand(Poly::monomial(3), x0);  // y + 2 x0
    CHECK(r3.degree() == 1);
    CHECK(r3[0] == Catch::Approx(2.0 * x0));
    CHECK(r3[1] == Catch::Approx(1.0));

    CHECK(generator_integrand(Poly::constant(4.0), 0.5).is_zero());
    CHECK(generator_integrand(Poly::monomial(1), 0.5).is_zero());
  }

  SECTION("value at y = x0 is p''(x0)/2") {
    std::mt19937_64 gen(1723);
    std::uniform_real_distribution<double> coeff(-2.0, 2.0);
    std::uniform_real_distribution<double> pt(-2.0, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> c(9);
      for (double& ci : c) ci = coeff(gen);
      const Poly p(c);
      const double x0 = pt(gen);
      const Poly r = generator_integrand(p, x0);
      const double d2 = eval(derivative(derivative(p)), x0);
      CHECK(eval(r, x0) == Catch::Approx(0.5 * d2).epsilon(1e-9).margin(1e-9));
    }
  }

  SECTION("defining relation r(y)(y-x0)^2 = p(y) - p(x0) - p'(x0)(y-x0)") {
    std::mt19937_64 gen(55);
    std::uniform_real_distribution<double> coeff(-1.5, 1.5);
    std::uniform_real_distribution<double> pt(-2.5, 2.5);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> c(8);
      for (double& ci : c) ci = coeff(gen);
      const Poly p(c);
      const double x0 = pt(gen);
      const Poly r = generator_integrand(p, x0);
      const double px0 = eval(p, x0);
      const double dpx0 = eval(derivative(p), x0);
      for (int j = 0; j < 10; ++j) {
        const double y = pt(gen);
        const double lhs = eval(r, y) * (y - x0) * (y - x0);
        const double rhs = eval(p, y) - px0 - dpx0 * (y - x0);
        CHECK(lhs == Catch::Approx(rhs).epsilon(1e-9).margin(1e-9));
      }
    }
  }
}
