#include <catch2/catch_amalgamated.hpp>

#include <stdexcept>

#include "qmeixner/qnum.hpp"

using namespace qmeixner;

TEST_CASE("q_bracket basic values") {
  CHECK(q_bracket(0, 0.5) == 0.0);
  CHECK(q_bracket(3, 0.5) == Catch::Approx(1.75).epsilon(1e-15));  // 1 + 0.5 + 0.25
  CHECK(q_bracket(5, 0.0) == 1.0);
  CHECK(q_bracket(1, -0.9) == 1.0);
  CHECK(q_bracket(4, 1.0) == 4.0);  // plain integer at q = 1
}

TEST_CASE("q_bracket recursion [n+1] = 1 + q [n]") {
  for (double q : {-0.9, -0.5, 0.0, 0.3, 0.7, 1.0}) {
    for (int n = 0; n <= 20; ++n) {
      const double lhs = q_bracket(n + 1, q);
      const double rhs = 1.0 + q * q_bracket(n, q);
      CHECK(lhs == Catch::Approx(rhs).margin(1e-14));
    }
  }
}

TEST_CASE("q_bracket positivity and domain") {
  for (double q : {-0.99, -0.5, 0.0, 0.5, 1.0}) {
    for (int n = 1; n <= 50; ++n) {
      CHECK(q_bracket(n, q) > 0.0);
    }
  }
  CHECK_THROWS_AS(q_bracket(-1, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(q_bracket(3, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(q_bracket(3, -1.0), std::invalid_argument);
}

TEST_CASE("q_factorial values") {
  CHECK(q_factorial(0, 0.7) == 1.0);
  CHECK(q_factorial(3, 0.5) == Catch::Approx(2.625).epsilon(1e-15));  // 1 * 1.5 * 1.75
  CHECK(q_factorial(4, 0.0) == 1.0);
  CHECK(q_factorial(4, 1.0) == 24.0);
  for (int n = 0; n <= 12; ++n) CHECK(q_factorial(n, -0.4) > 0.0);
}

TEST_CASE("q_binomial values and edge cases") {
  for (double q : {-0.5, 0.0, 0.3, 1.0}) {
    CHECK(q_binomial(0, 0, q) == 1.0);
    CHECK(q_binomial(7, 0, q) == 1.0);
    CHECK(q_binomial(7, 7, q) == 1.0);
  }
  CHECK(q_binomial(4, 2, 0.5) == Catch::Approx(2.1875).epsilon(1e-14));
  CHECK(q_binomial(4, 2, 0.0) == Catch::Approx(1.0).epsilon(1e-14));
  CHECK(q_binomial(4, 2, 1.0) == Catch::Approx(6.0).epsilon(1e-14));
  CHECK_THROWS_AS(q_binomial(3, 4, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(q_binomial(3, -1, 0.5), std::invalid_argument);
}

TEST_CASE("q_binomial symmetry in k -> n-k") {
  for (double q : {-0.7, -0.2, 0.0, 0.4, 0.9}) {
    for (int n = 0; n <= 12; ++n) {
      for (int k = 0; k <= n; ++k) {
        CHECK(q_binomial(n, k, q) ==
              Catch::Approx(q_binomial(n, n - k, q)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("q-Pascal recursion") {
  // [n+1 k] = [n k-1] + q^k [n k]
  for (double q : {-0.7, -0.2, 0.0, 0.4, 0.9, 1.0}) {
    for (int n = 0; n <= 12; ++n) {
      for (int k = 1; k <= n; ++k) {
        const double lhs = q_binomial(n + 1, k, q);
        const double rhs = q_binomial(n, k - 1, q) + std::pow(q, k) * q_binomial(n, k, q);
        CHECK(lhs == Catch::Approx(rhs).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("ProcessParams validates its invariants") {
  CHECK_NOTHROW(ProcessParams(0.0, 0.0, 0.0));
  CHECK_NOTHROW(ProcessParams(-0.999, -3.0, 5.0));
  CHECK_NOTHROW(ProcessParams(0.999999, 0.0, 0.0));
  // q must be strictly inside (-1, 1) for the process itself
  CHECK_THROWS_AS(ProcessParams(1.0, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(ProcessParams(-1.0, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(ProcessParams(1.5, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(ProcessParams(0.5, 0.0, -0.1), std::invalid_argument);
}
