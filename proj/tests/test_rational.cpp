// Copyright 2026 The mmm authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mmm/rational.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <random>

using mmm::Rational;

TEST_CASE("construction reduces and normalizes the sign", "[rational]") {
  CHECK(Rational(2, 4) == Rational(1, 2));
  CHECK(Rational(-2, 4) == Rational(-1, 2));
  CHECK(Rational(2, -4) == Rational(-1, 2));
  CHECK(Rational(2, -4).den() == 2);
  CHECK(Rational(0, 7) == Rational(0));
  CHECK_THROWS_AS(Rational(1, 0), std::domain_error);
}

TEST_CASE("parsing accepts integers and num/den", "[rational]") {
  CHECK(Rational::parse("3") == Rational(3));
  CHECK(Rational::parse("-7/3") == Rational(-7, 3));
  CHECK(Rational::parse("+2/8") == Rational(1, 4));
  CHECK(Rational::parse(" 2597/5000 ") == Rational(2597, 5000));
  CHECK_THROWS(Rational::parse("1/0"));
  CHECK_THROWS(Rational::parse("abc"));
  CHECK_THROWS(Rational::parse(""));
}

TEST_CASE("string forms round-trip", "[rational]") {
  Rational r(-25, 12);
  CHECK(r.str() == "-25/12");
  CHECK(r.fraction_str() == "-25/12");
  CHECK(Rational(5).str() == "5");
  CHECK(Rational(5).fraction_str() == "5/1");
  CHECK(Rational::parse(Rational(5).fraction_str()) == Rational(5));
  CHECK(Rational::parse(r.str()) == r);
}

TEST_CASE("arithmetic stays reduced", "[rational]") {
  std::mt19937 rng(42);
  std::uniform_int_distribution<long> num(-500, 500), den(1, 500);
  for (int i = 0; i < 200; ++i) {
    Rational a(num(rng), den(rng)), b(num(rng), den(rng));
    for (Rational r : {a + b, a - b, a * b}) {
      mpz_class g;
      mpz_gcd(g.get_mpz_t(), r.num().get_mpz_t(), r.den().get_mpz_t());
      CHECK(g == 1);
      CHECK(r.den() > 0);
    }
    if (!b.is_zero()) {
      Rational q = a / b;
      CHECK(q * b == a);
    }
  }
}

TEST_CASE("ordering and helpers", "[rational]") {
  CHECK(Rational(1, 3) < Rational(1, 2));
  CHECK(Rational(-1, 2) < Rational(1, 3));
  CHECK(Rational(7, 2).floor() == 3);
  CHECK(Rational(7, 2).ceil() == 4);
  CHECK(Rational(-7, 2).floor() == -4);
  CHECK(Rational(-7, 2).ceil() == -3);
  CHECK(Rational(-3, 4).abs() == Rational(3, 4));
  CHECK(mmm::min(Rational(1, 3), Rational(1, 2)) == Rational(1, 3));
  CHECK(mmm::max(Rational(1, 3), Rational(1, 2)) == Rational(1, 2));
}

TEST_CASE("dyadic detection", "[rational]") {
  CHECK(Rational(3, 8).is_dyadic());
  CHECK(Rational(5).is_dyadic());
  CHECK_FALSE(Rational(1, 6).is_dyadic());
  CHECK_FALSE(Rational(1, 3).is_dyadic());
}

TEST_CASE("nu2 is the exact 2-adic valuation", "[rational]") {
  CHECK(mmm::nu2(1L) == 0);
  CHECK(mmm::nu2(8L) == 3);
  // 12 = 2^2 * 3
  CHECK(mmm::nu2(12L) == 2);
  CHECK_THROWS_AS(mmm::nu2(0L), std::domain_error);
  CHECK_THROWS_AS(mmm::nu2(-4L), std::domain_error);
  // brute-force oracle on small inputs
  for (long b = 1; b <= 256; ++b) {
    long v = 0, t = b;
    while (t % 2 == 0) { t /= 2; ++v; }
    CHECK(mmm::nu2(b) == static_cast<unsigned long>(v));
  }
}

TEST_CASE("isqrt flags exact squares", "[rational]") {
  bool exact = false;
  CHECK(mmm::isqrt(mpz_class(49), &exact) == 7);
  CHECK(exact);
  CHECK(mmm::isqrt(mpz_class(50), &exact) == 7);
  CHECK_FALSE(exact);
}
