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

#ifndef MMM_RATIONAL_HPP
#define MMM_RATIONAL_HPP

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mmm {

// Exact arbitrary-precision rational, the universal scalar of this library.
// Always stored reduced with a positive denominator; equality is value
// equality. No floating point ever enters the arithmetic; to_double() exists
// only for reporting (regressions, plots).
class Rational {
 public:
  Rational() : v_(0) {}
  Rational(int n) : v_(n) {}
  Rational(long n) : v_(static_cast<long int>(n)) {}
  Rational(long long n) { v_ = from_decimal_string(std::to_string(n)).v_; }
  Rational(const mpz_class& n) : v_(n) {}
  Rational(long num, long den) : v_(static_cast<long int>(num), static_cast<long int>(den)) {
    if (den == 0) throw std::domain_error("Rational: zero denominator");
    v_.canonicalize();
  }
  Rational(const mpz_class& num, const mpz_class& den) : v_(num, den) {
    if (den == 0) throw std::domain_error("Rational: zero denominator");
    v_.canonicalize();
  }
  explicit Rational(const mpq_class& q) : v_(q) { v_.canonicalize(); }

  // Parses "num/den" or a plain integer, both base 10. Reduces.
  static Rational parse(std::string_view s) { return from_decimal_string(std::string(s)); }

  const mpz_class num() const { return v_.get_num(); }
  const mpz_class den() const { return v_.get_den(); }
  const mpq_class& raw() const { return v_; }

  bool is_zero() const { return mpq_sgn(v_.get_mpq_t()) == 0; }
  bool is_integer() const { return v_.get_den() == 1; }
  int sign() const { return mpq_sgn(v_.get_mpq_t()); }

  // True iff the denominator is a power of two (the dyadic invariant).
  bool is_dyadic() const {
    const mpz_class& d = v_.get_den();
    return mpz_popcount(d.get_mpz_t()) == 1;
  }

  Rational operator-() const { Rational r; r.v_ = -v_; return r; }
  Rational& operator+=(const Rational& o) { v_ += o.v_; return *this; }
  Rational& operator-=(const Rational& o) { v_ -= o.v_; return *this; }
  Rational& operator*=(const Rational& o) { v_ *= o.v_; return *this; }
  Rational& operator/=(const Rational& o) {
    if (o.is_zero()) throw std::domain_error("Rational: division by zero");
    v_ /= o.v_;
    return *this;
  }

  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return mpq_equal(a.v_.get_mpq_t(), b.v_.get_mpq_t()) != 0;
  }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    int c = mpq_cmp(a.v_.get_mpq_t(), b.v_.get_mpq_t());
    if (c < 0) return std::strong_ordering::less;
    if (c > 0) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

  Rational abs() const { Rational r; mpq_abs(r.v_.get_mpq_t(), v_.get_mpq_t()); return r; }

  // Largest integer <= value.
  mpz_class floor() const {
    mpz_class q;
    mpz_fdiv_q(q.get_mpz_t(), v_.get_num().get_mpz_t(), v_.get_den().get_mpz_t());
    return q;
  }
  mpz_class ceil() const {
    mpz_class q;
    mpz_cdiv_q(q.get_mpz_t(), v_.get_num().get_mpz_t(), v_.get_den().get_mpz_t());
    return q;
  }

  double to_double() const { return v_.get_d(); }

  // Canonical display form: "3", "-1/2". Round-trips through parse().
  std::string str() const { return v_.get_str(); }

  // Explicit "num/den" form used by all file schemas, e.g. "3/1", "-1/2".
  std::string fraction_str() const {
    return v_.get_num().get_str() + "/" + v_.get_den().get_str();
  }

  friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

 private:
  static Rational from_decimal_string(const std::string& s) {
    std::string t;
    t.reserve(s.size());
    for (char c : s) {
      if (c == ' ' || c == '\t') continue;
      t.push_back(c);
    }
    if (t.empty()) throw std::invalid_argument("Rational: empty string");
    if (!t.empty() && t.front() == '+') t.erase(t.begin());
    Rational r;
    if (mpq_set_str(r.v_.get_mpq_t(), t.c_str(), 10) != 0)
      throw std::invalid_argument("Rational: cannot parse '" + s + "'");
    if (r.v_.get_den() == 0) throw std::domain_error("Rational: zero denominator in '" + s + "'");
    r.v_.canonicalize();
    return r;
  }

  mpq_class v_;
};

// Exact 2-adic valuation of a positive integer: the largest i with 2^i | b.
inline unsigned long nu2(const mpz_class& b) {
  if (b <= 0) throw std::domain_error("nu2: argument must be positive");
  return mpz_scan1(b.get_mpz_t(), 0);
}

inline unsigned long nu2(long b) { return nu2(mpz_class(b)); }

// Floor of the integer square root, plus exactness flag.
inline mpz_class isqrt(const mpz_class& n, bool* exact = nullptr) {
  if (n < 0) throw std::domain_error("isqrt: negative argument");
  mpz_class r;
  mpz_sqrt(r.get_mpz_t(), n.get_mpz_t());
  if (exact) *exact = (r * r == n);
  return r;
}

inline const Rational& min(const Rational& a, const Rational& b) { return b < a ? b : a; }
inline const Rational& max(const Rational& a, const Rational& b) { return a < b ? b : a; }

}  // namespace mmm

#endif  // MMM_RATIONAL_HPP
