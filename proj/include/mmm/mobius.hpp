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

#ifndef MMM_MOBIUS_HPP
#define MMM_MOBIUS_HPP

#include <ostream>
#include <stdexcept>

#include "mmm/rational.hpp"

namespace mmm {

// z -> slope*z + intercept.
struct AffineMap {
  Rational slope;
  Rational intercept;

  Rational operator()(const Rational& z) const { return slope * z + intercept; }

  // this after other: z -> this(other(z)).
  AffineMap compose(const AffineMap& other) const {
    return {slope * other.slope, slope * other.intercept + intercept};
  }
  AffineMap inverse() const {
    if (slope.is_zero()) throw std::domain_error("AffineMap: constant map has no inverse");
    return {Rational(1) / slope, -intercept / slope};
  }
  friend bool operator==(const AffineMap&, const AffineMap&) = default;
};

// x -> (a x + b) / (c x + d), ad - bc != 0, stored with the first nonzero
// coefficient of (a,b,c,d) scaled to 1 so that equality is componentwise.
class Mobius {
 public:
  Mobius(Rational a, Rational b, Rational c, Rational d)
      : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), d_(std::move(d)) {
    if ((a_ * d_ - b_ * c_).is_zero()) throw std::domain_error("Mobius: degenerate coefficients");
    canonicalize();
  }

  static Mobius identity() { return Mobius(1, 0, 0, 1); }
  static Mobius affine(const Rational& slope, const Rational& intercept) {
    return Mobius(slope, intercept, 0, 1);
  }

  const Rational& a() const { return a_; }
  const Rational& b() const { return b_; }
  const Rational& c() const { return c_; }
  const Rational& d() const { return d_; }

  bool has_pole_at(const Rational& x) const { return (c_ * x + d_).is_zero(); }

  Rational operator()(const Rational& x) const {
    Rational denom = c_ * x + d_;
    if (denom.is_zero()) throw std::domain_error("Mobius: pole at x = " + x.str());
    return (a_ * x + b_) / denom;
  }

  // this after other.
  Mobius compose(const Mobius& other) const {
    return Mobius(a_ * other.a_ + b_ * other.c_, a_ * other.b_ + b_ * other.d_,
                  c_ * other.a_ + d_ * other.c_, c_ * other.b_ + d_ * other.d_);
  }

  Mobius inverse() const { return Mobius(d_, -b_, -c_, a_); }

  bool is_identity() const {
    return a_ == Rational(1) && b_.is_zero() && c_.is_zero() && d_ == Rational(1);
  }

  // True iff m∘m = id and m != id; equivalently zero trace under canonical
  // scaling (the matrix squares to a multiple of the identity).
  bool is_involution() const { return !is_identity() && (a_ + d_).is_zero(); }

  friend bool operator==(const Mobius& x, const Mobius& y) {
    return x.a_ == y.a_ && x.b_ == y.b_ && x.c_ == y.c_ && x.d_ == y.d_;
  }

  friend std::ostream& operator<<(std::ostream& os, const Mobius& m) {
    return os << "(" << m.a_ << "x+" << m.b_ << ")/(" << m.c_ << "x+" << m.d_ << ")";
  }

 private:
  void canonicalize() {
    const Rational* lead = nullptr;
    for (const Rational* r : {&a_, &b_, &c_, &d_})
      if (!r->is_zero()) { lead = r; break; }
    Rational s = *lead;  // nondegeneracy guarantees a nonzero coefficient
    a_ /= s; b_ /= s; c_ /= s; d_ /= s;
  }

  Rational a_, b_, c_, d_;
};

}  // namespace mmm

#endif  // MMM_MOBIUS_HPP
