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

#ifndef MMM_NORMAL_FORM_HPP
#define MMM_NORMAL_FORM_HPP

#include <optional>
#include <stdexcept>
#include <vector>

#include "mmm/piecewise_affine.hpp"
#include "mmm/set_orbit.hpp"

namespace mmm {

// One-parameter reduced system of odd order t >= 5: seed multiset [0,1] with
// the two median values 0 and 1/2 prescribed, iterated by
// y_n = n*M_{n-1} - (n-1)*M_{n-2}. All iterates are dyadic rationals and the
// median sequence is non-decreasing.
struct NormalFormOrbit {
  long t = 0;
  std::vector<Rational> y;                // y_t, y_{t+1}, ...
  std::vector<Rational> medians;          // M_{t-2}, M_{t-1}, M_t, ...
  RationalMultiset gamma;                 // final multiset
  std::optional<Rational> m;              // limit, when stabilized
  std::optional<long> tau;                // transit time, when stabilized
  std::vector<unsigned long> kappa;       // kappa(t), kappa(t+1), ...

  bool stabilized() const { return m.has_value(); }
  long last_index() const { return t - 1 + static_cast<long>(y.size()); }
  const Rational& y_at(long n) const { return y.at(static_cast<std::size_t>(n - t)); }
  const Rational& median_at(long n) const {
    return medians.at(static_cast<std::size_t>(n - (t - 2)));
  }
  unsigned long kappa_at(long n) const { return kappa.at(static_cast<std::size_t>(n - t)); }
};

struct NormalFormOptions {
  long cap = 20'000;
  // Stop as soon as the orbit is known to repeat; when false, run out the cap.
  bool stop_when_stable = true;
};

inline void require_odd_order(long t) {
  if (t < 5 || t % 2 == 0) throw std::domain_error("normal form: order must be odd and >= 5");
}

inline NormalFormOrbit nf_run(long t, const NormalFormOptions& opt = {}) {
  require_odd_order(t);
  if (opt.cap < 1) throw std::domain_error("nf_run: cap must be >= 1");
  NormalFormOrbit orb;
  orb.t = t;
  orb.gamma.insert(Rational(0));
  orb.gamma.insert(Rational(1));
  orb.medians = {Rational(0), Rational(1, 2)};

  Rational med2 = Rational(0);      // M_{n-2}
  Rational med1 = Rational(1, 2);   // M_{n-1}
  unsigned long kmax = 0;
  for (long n = t; n < t + opt.cap; ++n) {
    Rational yn = Rational(n) * med1 - Rational(n - 1) * med2;
    if (!yn.is_dyadic())
      throw std::logic_error("nf_run: non-dyadic iterate at n=" + std::to_string(n));
    orb.gamma.insert(yn);
    orb.y.push_back(yn);
    unsigned long v = yn.den() == 1 ? 0 : nu2(yn.den());
    if (v > kmax) kmax = v;
    orb.kappa.push_back(kmax);

    Rational mn = orb.gamma.median();
    orb.medians.push_back(mn);

    if (orb.y.size() >= 2 && mn == med1 && yn == orb.y[orb.y.size() - 2]) {
      // run-back over the generated sequence
      long j = static_cast<long>(orb.y.size());
      while (j > 1 && orb.y[static_cast<std::size_t>(j) - 2] == yn) --j;
      orb.m = yn;
      orb.tau = t + j - 1;
      if (opt.stop_when_stable) break;
    }
    med2 = std::move(med1);
    med1 = std::move(mn);
  }
  return orb;
}

// The core form of the recursion; y_prev is y_{n-1} and the core is that of
// the multiset two steps back, elements in non-decreasing order.
inline Rational nf_core_step(const Rational& y_prev, const RationalMultiset& core, long n) {
  return core_step(y_prev, core, n);
}

// Largest l >= 0 with t > u_l, where u_l = l+1+sqrt(5l^2+6l+5); computed by
// the integer ceiling expression with an exactness-checked square root, and
// verified against the direct integer characterization
// (t-l-1)^2 > 5l^2+6l+5.
inline long regular_phase_length(long t) {
  require_odd_order(t);
  mpz_class D = mpz_class(5) * t * t - 4 * t - 12;
  bool exact = false;
  mpz_class r = isqrt(D, &exact);
  mpz_class num = r - t - 2;
  mpz_class L_formula;
  if (exact) {
    mpz_class c;
    mpz_cdiv_q_ui(c.get_mpz_t(), num.get_mpz_t(), 4);
    L_formula = c - 1;
  } else {
    // sqrt(D) is irrational: the quotient never lands on an integer, so the
    // ceiling is floor + 1.
    mpz_class f;
    mpz_fdiv_q_ui(f.get_mpz_t(), num.get_mpz_t(), 4);
    L_formula = f;
  }
  auto below = [t](long l) {
    mpz_class lhs = mpz_class(t - l - 1);
    return t - l - 1 > 0 && lhs * lhs > mpz_class(5) * l * l + 6 * l + 5;
  };
  long L = 0;
  while (below(L + 1)) ++L;
  if (!below(0) || L_formula != L)
    throw std::logic_error("regular_phase_length: formula/loop disagreement at t=" +
                           std::to_string(t));
  return L;
}

struct RegularPhaseReport {
  long t = 0;
  long L = 0;
  long N = 0;                      // t + 4L + 3
  std::vector<Rational> values;    // closed forms y_t .. y_{N+2}
  Rational m_lower;
  long tau_lower = 0;
  bool ordering_verified = false;

  const Rational& value_at(long n) const { return values.at(static_cast<std::size_t>(n - t)); }
};

// Closed forms of the initial orbit segment together with the index
// bookkeeping and the lower bounds they imply.
inline RegularPhaseReport nf_regular_phase(long t) {
  require_odd_order(t);
  RegularPhaseReport rep;
  rep.t = t;
  rep.L = regular_phase_length(t);
  rep.N = t + 4 * rep.L + 3;
  Rational tq(t), t2q = tq * tq / Rational(4), half_t = tq / Rational(2);

  std::vector<Rational>& v = rep.values;
  v.push_back(half_t);                              // y_t
  v.push_back(half_t + Rational(1));                // y_{t+1}
  v.push_back(t2q);                                 // y_{t+2}
  v.push_back(t2q + half_t - Rational(1));          // y_{t+3}
  for (long l = 1; l <= rep.L; ++l) {
    Rational lq(l);
    v.push_back(Rational(l + 1) * tq / Rational(2) + lq * lq + lq);
    v.push_back(v.back() + Rational(1));
    v.push_back(t2q + Rational(5 * l) * tq / Rational(2) + Rational(5) * lq * lq - lq);
    v.push_back(t2q + Rational(5 * l + 1) * tq / Rational(2) + Rational(5) * lq * lq + lq -
                Rational(1));
  }
  Rational Lq(rep.L);
  v.push_back(Rational(rep.L + 2) * tq / Rational(2) + Lq * Lq + Rational(3) * Lq +
              Rational(2));                          // y_{N+1}
  v.push_back(v.back() + Rational(1));               // y_{N+2}

  rep.m_lower = Rational(rep.L + 1) * tq / Rational(2) + Lq * Lq + Lq + Rational(1);
  rep.tau_lower = rep.N + 2;

  // ordering chains
  bool ok = Rational(0) < Rational(1) && Rational(1) < v[0] && v[0] < v[1] && v[1] < v[2] &&
            v[2] < v[3];
  for (long l = 1; l <= rep.L && ok; ++l) {
    ok = rep.value_at(t + 4 * l - 3) < rep.value_at(t + 4 * l) &&
         rep.value_at(t + 4 * l) < rep.value_at(t + 4 * l + 1) &&
         rep.value_at(t + 4 * l + 1) < rep.value_at(t + 2) &&
         rep.value_at(t + 4 * l - 1) < rep.value_at(t + 4 * l + 2) &&
         rep.value_at(t + 4 * l + 2) < rep.value_at(t + 4 * l + 3);
  }
  rep.ordering_verified = ok;
  return rep;
}

inline std::pair<Rational, long> nf_bounds(long t) {
  RegularPhaseReport rep = nf_regular_phase(t);
  return {rep.m_lower, rep.tau_lower};
}

// kappa(N_t+2) = 2 for every odd t >= 7.
inline bool check_effective_exponent(const NormalFormOrbit& orb) {
  RegularPhaseReport rep = nf_regular_phase(orb.t);
  if (orb.last_index() < rep.N + 2)
    throw std::domain_error("check_effective_exponent: orbit shorter than N_t+2");
  return orb.kappa_at(rep.N + 2) == 2;
}

// m_t < y_{N_t}, the conjectured upper bound, for odd t >= 9.
inline std::optional<bool> check_conjectured_upper_bound(const NormalFormOrbit& orb) {
  if (!orb.stabilized()) return std::nullopt;
  RegularPhaseReport rep = nf_regular_phase(orb.t);
  return *orb.m < rep.value_at(rep.N);
}

// Reconstruction of the functions near a proper active X-point from the
// normal form: on a side where low < high, the n-th function is
// low + (high - low) * y_n.
inline PiecewiseAffine nf_lift(const PiecewiseAffine& low, const PiecewiseAffine& high,
                               const Rational& y_value) {
  return affine_combine({{Rational(1) - y_value, &low}, {y_value, &high}});
}

inline AffinePiece nf_lift_line(const AffinePiece& low, const AffinePiece& high,
                                const Rational& y_value) {
  return {low.slope + (high.slope - low.slope) * y_value,
          low.intercept + (high.intercept - low.intercept) * y_value};
}

}  // namespace mmm

#endif  // MMM_NORMAL_FORM_HPP
