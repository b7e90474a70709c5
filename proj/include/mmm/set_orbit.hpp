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

#ifndef MMM_SET_ORBIT_HPP
#define MMM_SET_ORBIT_HPP

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mmm/rational.hpp"

namespace mmm {

// Finite rational multiset kept sorted non-decreasing, with the running sum
// maintained so the mean is O(1). Insertion locates by binary search.
class RationalMultiset {
 public:
  RationalMultiset() = default;
  explicit RationalMultiset(std::vector<Rational> elems) {
    for (auto& e : elems) insert(std::move(e));
  }

  void insert(Rational x) {
    sum_ += x;
    auto it = std::upper_bound(elems_.begin(), elems_.end(), x);
    elems_.insert(it, std::move(x));
  }

  std::size_t size() const { return elems_.size(); }
  bool empty() const { return elems_.empty(); }
  const Rational& operator[](std::size_t i) const { return elems_[i]; }
  const std::vector<Rational>& elements() const { return elems_; }
  const Rational& sum() const { return sum_; }

  bool contains(const Rational& x) const {
    return std::binary_search(elems_.begin(), elems_.end(), x);
  }

  Rational median() const {
    if (elems_.empty()) throw std::domain_error("median: empty multiset");
    std::size_t n = elems_.size();
    if (n % 2 == 1) return elems_[n / 2];
    return (elems_[n / 2 - 1] + elems_[n / 2]) / Rational(2);
  }

  Rational mean() const {
    if (elems_.empty()) throw std::domain_error("mean: empty multiset");
    return sum_ / Rational(static_cast<long>(elems_.size()));
  }

  // The two (even size) or three (odd size) central elements, sorted.
  RationalMultiset core() const {
    if (elems_.size() < 2) throw std::domain_error("core: need at least 2 elements");
    std::size_t n = elems_.size();
    RationalMultiset c;
    if (n % 2 == 0) {
      c.insert(elems_[n / 2 - 1]);
      c.insert(elems_[n / 2]);
    } else {
      c.insert(elems_[n / 2 - 1]);
      c.insert(elems_[n / 2]);
      c.insert(elems_[n / 2 + 1]);
    }
    return c;
  }

  friend bool operator==(const RationalMultiset& a, const RationalMultiset& b) {
    return a.elems_ == b.elems_;
  }

 private:
  std::vector<Rational> elems_;
  Rational sum_;
};

// The new element x_{n+1} = (n+1)·median − n·mean = (n+1)·median − sum.
inline Rational mmm_step(const RationalMultiset& s) {
  if (s.empty()) throw std::domain_error("mmm_step: empty multiset");
  long n = static_cast<long>(s.size());
  return Rational(n + 1) * s.median() - s.sum();
}

// x_n written in terms of the core of the multiset two steps back:
//   n even, core [x_i, x_j]:       x_n = x_{n-1} + (x_j - x_i)
//   n odd,  core [x_i, x_j, x_k]:  x_n = x_{n-1} + n/2 (x_k - x_j) - (n-2)/2 (x_j - x_i)
// Valid on orbits with a non-decreasing median sequence.
inline Rational core_step(const Rational& prev, const RationalMultiset& core_of_n_minus_2,
                          long n) {
  const auto& c = core_of_n_minus_2;
  if (n % 2 == 0) {
    if (c.size() != 2) throw std::domain_error("core_step: even n needs a 2-element core");
    return prev + (c[1] - c[0]);
  }
  if (c.size() != 3) throw std::domain_error("core_step: odd n needs a 3-element core");
  Rational half_n(n, 2), half_nm2(n - 2, 2);
  return prev + half_n * (c[2] - c[1]) - half_nm2 * (c[1] - c[0]);
}

struct OrbitOptions {
  long max_steps = 10'000;
  bool keep_history = false;
  bool keep_medians = false;
};

struct OrbitResult {
  std::optional<Rational> limit;
  std::optional<long> transit_time;
  long steps_taken = 0;
  std::vector<Rational> history;         // generated elements, if requested
  std::vector<Rational> median_history;  // medians from the initial set onward, if requested
};

// Iterates the mean-median map until stabilization or the cap.
//
// Stabilization is declared once two consecutive medians coincide and the
// newly generated element repeats the previous one; two equal consecutive
// medians already force the orbit to be constant from there on. The transit
// time is the first index j (initial elements occupy indices 1..n0 in sorted
// order) with x_j = x_{j+1} = ....
//
// One special case: an initial multiset whose mean equals its median, with
// that common value not among its elements, generates the constant value from
// the start and is reported as stabilized at tau = n0.
inline OrbitResult iterate_until_stable(RationalMultiset s, const OrbitOptions& opt = {}) {
  if (s.empty()) throw std::domain_error("iterate_until_stable: empty multiset");
  if (opt.max_steps < 1) throw std::domain_error("iterate_until_stable: max_steps must be >= 1");

  OrbitResult res;
  const long n0 = static_cast<long>(s.size());
  const std::vector<Rational> initial_sorted = s.elements();

  Rational med = s.median();
  if (opt.keep_medians) res.median_history.push_back(med);
  if (s.size() >= 1 && med == s.mean() && !s.contains(med)) {
    res.limit = med;
    res.transit_time = n0;
    return res;
  }

  std::vector<Rational> generated;
  Rational prev_med = med;
  for (long step = 1; step <= opt.max_steps; ++step) {
    long n = static_cast<long>(s.size());
    Rational x_new = Rational(n + 1) * prev_med - s.sum();
    s.insert(x_new);
    Rational cur_med = s.median();
    generated.push_back(x_new);
    res.steps_taken = step;
    if (opt.keep_medians) res.median_history.push_back(cur_med);

    if (generated.size() >= 2 && cur_med == prev_med &&
        generated[generated.size() - 1] == generated[generated.size() - 2]) {
      const Rational& v = generated.back();
      // Walk the run of v backwards through the generated elements and, if it
      // covers all of them, on into the sorted initial elements.
      long j = static_cast<long>(generated.size());
      while (j > 1 && generated[j - 2] == v) --j;
      long tau = n0 + j;
      if (j == 1) {
        long i = n0;
        while (i >= 1 && initial_sorted[i - 1] == v) --i;
        tau = i + 1;
      }
      res.limit = v;
      res.transit_time = tau;
      break;
    }
    prev_med = cur_med;
  }
  if (opt.keep_history) res.history = std::move(generated);
  return res;
}

}  // namespace mmm

#endif  // MMM_SET_ORBIT_HPP
