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

#ifndef MMM_BUNDLE_ORBIT_HPP
#define MMM_BUNDLE_ORBIT_HPP

#include <functional>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mmm/bundle.hpp"
#include "mmm/mobius.hpp"

namespace mmm {

// Sorted disjoint positive-length intervals.
using IntervalSet = std::vector<Interval>;

inline IntervalSet intervals_intersect(const IntervalSet& a, const IntervalSet& b) {
  IntervalSet out;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    Rational lo = max(a[i].lo, b[j].lo);
    Rational hi = min(a[i].hi, b[j].hi);
    if (lo < hi) out.push_back({lo, hi});
    if (a[i].hi < b[j].hi)
      ++i;
    else
      ++j;
  }
  return out;
}

inline IntervalSet intervals_complement(const IntervalSet& a, const Interval& dom) {
  IntervalSet out;
  Rational cur = dom.lo;
  for (const auto& iv : a) {
    if (cur < iv.lo) out.push_back({cur, iv.lo});
    cur = iv.hi;
  }
  if (cur < dom.hi) out.push_back({cur, dom.hi});
  return out;
}

inline IntervalSet equality_intervals(const PiecewiseAffine& a, const PiecewiseAffine& b) {
  return intersections(a, b).overlaps;
}

struct BundleOrbitOptions {
  bool stop_when_stable = true;
  bool keep_medians = true;
  // Abort (with partial results) once the order grid outgrows this; deep
  // hierarchies make exact iteration exponentially expensive, and callers
  // that only need a shallow look can bail out instead.
  std::size_t grid_budget = static_cast<std::size_t>(-1);
};

// The functional orbit: initial functions Y_1..Y_{n0} plus generated ones,
// with the median sequence alongside. The k-th function (1-based) is Y_k.
struct FunctionalOrbit {
  int n0 = 0;
  std::vector<PiecewiseAffine> functions;
  // M_{first_median_n}, ... — all medians when kept, else a rolling pair.
  std::vector<PiecewiseAffine> medians;
  int first_median_n = 0;
  bool stabilized = false;       // whole working interval
  bool budget_exceeded = false;  // iteration aborted by the grid budget

  int size() const { return static_cast<int>(functions.size()); }
  int steps() const { return size() - n0; }
  const PiecewiseAffine& Y(int k) const { return functions.at(static_cast<std::size_t>(k) - 1); }
  bool has_median(int n) const {
    return n >= first_median_n && n - first_median_n < static_cast<int>(medians.size());
  }
  const PiecewiseAffine& median_at(int n) const {
    if (!has_median(n)) throw std::domain_error("median_at: median not retained");
    return medians.at(static_cast<std::size_t>(n - first_median_n));
  }
  Interval domain() const { return functions.front().domain(); }
  Bundle bundle_at(int n) const {
    if (n < n0 || n > size()) throw std::domain_error("bundle_at: index out of range");
    return Bundle(std::vector<PiecewiseAffine>(functions.begin(), functions.begin() + n));
  }
};

// Iterates the functional map for `steps` generated functions (or until the
// whole interval stabilizes). The first step applies the image formula; the
// following ones use the two-median recursion, which is identical.
inline FunctionalOrbit iterate_bundle(const Bundle& initial, int steps,
                                      const BundleOrbitOptions& opt = {}) {
  if (steps < 1) throw std::domain_error("iterate_bundle: steps must be >= 1");
  FunctionalOrbit orb;
  orb.n0 = static_cast<int>(initial.size());
  orb.first_median_n = orb.n0;
  orb.functions = initial.members();

  Bundle bundle = initial;
  // The order grid is maintained incrementally: each new function only adds
  // its own breakpoints and its crossings against the existing members.
  std::vector<Rational> grid = detail::order_grid(bundle);

  PiecewiseAffine med_prev = bundle_median_on_grid(bundle, grid);
  PiecewiseAffine mean0 = bundle_mean(bundle);
  orb.medians.push_back(med_prev);

  auto push_median = [&orb, &opt](PiecewiseAffine m) {
    orb.medians.push_back(std::move(m));
    if (!opt.keep_medians && orb.medians.size() > 2) {
      orb.medians.erase(orb.medians.begin());
      ++orb.first_median_n;
    }
  };

  Rational n_rat(static_cast<long>(orb.n0));
  PiecewiseAffine y_next =
      affine_combine({{n_rat + Rational(1), &med_prev}, {-n_rat, &mean0}});

  for (int s = 1; s <= steps; ++s) {
    std::vector<Rational> fresh;
    detail::collect_order_points(y_next, bundle.members(), fresh);
    std::sort(fresh.begin(), fresh.end());
    fresh.erase(std::unique(fresh.begin(), fresh.end()), fresh.end());
    std::vector<Rational> merged;
    merged.reserve(grid.size() + fresh.size());
    std::merge(grid.begin(), grid.end(), fresh.begin(), fresh.end(), std::back_inserter(merged));
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
    grid = std::move(merged);
    if (grid.size() > opt.grid_budget) {
      orb.budget_exceeded = true;
      return orb;
    }

    bundle.push_back(y_next);
    orb.functions.push_back(y_next);
    PiecewiseAffine med_cur = bundle_median_on_grid(bundle, grid);
    push_median(med_cur);

    if (s >= 2 && med_cur == med_prev &&
        orb.functions[orb.functions.size() - 1] == orb.functions[orb.functions.size() - 2]) {
      orb.stabilized = true;
      if (opt.stop_when_stable) return orb;
    }
    if (s == steps) break;

    long n = orb.n0 + s;
    y_next = affine_combine(
        {{Rational(n + 1), &med_cur}, {Rational(-n), &med_prev}});
    med_prev = std::move(med_cur);
  }
  return orb;
}

struct TauAtom {
  Interval iv;
  long tau;
};

struct StabilizationAtom {
  Interval iv;
  bool resolved = false;
  std::optional<PiecewiseAffine> limit;  // restriction of the limit to iv
  std::vector<TauAtom> tau;              // staircase on iv (resolved only)
  int steps_exhausted = 0;
};

struct StabilizationMap {
  std::vector<StabilizationAtom> atoms;  // partition of the domain, in order
  bool fully_resolved = false;

  const StabilizationAtom* atom_containing(const Rational& x) const {
    for (const auto& a : atoms)
      if (a.iv.contains(x)) return &a;
    return nullptr;
  }
};

namespace detail {

// tau labels on the resolved region: the smallest generated index starting a
// run of identical functions that persists to the end of the orbit.
inline std::vector<TauAtom> tau_labels(const FunctionalOrbit& orb, const IntervalSet& resolved) {
  std::vector<TauAtom> labels;
  int N = orb.size();
  IntervalSet cur = resolved;
  for (int j = N - 1; j >= orb.n0 + 1 && !cur.empty(); --j) {
    IntervalSet next =
        intervals_intersect(cur, equality_intervals(orb.Y(j), orb.Y(j + 1)));
    // points in cur but not next have their run starting at j+1
    for (const auto& iv : cur) {
      Rational pos = iv.lo;
      for (const auto& kept : next) {
        if (kept.lo > iv.hi || kept.hi < iv.lo) continue;
        if (pos < kept.lo) labels.push_back({{pos, kept.lo}, j + 1});
        pos = kept.hi;
      }
      if (pos < iv.hi) labels.push_back({{pos, iv.hi}, j + 1});
    }
    cur = std::move(next);
  }
  for (const auto& iv : cur) labels.push_back({iv, orb.n0 + 1});
  std::sort(labels.begin(), labels.end(),
            [](const TauAtom& a, const TauAtom& b) { return a.iv.lo < b.iv.lo; });
  return labels;
}

}  // namespace detail

// Splits the working interval into resolved atoms (two identical consecutive
// generated functions and an identical median pair, hence constant forever)
// and unresolved remainder.
inline StabilizationMap stabilization_map(const FunctionalOrbit& orb) {
  StabilizationMap map;
  Interval dom = orb.domain();
  int N = orb.size();
  if (orb.steps() < 2 || !orb.has_median(N) || !orb.has_median(N - 1)) {
    map.atoms.push_back({dom, false, std::nullopt, {}, orb.steps()});
    return map;
  }

  IntervalSet resolved =
      intervals_intersect(equality_intervals(orb.Y(N - 1), orb.Y(N)),
                          equality_intervals(orb.median_at(N - 1), orb.median_at(N)));

  std::vector<TauAtom> labels = detail::tau_labels(orb, resolved);

  map.fully_resolved = resolved.size() == 1 && resolved.front() == dom;
  IntervalSet gaps = intervals_complement(resolved, dom);
  std::size_t ri = 0, gi = 0;
  while (ri < resolved.size() || gi < gaps.size()) {
    bool take_resolved =
        gi >= gaps.size() || (ri < resolved.size() && resolved[ri].lo <= gaps[gi].lo);
    if (take_resolved) {
      StabilizationAtom a;
      a.iv = resolved[ri];
      a.resolved = true;
      a.limit = orb.Y(N).restrict(a.iv);
      for (const auto& t : labels) {
        Rational lo = max(t.iv.lo, a.iv.lo), hi = min(t.iv.hi, a.iv.hi);
        if (lo < hi) a.tau.push_back({{lo, hi}, t.tau});
      }
      map.atoms.push_back(std::move(a));
      ++ri;
    } else {
      map.atoms.push_back({gaps[gi], false, std::nullopt, {}, orb.steps()});
      ++gi;
    }
  }
  return map;
}

struct LimitResult {
  StabilizationMap map;
  // The stabilized function over the whole interval when fully resolved.
  std::optional<PiecewiseAffine> limit;
};

inline LimitResult limit_function(const Bundle& initial, const Interval& interval, int n_max) {
  Bundle local = initial.domain() == interval ? initial : initial.restrict(interval);
  FunctionalOrbit orb = iterate_bundle(local, n_max);
  LimitResult res;
  res.map = stabilization_map(orb);
  if (res.map.fully_resolved) res.limit = orb.Y(orb.size());
  return res;
}

// The transit-time staircase over the resolved region.
inline std::vector<TauAtom> transit_time_function(const Bundle& initial, const Interval& interval,
                                                  int n_max) {
  Bundle local = initial.domain() == interval ? initial : initial.restrict(interval);
  FunctionalOrbit orb = iterate_bundle(local, n_max);
  StabilizationMap map = stabilization_map(orb);
  std::vector<TauAtom> out;
  for (const auto& a : map.atoms)
    out.insert(out.end(), a.tau.begin(), a.tau.end());
  return out;
}

// Affine-in-z map whose coefficients may depend on the abscissa x.
struct ParametricAffine {
  std::function<AffineMap(const Rational&)> at;

  static ParametricAffine constant(const AffineMap& f) {
    return {[f](const Rational&) { return f; }};
  }
};

// Checks f(B(x)) = A(mu(x)) as value multisets at every sample.
inline bool check_equivalence(const Bundle& a, const Bundle& b, const Mobius& mu,
                              const ParametricAffine& f, const std::vector<Rational>& samples) {
  if (a.size() != b.size()) return false;
  for (const auto& x : samples) {
    if (mu.has_pole_at(x)) throw std::domain_error("check_equivalence: pole at sample " + x.str());
    Rational mx = mu(x);
    AffineMap fx = f.at(x);
    std::vector<Rational> lhs, rhs;
    for (const auto& m : b.members()) lhs.push_back(fx(m(x)));
    for (const auto& m : a.members()) rhs.push_back(m(mx));
    std::sort(lhs.begin(), lhs.end());
    std::sort(rhs.begin(), rhs.end());
    if (lhs != rhs) return false;
  }
  return true;
}

struct InitialConditionsReport {
  // i) the bundle is the image of another bundle away from isolated points
  bool is_image = false;               // heuristic, see below
  std::vector<int> image_preimages;    // 1-based members Y with M(Xi \ [Y]) == Y somewhere
  // ii) intervals where the median coincides with the mean
  std::vector<Interval> median_equals_mean;
  // iii) all members are lines through one projective point
  bool lines_concurrent = false;

  bool pass() const { return !is_image && median_equals_mean.empty() && !lines_concurrent; }
};

// Validity screening of an initial bundle. The preimage test is a heuristic:
// it removes one copy of each member in turn and asks whether the remaining
// bundle maps onto it identically on some subinterval.
inline InitialConditionsReport check_initial_conditions(const Bundle& b) {
  InitialConditionsReport rep;

  if (b.size() >= 2) {
    for (std::size_t drop = 0; drop < b.size(); ++drop) {
      std::vector<PiecewiseAffine> rest;
      for (std::size_t i = 0; i < b.size(); ++i)
        if (i != drop) rest.push_back(b.members()[i]);
      Bundle sub(std::move(rest));
      PiecewiseAffine img = mmm_image(sub);
      if (!equality_intervals(img, b.members()[drop]).empty()) {
        rep.is_image = true;
        rep.image_preimages.push_back(static_cast<int>(drop + 1));
      }
    }
  }

  PiecewiseAffine med = bundle_median(b);
  PiecewiseAffine mean = bundle_mean(b);
  rep.median_equals_mean = equality_intervals(med, mean);

  bool all_lines = true;
  for (const auto& m : b.members())
    if (!m.is_affine()) all_lines = false;
  if (all_lines && b.size() >= 2) {
    // Two distinct lines fix the candidate point (finite or at infinity);
    // parallels are concurrent at infinity.
    const auto& ms = b.members();
    std::size_t second = 1;
    while (second < ms.size() && ms[second].pieces()[0] == ms[0].pieces()[0]) ++second;
    if (second == ms.size()) {
      rep.lines_concurrent = true;  // all copies of one line
    } else {
      const AffinePiece& p = ms[0].pieces()[0];
      const AffinePiece& q = ms[second].pieces()[0];
      bool concurrent = true;
      if (p.slope == q.slope) {
        // parallel: candidate point at infinity in direction of common slope
        for (const auto& m : ms)
          if (m.pieces()[0].slope != p.slope) concurrent = false;
      } else {
        Rational x0 = *affine_crossing(p, q);
        Rational y0 = p.at(x0);
        for (const auto& m : ms)
          if (m.pieces()[0].at(x0) != y0) concurrent = false;
      }
      rep.lines_concurrent = concurrent;
    }
  }
  return rep;
}

}  // namespace mmm

#endif  // MMM_BUNDLE_ORBIT_HPP
