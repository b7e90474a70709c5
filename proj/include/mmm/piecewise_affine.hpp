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

#ifndef MMM_PIECEWISE_AFFINE_HPP
#define MMM_PIECEWISE_AFFINE_HPP

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mmm/rational.hpp"

namespace mmm {

struct Interval {
  Rational lo, hi;

  bool contains(const Rational& x) const { return lo <= x && x <= hi; }
  bool contains_interior(const Rational& x) const { return lo < x && x < hi; }
  Rational length() const { return hi - lo; }
  Rational midpoint() const { return (lo + hi) / Rational(2); }
  friend bool operator==(const Interval&, const Interval&) = default;
};

inline Interval make_interval(const Rational& lo, const Rational& hi) {
  if (hi < lo) throw std::domain_error("Interval: hi < lo");
  return {lo, hi};
}

struct AffinePiece {
  Rational slope;
  Rational intercept;

  Rational at(const Rational& x) const { return slope * x + intercept; }
  friend bool operator==(const AffinePiece&, const AffinePiece&) = default;

  // Through two points with distinct abscissae.
  static AffinePiece through(const Rational& x0, const Rational& y0, const Rational& x1,
                             const Rational& y1) {
    if (x0 == x1) throw std::domain_error("AffinePiece::through: equal abscissae");
    Rational s = (y1 - y0) / (x1 - x0);
    return {s, y0 - s * x0};
  }
};

// Abscissa where two affine pieces agree, if unique.
inline std::optional<Rational> affine_crossing(const AffinePiece& a, const AffinePiece& b) {
  if (a.slope == b.slope) return std::nullopt;
  return (b.intercept - a.intercept) / (a.slope - b.slope);
}

// Exact continuous piecewise-affine function on a closed rational interval.
// Canonical form: strictly increasing breakpoints b0 < ... < bk with one
// affine piece per [b_{i-1}, b_i], adjacent pieces never identical, pieces
// agreeing exactly at shared breakpoints. Equality of canonical forms is
// representation equality.
class PiecewiseAffine {
 public:
  PiecewiseAffine(std::vector<Rational> breakpoints, std::vector<AffinePiece> pieces)
      : breakpoints_(std::move(breakpoints)), pieces_(std::move(pieces)) {
    validate();
    canonicalize();
  }

  static PiecewiseAffine affine(const Interval& dom, const Rational& slope,
                                const Rational& intercept) {
    if (!(dom.lo < dom.hi)) throw std::domain_error("PiecewiseAffine: empty domain");
    return PiecewiseAffine({dom.lo, dom.hi}, {AffinePiece{slope, intercept}});
  }

  static PiecewiseAffine constant(const Interval& dom, const Rational& value) {
    return affine(dom, Rational(0), value);
  }

  Interval domain() const { return {breakpoints_.front(), breakpoints_.back()}; }
  const std::vector<Rational>& breakpoints() const { return breakpoints_; }
  const std::vector<AffinePiece>& pieces() const { return pieces_; }
  std::size_t piece_count() const { return pieces_.size(); }
  bool is_affine() const { return pieces_.size() == 1; }

  // Interior breakpoints; in canonical form each is a genuine corner.
  std::vector<Rational> corners() const {
    return {breakpoints_.begin() + 1, breakpoints_.end() - 1};
  }

  Rational operator()(const Rational& x) const { return pieces_[piece_index(x)].at(x); }

  // Index of a piece containing x; at interior breakpoints both neighbours
  // agree, so either index is fine.
  std::size_t piece_index(const Rational& x) const {
    if (!domain().contains(x))
      throw std::domain_error("PiecewiseAffine: " + x.str() + " outside domain");
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
    std::size_t i = static_cast<std::size_t>(it - breakpoints_.begin());
    if (i == 0) return 0;
    if (i >= breakpoints_.size()) return pieces_.size() - 1;
    return i - 1;
  }

  // The affine piece governing the side of x: the piece on [x, ...) for the
  // right side, on (..., x] for the left.
  const AffinePiece& piece_right_of(const Rational& x) const {
    if (x == breakpoints_.back())
      throw std::domain_error("piece_right_of: at right domain end");
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
    return pieces_[static_cast<std::size_t>(it - breakpoints_.begin()) - (x < *it ? 1 : 0)];
  }
  const AffinePiece& piece_left_of(const Rational& x) const {
    if (x == breakpoints_.front())
      throw std::domain_error("piece_left_of: at left domain end");
    auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), x);
    return pieces_[static_cast<std::size_t>(it - breakpoints_.begin()) - 1];
  }

  PiecewiseAffine restrict(const Interval& sub) const {
    if (!(domain().lo <= sub.lo && sub.hi <= domain().hi) || !(sub.lo < sub.hi))
      throw std::domain_error("PiecewiseAffine::restrict: bad subinterval");
    std::vector<Rational> bps;
    std::vector<AffinePiece> ps;
    bps.push_back(sub.lo);
    std::size_t i = piece_index(sub.lo);
    for (; i < pieces_.size(); ++i) {
      const Rational& end = breakpoints_[i + 1];
      if (end >= sub.hi) {
        bps.push_back(sub.hi);
        ps.push_back(pieces_[i]);
        break;
      }
      bps.push_back(end);
      ps.push_back(pieces_[i]);
    }
    return PiecewiseAffine(std::move(bps), std::move(ps));
  }

  friend bool operator==(const PiecewiseAffine& a, const PiecewiseAffine& b) {
    return a.breakpoints_ == b.breakpoints_ && a.pieces_ == b.pieces_;
  }

 private:
  void validate() const {
    if (breakpoints_.size() < 2 || pieces_.size() + 1 != breakpoints_.size())
      throw std::domain_error("PiecewiseAffine: breakpoint/piece count mismatch");
    for (std::size_t i = 1; i < breakpoints_.size(); ++i)
      if (!(breakpoints_[i - 1] < breakpoints_[i]))
        throw std::domain_error("PiecewiseAffine: breakpoints not increasing");
    for (std::size_t i = 1; i < pieces_.size(); ++i)
      if (pieces_[i - 1].at(breakpoints_[i]) != pieces_[i].at(breakpoints_[i]))
        throw std::domain_error("PiecewiseAffine: discontinuity at " + breakpoints_[i].str());
  }

  void canonicalize() {
    std::vector<Rational> bps;
    std::vector<AffinePiece> ps;
    bps.reserve(breakpoints_.size());
    ps.reserve(pieces_.size());
    bps.push_back(breakpoints_.front());
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      if (!ps.empty() && ps.back() == pieces_[i]) {
        bps.back() = breakpoints_[i + 1];
        continue;
      }
      ps.push_back(pieces_[i]);
      bps.push_back(breakpoints_[i + 1]);
    }
    breakpoints_ = std::move(bps);
    pieces_ = std::move(ps);
  }

  std::vector<Rational> breakpoints_;
  std::vector<AffinePiece> pieces_;
};

inline bool pwa_equal(const PiecewiseAffine& a, const PiecewiseAffine& b) { return a == b; }

namespace detail {

// Union of the functions' interior breakpoints plus domain ends, sorted unique.
inline std::vector<Rational> merged_grid(const std::vector<const PiecewiseAffine*>& fns) {
  Interval dom = fns.front()->domain();
  for (const auto* f : fns)
    if (!(f->domain() == dom)) throw std::domain_error("piecewise ops: domain mismatch");
  std::vector<Rational> grid;
  for (const auto* f : fns)
    grid.insert(grid.end(), f->breakpoints().begin(), f->breakpoints().end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

}  // namespace detail

// Exact linear combination sum_i coeff_i * f_i on a shared domain.
inline PiecewiseAffine affine_combine(
    const std::vector<std::pair<Rational, const PiecewiseAffine*>>& terms) {
  if (terms.empty()) throw std::domain_error("affine_combine: no terms");
  std::vector<const PiecewiseAffine*> fns;
  fns.reserve(terms.size());
  for (const auto& [c, f] : terms) fns.push_back(f);
  std::vector<Rational> grid = detail::merged_grid(fns);
  std::vector<AffinePiece> ps;
  ps.reserve(grid.size() - 1);
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    Rational mid = (grid[i] + grid[i + 1]) / Rational(2);
    AffinePiece acc{Rational(0), Rational(0)};
    for (const auto& [c, f] : terms) {
      const AffinePiece& p = f->pieces()[f->piece_index(mid)];
      acc.slope += c * p.slope;
      acc.intercept += c * p.intercept;
    }
    ps.push_back(std::move(acc));
  }
  return PiecewiseAffine(std::move(grid), std::move(ps));
}

enum class ConcatMode { Upper, Lower };

// Pointwise max (Upper) or min (Lower) of two functions on a shared domain.
inline PiecewiseAffine concatenate(const PiecewiseAffine& y, const PiecewiseAffine& z,
                                   ConcatMode mode) {
  std::vector<Rational> grid = detail::merged_grid({&y, &z});
  std::vector<Rational> bps{grid.front()};
  std::vector<AffinePiece> ps;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    Rational mid = (grid[i] + grid[i + 1]) / Rational(2);
    AffinePiece a = y.pieces()[y.piece_index(mid)];
    AffinePiece b = z.pieces()[z.piece_index(mid)];
    auto cross = affine_crossing(a, b);
    if (cross && grid[i] < *cross && *cross < grid[i + 1]) {
      // The envelope switches inside this atom.
      bool a_first;
      if (mode == ConcatMode::Upper)
        a_first = a.at(grid[i]) > b.at(grid[i]);
      else
        a_first = a.at(grid[i]) < b.at(grid[i]);
      ps.push_back(a_first ? a : b);
      bps.push_back(*cross);
      ps.push_back(a_first ? b : a);
      bps.push_back(grid[i + 1]);
    } else {
      Rational va = a.at(mid), vb = b.at(mid);
      bool take_a = (mode == ConcatMode::Upper) ? !(va < vb) : !(vb < va);
      ps.push_back(take_a ? a : b);
      bps.push_back(grid[i + 1]);
    }
  }
  return PiecewiseAffine(std::move(bps), std::move(ps));
}

struct CrossingPoint {
  Rational x;
  Rational value;
  bool transversal = false;
  int sign_left = 0;   // sign of (first - second) just left of x; 0 at a domain end
  int sign_right = 0;  // likewise just right of x
};

struct IntersectionReport {
  std::vector<CrossingPoint> crossings;  // isolated equality points
  std::vector<Interval> overlaps;        // maximal intervals of identical values
};

// All equality points of two functions on their shared domain. Isolated
// points come back as crossings with transversality decided by the sign
// change of the difference; stretches of identity come back as overlap
// intervals (their endpoints are not crossings).
inline IntersectionReport intersections(const PiecewiseAffine& y, const PiecewiseAffine& z) {
  PiecewiseAffine diff = affine_combine({{Rational(1), &y}, {Rational(-1), &z}});
  IntersectionReport rep;

  const auto& bps = diff.breakpoints();
  const auto& ps = diff.pieces();

  // Collect overlap atoms (identically zero pieces) as maximal runs.
  std::optional<Interval> run;
  std::vector<char> is_zero(ps.size(), 0);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (ps[i].slope.is_zero() && ps[i].intercept.is_zero()) {
      is_zero[i] = 1;
      if (run)
        run->hi = bps[i + 1];
      else
        run = Interval{bps[i], bps[i + 1]};
    } else if (run) {
      rep.overlaps.push_back(*run);
      run.reset();
    }
  }
  if (run) rep.overlaps.push_back(*run);

  auto in_overlap = [&rep](const Rational& x) {
    for (const auto& iv : rep.overlaps)
      if (iv.contains(x)) return true;
    return false;
  };

  // Zeros of the difference, atom by atom; dedupe shared endpoints.
  std::vector<Rational> zeros;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (is_zero[i]) continue;
    const auto& p = ps[i];
    if (p.slope.is_zero()) continue;  // nonzero constant
    Rational root = -p.intercept / p.slope;
    if (bps[i] <= root && root <= bps[i + 1]) zeros.push_back(root);
  }
  std::sort(zeros.begin(), zeros.end());
  zeros.erase(std::unique(zeros.begin(), zeros.end()), zeros.end());

  // An adjacent piece of a surviving zero vanishes at x but is not
  // identically zero, so the sign next to x is read off its slope.
  Interval dom = diff.domain();
  for (const auto& x : zeros) {
    if (in_overlap(x)) continue;
    CrossingPoint cp;
    cp.x = x;
    cp.value = y(x);
    if (x > dom.lo) cp.sign_left = (-diff.piece_left_of(x).slope).sign();
    if (x < dom.hi) cp.sign_right = diff.piece_right_of(x).slope.sign();
    cp.transversal = (cp.sign_left * cp.sign_right == -1);
    rep.crossings.push_back(std::move(cp));
  }
  return rep;
}

}  // namespace mmm

#endif  // MMM_PIECEWISE_AFFINE_HPP
