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

#ifndef MMM_BUNDLE_HPP
#define MMM_BUNDLE_HPP

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "mmm/piecewise_affine.hpp"
#include "mmm/set_orbit.hpp"

namespace mmm {

// Finite multiset of piecewise-affine functions on a common interval.
// Members are stored in orbit order, duplicates meaning multiplicity; the
// k-th member (1-based) is the function Y_k of the functional orbit.
class Bundle {
 public:
  Bundle() = default;
  explicit Bundle(std::vector<PiecewiseAffine> members) : members_(std::move(members)) {
    if (members_.empty()) throw std::domain_error("Bundle: empty");
    Interval dom = members_.front().domain();
    for (const auto& m : members_)
      if (!(m.domain() == dom)) throw std::domain_error("Bundle: domain mismatch");
  }

  std::size_t size() const { return members_.size(); }
  const std::vector<PiecewiseAffine>& members() const { return members_; }
  const PiecewiseAffine& Y(std::size_t k) const { return members_.at(k - 1); }  // 1-based
  Interval domain() const { return members_.front().domain(); }

  void push_back(PiecewiseAffine f) {
    if (!members_.empty() && !(f.domain() == domain()))
      throw std::domain_error("Bundle: domain mismatch");
    members_.push_back(std::move(f));
  }

  // Values at x, as a multiset.
  RationalMultiset at(const Rational& x) const {
    std::vector<Rational> vals;
    vals.reserve(members_.size());
    for (const auto& m : members_) vals.push_back(m(x));
    return RationalMultiset(std::move(vals));
  }

  Bundle restrict(const Interval& sub) const {
    std::vector<PiecewiseAffine> r;
    r.reserve(members_.size());
    for (const auto& m : members_) r.push_back(m.restrict(sub));
    return Bundle(std::move(r));
  }

  // Number of members identical to f (counting multiplicity).
  int multiplicity_of(const PiecewiseAffine& f) const {
    int c = 0;
    for (const auto& m : members_)
      if (m == f) ++c;
    return c;
  }

 private:
  std::vector<PiecewiseAffine> members_;
};

namespace detail {

// Crossing abscissae and overlap endpoints of a function against each listed
// member, plus the function's own breakpoints; appended to `grid` unsorted.
inline void collect_order_points(const PiecewiseAffine& f,
                                 const std::vector<PiecewiseAffine>& against,
                                 std::vector<Rational>& grid) {
  grid.insert(grid.end(), f.breakpoints().begin(), f.breakpoints().end());
  for (const auto& g : against) {
    if (g == f) continue;
    IntersectionReport rep = intersections(f, g);
    for (const auto& cp : rep.crossings) grid.push_back(cp.x);
    for (const auto& ov : rep.overlaps) {
      grid.push_back(ov.lo);
      grid.push_back(ov.hi);
    }
  }
}

// Refinement grid on which the pointwise order of the members is constant on
// every atom: member breakpoints plus all pairwise crossing abscissae.
inline std::vector<Rational> order_grid(const Bundle& b) {
  std::vector<Rational> grid;
  for (std::size_t i = 0; i < b.size(); ++i) {
    std::vector<PiecewiseAffine> earlier(b.members().begin(),
                                         b.members().begin() + static_cast<long>(i));
    collect_order_points(b.members()[i], earlier, grid);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

// Statistic of the sorted member pieces on each atom of a grid refining the
// order grid. Pieces are ordered by (value at the atom's left endpoint,
// slope): with no crossing inside the atom, a tie at the left endpoint is
// broken by slope and the order is the pointwise order on the interior.
template <typename Select>
PiecewiseAffine pointwise_order_statistic(const Bundle& b, std::vector<Rational> grid,
                                          Select select) {
  std::size_t K = b.size();
  std::vector<AffinePiece> out;
  out.reserve(grid.size() - 1);
  std::vector<std::size_t> cursor(K, 0);
  struct Entry {
    Rational value;  // at atom's left endpoint
    const AffinePiece* piece;
  };
  std::vector<Entry> entries(K);
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const Rational& left = grid[i];
    for (std::size_t k = 0; k < K; ++k) {
      const auto& f = b.members()[k];
      const auto& bps = f.breakpoints();
      while (cursor[k] + 2 < bps.size() && bps[cursor[k] + 1] <= left) ++cursor[k];
      const AffinePiece& p = f.pieces()[cursor[k]];
      entries[k] = {p.at(left), &p};
    }
    auto cmp = [](const Entry& a, const Entry& c) {
      if (a.value != c.value) return a.value < c.value;
      return a.piece->slope < c.piece->slope;
    };
    std::sort(entries.begin(), entries.end(), cmp);
    std::vector<const AffinePiece*> sorted(K);
    for (std::size_t k = 0; k < K; ++k) sorted[k] = entries[k].piece;
    out.push_back(select(sorted));
  }
  return PiecewiseAffine(std::move(grid), std::move(out));
}

inline AffinePiece median_of_sorted(const std::vector<const AffinePiece*>& sorted) {
  std::size_t n = sorted.size();
  if (n % 2 == 1) return *sorted[n / 2];
  const AffinePiece& a = *sorted[n / 2 - 1];
  const AffinePiece& c = *sorted[n / 2];
  return AffinePiece{(a.slope + c.slope) / Rational(2), (a.intercept + c.intercept) / Rational(2)};
}

}  // namespace detail

// Exact pointwise median of the bundle on a precomputed order grid; the grid
// must refine detail::order_grid(b).
inline PiecewiseAffine bundle_median_on_grid(const Bundle& b, std::vector<Rational> grid) {
  if (b.size() == 0) throw std::domain_error("bundle_median: empty bundle");
  return detail::pointwise_order_statistic(b, std::move(grid), detail::median_of_sorted);
}

// Exact pointwise median of the bundle, a continuous piecewise-affine function.
inline PiecewiseAffine bundle_median(const Bundle& b) {
  if (b.size() == 0) throw std::domain_error("bundle_median: empty bundle");
  return bundle_median_on_grid(b, detail::order_grid(b));
}

// Exact pointwise mean; only member breakpoints matter.
inline PiecewiseAffine bundle_mean(const Bundle& b) {
  if (b.size() == 0) throw std::domain_error("bundle_mean: empty bundle");
  Rational inv_n = Rational(1) / Rational(static_cast<long>(b.size()));
  std::vector<std::pair<Rational, const PiecewiseAffine*>> terms;
  terms.reserve(b.size());
  for (const auto& m : b.members()) terms.emplace_back(inv_n, &m);
  return affine_combine(terms);
}

// The function adjoined by the functional map: |Ξ|(M(Ξ) − ⟨Ξ⟩) + M(Ξ).
inline PiecewiseAffine mmm_image(const Bundle& b) {
  if (b.size() == 0) throw std::domain_error("mmm_image: empty bundle");
  PiecewiseAffine med = bundle_median(b);
  PiecewiseAffine mean = bundle_mean(b);
  Rational n(static_cast<long>(b.size()));
  return affine_combine({{n + Rational(1), &med}, {-n, &mean}});
}

// All isolated pairwise equality points between distinct members, in domain
// order, each annotated with every pair that meets there.
struct BundleCrossing {
  Rational x;
  Rational value;
  bool transversal = false;
  std::vector<std::pair<int, int>> pairs;  // 1-based member indices
};

inline std::vector<BundleCrossing> bundle_crossings(const Bundle& b, const Interval& window) {
  std::vector<BundleCrossing> out;
  for (std::size_t i = 0; i < b.size(); ++i) {
    for (std::size_t j = i + 1; j < b.size(); ++j) {
      if (b.members()[i] == b.members()[j]) continue;
      IntersectionReport rep = intersections(b.members()[i], b.members()[j]);
      for (auto& cp : rep.crossings) {
        if (!window.contains(cp.x)) continue;
        auto it = std::find_if(out.begin(), out.end(), [&cp](const BundleCrossing& c) {
          return c.x == cp.x && c.value == cp.value;
        });
        if (it == out.end()) {
          out.push_back({cp.x, cp.value, cp.transversal,
                         {{static_cast<int>(i + 1), static_cast<int>(j + 1)}}});
        } else {
          it->pairs.emplace_back(static_cast<int>(i + 1), static_cast<int>(j + 1));
          it->transversal = it->transversal || cp.transversal;
        }
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const BundleCrossing& a, const BundleCrossing& b2) {
    if (a.x != b2.x) return a.x < b2.x;
    return a.value < b2.value;
  });
  return out;
}

}  // namespace mmm

#endif  // MMM_BUNDLE_HPP
