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

#ifndef MMM_XPOINT_HPP
#define MMM_XPOINT_HPP

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mmm/bundle_orbit.hpp"
#include "mmm/normal_form.hpp"

namespace mmm {

enum class Side { Left, Right };
enum class MedianTrend { NonDecreasing, NonIncreasing, Reversing, Indeterminate };
enum class TriadKind { Triad, Pseudotriad };

// An initial bundle on a master interval. Local analyses restrict it; scalar
// orbits evaluate it pointwise.
class System {
 public:
  explicit System(Bundle master) : master_(std::move(master)) {}

  const Bundle& master() const { return master_; }
  Interval domain() const { return master_.domain(); }
  RationalMultiset at(const Rational& x) const { return master_.at(x); }
  Bundle on(const Interval& iv) const { return master_.restrict(iv); }

  // The system seen through x -> 2p - x; analyses of the left side of p run
  // the right-side machinery on the reflection.
  System reflected_about(const Rational& p) const {
    std::vector<PiecewiseAffine> members;
    members.reserve(master_.size());
    for (const auto& m : master_.members()) members.push_back(reflect(m, p));
    return System(Bundle(std::move(members)));
  }

  static PiecewiseAffine reflect(const PiecewiseAffine& f, const Rational& p) {
    const auto& bps = f.breakpoints();
    const auto& ps = f.pieces();
    std::vector<Rational> rb;
    std::vector<AffinePiece> rp;
    rb.reserve(bps.size());
    rp.reserve(ps.size());
    for (auto it = bps.rbegin(); it != bps.rend(); ++it) rb.push_back(Rational(2) * p - *it);
    for (auto it = ps.rbegin(); it != ps.rend(); ++it)
      rp.push_back({-it->slope, it->intercept + Rational(2) * p * it->slope});
    return PiecewiseAffine(std::move(rb), std::move(rp));
  }

 private:
  Bundle master_;
};

// Affine branches of a triad around an X-point: J < I < K to the right; the
// primed triple governs the left (J' < I' < K' for triads, K' < I' < J' for
// pseudotriads).
struct TriadBranches {
  Rational p;
  AffinePiece I, J, K;
  AffinePiece Ip, Jp, Kp;
};

// The Mobius/affine pair induced by a triad; f depends on x through the
// branches, so it is kept parametric.
struct TriadSymmetry {
  Mobius mu;
  TriadBranches branches;

  AffineMap f_at(const Rational& x) const {
    Rational mx = mu(x);
    Rational denom = branches.K.at(x) - branches.I.at(x);
    if (denom.is_zero()) throw std::domain_error("TriadSymmetry: K(x) = I(x) at sample");
    Rational a = (branches.Kp.at(mx) - branches.Ip.at(mx)) / denom;
    Rational b =
        (branches.K.at(x) * branches.Ip.at(mx) - branches.I.at(x) * branches.Kp.at(mx)) / denom;
    return {a, b};
  }

  ParametricAffine f() const {
    TriadSymmetry self = *this;
    return {[self](const Rational& x) { return self.f_at(x); }};
  }

  TriadSymmetry inverse() const {
    TriadBranches swapped = branches;
    std::swap(swapped.I, swapped.Ip);
    std::swap(swapped.J, swapped.Jp);
    std::swap(swapped.K, swapped.Kp);
    return {mu.inverse(), swapped};
  }
};

namespace detail {

inline Mobius affine_ratio(const AffinePiece& num, const AffinePiece& den) {
  return Mobius(num.slope, num.intercept, den.slope, den.intercept);
}

}  // namespace detail

// The self-equivalence pair of a (pseudo)triad. The unprimed branches hold to
// the right of p, the primed ones to the left; I, J, I', J' pass through the
// crossing point, K and K' avoid it.
inline TriadSymmetry triad_symmetry(const TriadBranches& br, TriadKind kind) {
  const Rational& p = br.p;
  Rational v = br.I.at(p);
  if (br.J.at(p) != v || br.Ip.at(p) != v || br.Jp.at(p) != v)
    throw std::domain_error("triad_symmetry: I, J, I', J' must be concurrent at p");
  if (br.K.at(p) == v || br.Kp.at(p) == v)
    throw std::domain_error("triad_symmetry: auxiliary branch passes through the X-point");
  if (br.I == br.J || br.Ip == br.Jp)
    throw std::domain_error("triad_symmetry: degenerate pair");
  // orderings near p: J < I < K on the right
  if (!(br.J.slope < br.I.slope) || !(v < br.K.at(p)))
    throw std::domain_error("triad_symmetry: expected J < I < K just right of p");
  if (kind == TriadKind::Triad) {
    if (!(br.Jp.slope > br.Ip.slope) || !(v < br.Kp.at(p)))
      throw std::domain_error("triad_symmetry: expected J' < I' < K' just left of p");
  } else {
    if (!(br.Jp.slope < br.Ip.slope) || !(br.Kp.at(p) < v))
      throw std::domain_error("triad_symmetry: expected K' < I' < J' just left of p");
  }

  AffinePiece KmI{br.K.slope - br.I.slope, br.K.intercept - br.I.intercept};
  AffinePiece KmJ{br.K.slope - br.J.slope, br.K.intercept - br.J.intercept};
  AffinePiece KpmIp{br.Kp.slope - br.Ip.slope, br.Kp.intercept - br.Ip.intercept};
  AffinePiece KpmJp{br.Kp.slope - br.Jp.slope, br.Kp.intercept - br.Jp.intercept};
  Mobius mu = detail::affine_ratio(KpmIp, KpmJp).inverse().compose(
      detail::affine_ratio(KmI, KmJ));
  return {mu, br};
}

// Harmonic involution with finite fixed points p and q, its centre at (q, r):
// mu(x) = (T x - 2D)/(2x - T) with T = p+q, D = pq, and
// f(z) = ((mu(x)-q)/(x-q)) z + ((x-mu(x))/(x-q)) r.
struct HarmonicSymmetry {
  Mobius mu;
  ParametricAffine f;
};

inline HarmonicSymmetry harmonic_symmetry(const Rational& p, const Rational& q,
                                          const Rational& r) {
  if (p == q) throw std::domain_error("harmonic_symmetry: coincident fixed points");
  Rational T = p + q, D = p * q;
  Mobius mu(T, Rational(-2) * D, Rational(2), -T);
  ParametricAffine f{[mu, q, r](const Rational& x) {
    Rational mx = mu(x);
    Rational d = x - q;
    if (d.is_zero()) throw std::domain_error("harmonic_symmetry: sample at the centre");
    return AffineMap{(mx - q) / d, (x - mx) / d * r};
  }};
  return {mu, f};
}

// Limit form with the second fixed point at infinity: the point reflection
// through (p, r), mu(x) = 2p - x and f(z) = 2r - z.
inline HarmonicSymmetry harmonic_symmetry_centre_at_infinity(const Rational& p,
                                                             const Rational& r) {
  Mobius mu = Mobius::affine(Rational(-1), Rational(2) * p);
  return {mu, ParametricAffine::constant({Rational(-1), Rational(2) * r})};
}

struct Tractability {
  bool tractable = false;
  long index = 0;           // smallest odd l >= tau(p) passing T1-T3
  Interval domain{};        // (p, p_*), in the side's own coordinates
  // diagnostics of the decisive candidate when not tractable
  long candidate = 0;
  std::string failed_condition;  // "T1", "T2", "T3"
  std::optional<Rational> t2_violation;          // aux crossing inside T
  std::optional<std::pair<Rational, Rational>> t3_corner;  // (x, value)
};

struct AuxTerm {
  long n;
  std::optional<Rational> p;  // absent while the regularity radius is unbounded
  Rational q;
  int flow_case = 0;  // 1..6
};

struct AuxiliarySequence {
  long ell = 0;
  std::vector<AuxTerm> terms;
  std::vector<Rational> distinct_xpoints;  // finite distinct p-values, first-appearance order
  std::vector<long> distinct_tau;          // scalar transit times of those points
  bool stabilized = false;
  std::optional<AffinePiece> stabilized_line;  // the function the orbit settles at near p
  std::optional<Rational> limit_p;             // where that function meets the auxiliary
};

struct DichotomyResult {
  enum class Kind { Continuous, DiscontinuousSuspected, Unresolved } kind;
  std::optional<Rational> p_inf;
  std::optional<AffinePiece> connector;  // line from (p, m(p)) to the auxiliary
  int probes_used = 0;
};

struct XPointRecord {
  Rational p;
  Rational value;
  std::pair<int, int> pair{0, 0};
  std::vector<std::pair<int, int>> all_pairs;
  bool transversal = false;

  bool classified = false;
  std::string classify_error;
  bool stabilising = false, regular = false, proper = false, active = false;
  MedianTrend trend = MedianTrend::Indeterminate;
  std::optional<long> tau;
  std::optional<Rational> m_at_p;
  int y_set_size = 0;
  std::optional<AffinePiece> aux_right, aux_left;  // germs of min Y_p per side
  std::optional<int> aux_right_index, aux_left_index;  // 1-based orbit index
  std::optional<int> left_rank, right_rank;
  std::optional<TriadSymmetry> symmetry;
  std::optional<Interval> neighborhood;
};

struct AnalyzerOptions {
  long scalar_cap = 10'000;
  int tract_span = 14;     // candidates l in [tau, tau + span]
  int dichotomy_retries = 8;
};

// ---------------------------------------------------------------------------
// Geometric stage

inline std::vector<XPointRecord> find_xpoints(const Bundle& b, const Interval& window) {
  std::vector<XPointRecord> out;
  for (const auto& c : bundle_crossings(b, window)) {
    if (!c.transversal) continue;
    XPointRecord rec;
    rec.p = c.x;
    rec.value = c.value;
    rec.pair = c.pairs.front();
    rec.all_pairs = c.pairs;
    rec.transversal = true;
    out.push_back(std::move(rec));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Classification

namespace detail {

// Sign of an affine germ just right of p when it vanishes at p, or of its
// value there otherwise.
inline int germ_sign_right(const AffinePiece& g, const Rational& p) {
  Rational v = g.at(p);
  if (!v.is_zero()) return v.sign();
  return g.slope.sign();
}
inline int germ_sign_left(const AffinePiece& g, const Rational& p) {
  Rational v = g.at(p);
  if (!v.is_zero()) return v.sign();
  return (-g.slope).sign();
}

struct LocalOrbit {
  FunctionalOrbit orbit;
  Interval window;
  int tB = 0;
};

// Orbit of the system on a window around p, long enough for classification.
inline LocalOrbit local_orbit_around(const System& sys, const Rational& p, int upto,
                                     Rational radius_hint = Rational(0)) {
  Interval dom = sys.domain();
  if (!(dom.lo < p && p < dom.hi))
    throw std::domain_error("local orbit: p must be interior to the master domain");
  Rational radius = min(p - dom.lo, dom.hi - p);
  if (!radius_hint.is_zero()) radius = min(radius, radius_hint);
  LocalOrbit loc;
  loc.window = {p - radius, p + radius};
  int n0 = static_cast<int>(sys.master().size());
  loc.tB = std::max(upto, n0);
  int steps = std::max(1, loc.tB - n0);
  loc.orbit = iterate_bundle(sys.on(loc.window), steps, {.stop_when_stable = false});
  return loc;
}

}  // namespace detail

// Fills the classification flags of a geometric record: scalar facts, the
// taxonomy, the y-set, per-side auxiliaries and ranks, and the triad symmetry
// where one applies.
inline void classify_xpoint(const System& sys, XPointRecord& rec,
                            const AnalyzerOptions& opt = {}) {
  OrbitOptions sopt;
  sopt.max_steps = opt.scalar_cap;
  OrbitResult scalar = iterate_until_stable(sys.at(rec.p), sopt);
  if (!scalar.limit.has_value()) {
    rec.classify_error = "unclassifiable: cap exceeded";
    return;
  }
  rec.stabilising = true;
  rec.tau = scalar.transit_time;
  rec.m_at_p = scalar.limit;

  int n0 = static_cast<int>(sys.master().size());
  int pair_max = std::max(rec.pair.first, rec.pair.second);
  for (const auto& pr : rec.all_pairs) pair_max = std::max({pair_max, pr.first, pr.second});
  int tB = std::max({static_cast<int>(*rec.tau) - 1, pair_max, n0});
  // a few extra steps so the median trend has evidence even when tB == n0
  detail::LocalOrbit loc = detail::local_orbit_around(sys, rec.p, tB + 4);

  const Rational& p = rec.p;
  const Rational v = rec.value;
  const Rational m_p = *rec.m_at_p;

  // regular: the crossing pair is affine at p
  auto germ_pair = [&](int k) {
    const PiecewiseAffine& f = loc.orbit.Y(k);
    return std::pair<AffinePiece, AffinePiece>(f.piece_left_of(p), f.piece_right_of(p));
  };
  auto [i_left, i_right] = germ_pair(rec.pair.first);
  auto [j_left, j_right] = germ_pair(rec.pair.second);
  rec.regular = (i_left == i_right) && (j_left == j_right);

  // median trend per side
  bool any_up_r = false, any_down_r = false, any_up_l = false, any_down_l = false;
  for (int n = loc.orbit.n0; n < loc.orbit.size(); ++n) {
    const PiecewiseAffine& m1 = loc.orbit.median_at(n + 1);
    const PiecewiseAffine& m0 = loc.orbit.median_at(n);
    AffinePiece dr{m1.piece_right_of(p).slope - m0.piece_right_of(p).slope,
                   m1.piece_right_of(p).intercept - m0.piece_right_of(p).intercept};
    AffinePiece dl{m1.piece_left_of(p).slope - m0.piece_left_of(p).slope,
                   m1.piece_left_of(p).intercept - m0.piece_left_of(p).intercept};
    int sr = detail::germ_sign_right(dr, p);
    int sl = detail::germ_sign_left(dl, p);
    if (sr > 0) any_up_r = true;
    if (sr < 0) any_down_r = true;
    if (sl > 0) any_up_l = true;
    if (sl < 0) any_down_l = true;
  }
  bool right_up = !any_down_r, right_down = !any_up_r;
  bool left_up = !any_down_l, left_down = !any_up_l;
  if (right_up && left_up)
    rec.trend = MedianTrend::NonDecreasing;
  else if (right_down && left_down)
    rec.trend = MedianTrend::NonIncreasing;
  else if ((right_up && left_down) || (right_down && left_up))
    rec.trend = MedianTrend::Reversing;
  else
    rec.trend = MedianTrend::Indeterminate;

  // proper: exactly one germ-distinct pair crossing transversally at (p, v),
  // both of multiplicity one
  {
    std::vector<std::pair<AffinePiece, AffinePiece>> through;  // (left, right) germs
    std::vector<int> through_index;
    for (int k = 1; k <= tB; ++k) {
      const PiecewiseAffine& f = loc.orbit.Y(k);
      if (f(p) != v) continue;
      through.push_back({f.piece_left_of(p), f.piece_right_of(p)});
      through_index.push_back(k);
    }
    int crossing_pairs = 0;
    bool mult_ok = true;
    for (std::size_t a = 0; a < through.size(); ++a) {
      for (std::size_t b = a + 1; b < through.size(); ++b) {
        Rational dr = through[a].second.slope - through[b].second.slope;
        Rational dl = through[a].first.slope - through[b].first.slope;
        if (!dr.is_zero() && !dl.is_zero() && (dr * dl).sign() > 0) {
          ++crossing_pairs;
          int ma = 0, mb = 0;
          for (const auto& g : through) {
            if (g == through[a]) ++ma;
            if (g == through[b]) ++mb;
          }
          if (ma != 1 || mb != 1) mult_ok = false;
        }
      }
    }
    rec.proper = (crossing_pairs == 1) && mult_ok;
  }

  // the y-set: functions immediately above the stabilized value
  {
    std::vector<Rational> values;
    for (int k = 1; k <= tB; ++k) values.push_back(loc.orbit.Y(k)(p));
    std::vector<int> yset;
    std::vector<std::pair<AffinePiece, AffinePiece>> seen;  // distinct germs
    for (int k = 1; k <= tB; ++k) {
      const PiecewiseAffine& f = loc.orbit.Y(k);
      Rational fv = values[static_cast<std::size_t>(k) - 1];
      if (!(fv > v)) continue;
      if (!(m_p >= v && m_p < fv)) continue;
      bool gap_empty = true;
      for (const auto& w : values)
        if (v < w && w < fv) gap_empty = false;
      if (!gap_empty) continue;
      std::pair<AffinePiece, AffinePiece> germ{f.piece_left_of(p), f.piece_right_of(p)};
      bool dup = false;
      for (const auto& s : seen)
        if (s == germ) dup = true;
      if (dup) continue;
      seen.push_back(germ);
      yset.push_back(k);
    }
    rec.y_set_size = static_cast<int>(yset.size());
    rec.active = !yset.empty();

    if (rec.active) {
      // minimum per side: smallest just right of p, i.e. smallest right slope
      // among the equal-valued members; largest left slope on the left
      int best_r = yset.front(), best_l = yset.front();
      for (int k : yset) {
        const PiecewiseAffine& f = loc.orbit.Y(k);
        if (f.piece_right_of(p).slope < loc.orbit.Y(best_r).piece_right_of(p).slope) best_r = k;
        if (f.piece_left_of(p).slope > loc.orbit.Y(best_l).piece_left_of(p).slope) best_l = k;
      }
      rec.aux_right = loc.orbit.Y(best_r).piece_right_of(p);
      rec.aux_left = loc.orbit.Y(best_l).piece_left_of(p);
      rec.aux_right_index = best_r;
      rec.aux_left_index = best_l;

      int mult_r = 0, mult_l = 0;
      for (int k = 1; k <= tB; ++k) {
        const PiecewiseAffine& f = loc.orbit.Y(k);
        if (f(p) == loc.orbit.Y(best_r)(p) && f.piece_right_of(p) == *rec.aux_right) ++mult_r;
        if (f(p) == loc.orbit.Y(best_l)(p) && f.piece_left_of(p) == *rec.aux_left) ++mult_l;
      }
      rec.right_rank = mult_r;
      rec.left_rank = mult_l;
    }
  }

  // symmetry: standard triad for monotonic points, pseudotriad at reversals
  try {
    if (rec.trend == MedianTrend::NonDecreasing && rec.active) {
      TriadBranches br;
      br.p = p;
      bool i_upper_right = i_right.slope > j_right.slope;
      br.I = i_upper_right ? i_right : j_right;
      br.J = i_upper_right ? j_right : i_right;
      bool i_upper_left = i_left.slope < j_left.slope;
      br.Ip = i_upper_left ? i_left : j_left;
      br.Jp = i_upper_left ? j_left : i_left;
      br.K = *rec.aux_right;
      br.Kp = *rec.aux_left;
      rec.symmetry = triad_symmetry(br, TriadKind::Triad);
    } else if (rec.trend == MedianTrend::Reversing ||
               rec.trend == MedianTrend::Indeterminate) {
      // non-monotonic point: auxiliary components are the function
      // immediately above on the right and immediately below on the left
      std::optional<AffinePiece> above_r, below_l;
      std::optional<Rational> above_v, below_v;
      for (int k = 1; k <= tB; ++k) {
        const PiecewiseAffine& f = loc.orbit.Y(k);
        Rational fv = f(p);
        if (fv > v && (!above_v || fv < *above_v)) {
          above_v = fv;
          above_r = f.piece_right_of(p);
        }
        if (fv < v && (!below_v || fv > *below_v)) {
          below_v = fv;
          below_l = f.piece_left_of(p);
        }
      }
      if (above_r && below_l) {
        TriadBranches br;
        br.p = p;
        bool i_upper_right = i_right.slope > j_right.slope;
        br.I = i_upper_right ? i_right : j_right;
        br.J = i_upper_right ? j_right : i_right;
        // K' < I' < J' just left of p
        bool i_upper_left = i_left.slope < j_left.slope;
        br.Jp = i_upper_left ? i_left : j_left;
        br.Ip = i_upper_left ? j_left : i_left;
        br.K = *above_r;
        br.Kp = *below_l;
        rec.symmetry = triad_symmetry(br, TriadKind::Pseudotriad);
      }
    }
  } catch (const std::domain_error&) {
    // non-generic configuration: leave the symmetry absent
  }

  rec.classified = true;
}

// ---------------------------------------------------------------------------
// Side-based machinery (right side; the left runs on the reflected system)

struct SideView {
  System sys;
  Rational p;
  bool reflected = false;

  Rational to_world(const Rational& x) const {
    return reflected ? Rational(2) * p - x : x;
  }
  Interval to_world_interval(const Interval& iv) const {
    if (!reflected) return iv;
    return {Rational(2) * p - iv.hi, Rational(2) * p - iv.lo};
  }
  AffinePiece to_world(const AffinePiece& g) const {
    if (!reflected) return g;
    return {-g.slope, g.intercept + Rational(2) * p * g.slope};
  }
};

inline SideView make_side_view(const System& sys, const Rational& p, Side side) {
  if (side == Side::Right) return {sys, p, false};
  return {sys.reflected_about(p), p, true};
}

// Right-side facts needed by the deeper analyses.
struct SideFacts {
  Rational p, m_p, value;
  long tau = 0;
  AffinePiece low, high;  // crossing pair germs, low < high just right of p
  AffinePiece aux;        // standard auxiliary germ
  int aux_orbit_index = 0;
  int rank = 1;
};

inline SideFacts side_facts(const SideView& view, const XPointRecord& world_rec, Side side) {
  SideFacts sf;
  sf.p = world_rec.p;
  sf.value = world_rec.value;
  if (!world_rec.tau || !world_rec.m_at_p)
    throw std::domain_error("side_facts: record lacks scalar data");
  sf.tau = *world_rec.tau;
  sf.m_p = *world_rec.m_at_p;
  const std::optional<AffinePiece>& aux_world =
      side == Side::Right ? world_rec.aux_right : world_rec.aux_left;
  const std::optional<int>& aux_idx =
      side == Side::Right ? world_rec.aux_right_index : world_rec.aux_left_index;
  if (!aux_world) throw std::domain_error("side_facts: inactive X-point");
  sf.aux = view.reflected ? view.to_world(*aux_world) : *aux_world;
  sf.aux_orbit_index = *aux_idx;
  const std::optional<int>& rank =
      side == Side::Right ? world_rec.right_rank : world_rec.left_rank;
  sf.rank = rank.value_or(1);

  // pair germs on this side, in the side view's coordinates
  int n0 = static_cast<int>(view.sys.master().size());
  int pair_max = std::max(world_rec.pair.first, world_rec.pair.second);
  int tB = std::max({static_cast<int>(sf.tau) - 1, pair_max, n0});
  detail::LocalOrbit loc = detail::local_orbit_around(view.sys, sf.p, tB);
  AffinePiece a = loc.orbit.Y(world_rec.pair.first).piece_right_of(sf.p);
  AffinePiece b = loc.orbit.Y(world_rec.pair.second).piece_right_of(sf.p);
  if (a.slope == b.slope) throw std::domain_error("side_facts: pair germs coincide on this side");
  sf.low = a.slope < b.slope ? a : b;
  sf.high = a.slope < b.slope ? b : a;
  return sf;
}

// Tractability T1-T3 on the right side of the view, searching the smallest
// odd index.
inline Tractability tractability(const SideView& view, const SideFacts& sf,
                                 const AnalyzerOptions& opt = {},
                                 Rational window_radius = Rational(0)) {
  Tractability out;
  long first_candidate = sf.tau % 2 == 1 ? sf.tau : sf.tau + 1;
  long last_candidate = first_candidate + opt.tract_span;
  detail::LocalOrbit loc =
      detail::local_orbit_around(view.sys, sf.p, static_cast<int>(last_candidate),
                                 window_radius);
  int n0 = loc.orbit.n0;
  long tau_floor = std::max<long>(sf.tau, n0);
  long xi_bound = std::max<long>(sf.tau - 1, n0);  // size of Xi_{tau-1}, clamped

  const PiecewiseAffine aux_fn = [&] {
    // the real auxiliary function on the window (for regularity and T2)
    return loc.orbit.Y(sf.aux_orbit_index);
  }();

  bool t1_seen = false;
  for (long ell = first_candidate; ell <= last_candidate; ell += 2) {
    if (ell < n0 || ell > loc.orbit.size()) continue;
    const PiecewiseAffine& med = loc.orbit.median_at(static_cast<int>(ell));

    // T1: first meeting of M_ell with the auxiliary right of p
    std::optional<Rational> pstar;
    IntersectionReport rep = intersections(med, aux_fn);
    for (const auto& c : rep.crossings)
      if (c.x > sf.p && (!pstar || c.x < *pstar)) pstar = c.x;
    for (const auto& ov : rep.overlaps)
      if (ov.lo > sf.p && (!pstar || ov.lo < *pstar)) pstar = ov.lo;
    if (!pstar) continue;  // T1 not met at this index; try the next one
    Interval T{sf.p, *pstar};
    bool regular_inside = true;
    for (const auto& c : med.corners())
      if (T.contains_interior(c)) regular_inside = false;
    for (const auto& c : aux_fn.corners())
      if (T.contains_interior(c)) regular_inside = false;
    if (!regular_inside) continue;

    if (!t1_seen) {
      t1_seen = true;
      out.candidate = ell;
    }

    // T2: no crossing of the auxiliary with a function of Xi_{tau-1} inside T
    std::optional<Rational> t2_bad;
    for (long k = 1; k <= xi_bound; ++k) {
      const PiecewiseAffine& g = loc.orbit.Y(static_cast<int>(k));
      if (g == aux_fn) continue;
      for (const auto& c : intersections(aux_fn, g).crossings)
        if (T.contains_interior(c.x) && (!t2_bad || c.x < *t2_bad)) t2_bad = c.x;
    }

    // T3: no corner of Y_n below the auxiliary inside T, for n in [tau, ell]
    std::optional<std::pair<Rational, Rational>> t3_bad;
    for (long nn = tau_floor; nn <= ell && !t3_bad; ++nn) {
      const PiecewiseAffine& f = loc.orbit.Y(static_cast<int>(nn));
      for (const auto& c : f.corners()) {
        if (!T.contains_interior(c)) continue;
        Rational fv = f(c);
        if (fv < aux_fn(c)) {
          t3_bad = {c, fv};
          break;
        }
      }
    }

    if (!t2_bad && !t3_bad) {
      out.tractable = true;
      out.index = ell;
      out.domain = T;
      return out;
    }
    if (out.failed_condition.empty()) {
      out.candidate = ell;
      if (t2_bad) {
        out.failed_condition = "T2";
        out.t2_violation = t2_bad;
      } else {
        out.failed_condition = "T3";
        out.t3_corner = t3_bad;
      }
    }
  }
  if (!t1_seen && out.failed_condition.empty()) out.failed_condition = "T1";
  return out;
}

namespace detail {

// Regularity radius of the functions through (p, m(p)) lying at or above the
// median at step ell, read off the real local orbit.
inline std::optional<Rational> initial_regularity_radius(const LocalOrbit& loc,
                                                         const Rational& p, const Rational& m_p,
                                                         long ell) {
  const PiecewiseAffine& med = loc.orbit.median_at(static_cast<int>(ell));
  Rational med_slope = med.piece_right_of(p).slope;
  std::optional<Rational> radius;
  for (int k = 1; k <= static_cast<int>(ell); ++k) {
    const PiecewiseAffine& f = loc.orbit.Y(k);
    if (f(p) != m_p) continue;
    if (f.piece_right_of(p).slope < med_slope) continue;
    for (const auto& c : f.corners())
      if (c > p && (!radius || c < *radius)) radius = c;
  }
  return radius;  // absent: unbounded within the window
}

}  // namespace detail

// The auxiliary-sequence flow chart, driven by the order-t normal form lifted
// through the crossing pair. Valid for proper active X-points with odd
// tau >= 5 under tractability; the six cases update (p_n, q_n) exactly.
inline AuxiliarySequence auxiliary_sequence_lifted(const SideView& view, const SideFacts& sf,
                                                   const Tractability& tract,
                                                   const NormalFormOrbit& nf,
                                                   const AnalyzerOptions& opt = {}) {
  if (!tract.tractable) throw std::domain_error("auxiliary_sequence: point is not tractable");
  if (nf.t != sf.tau) throw std::domain_error("auxiliary_sequence: normal form order mismatch");
  AuxiliarySequence seq;
  seq.ell = tract.index;

  // abscissa where the lifted n-th function meets the auxiliary line
  auto lifted_crossing = [&](long n) -> std::optional<Rational> {
    AffinePiece fn = nf_lift_line(sf.low, sf.high, nf.y_at(n));
    auto x = affine_crossing(fn, sf.aux);
    if (x && *x > sf.p) return x;
    return std::nullopt;
  };

  std::vector<Rational> H;
  for (long k = sf.tau; k <= seq.ell && k <= nf.last_index(); ++k)
    if (auto xi = lifted_crossing(k)) H.push_back(*xi);

  // p_ell from the real orbit (also used by the tractability scan)
  detail::LocalOrbit loc =
      detail::local_orbit_around(view.sys, sf.p, static_cast<int>(seq.ell));
  std::optional<Rational> p_cur =
      detail::initial_regularity_radius(loc, sf.p, sf.m_p, seq.ell);
  Rational q_cur = tract.domain.hi;

  auto record = [&seq](long n, std::optional<Rational> pv, Rational qv, int cse) {
    seq.terms.push_back({n, std::move(pv), std::move(qv), cse});
  };
  record(seq.ell, p_cur, q_cur, 0);

  // reduced multiset evolves alongside to expose the cores
  RationalMultiset gamma;
  gamma.insert(Rational(0));
  gamma.insert(Rational(1));
  for (long n = sf.tau; n < seq.ell; ++n) gamma.insert(nf.y_at(n));

  for (long n = seq.ell; n < nf.last_index(); ++n) {
    gamma.insert(nf.y_at(n));
    RationalMultiset core = gamma.core();
    long next = n + 1;
    int cse = 0;
    std::optional<Rational> p_next = p_cur;
    Rational q_next = q_cur;
    bool stop = false;

    if (next > nf.last_index()) break;
    const Rational& y_next = nf.y_at(next);
    std::optional<Rational> xi = lifted_crossing(next);
    if (xi) H.push_back(*xi);

    if (n % 2 == 0) {
      if (core.size() != 2) throw std::logic_error("auxiliary_sequence: core parity drift");
      if (core[0] == core[1]) {
        cse = 1;
        p_next = q_cur;
        q_next = q_cur;
        stop = true;
      } else {
        cse = 2;
        p_next = q_cur;
        std::optional<Rational> best;
        for (const auto& h : H)
          if (h > sf.p && (!p_next || h < *p_next) && (!best || h > *best)) best = h;
        if (!best)
          throw std::domain_error("auxiliary_sequence: H \\cap U empty (non-conforming)");
        q_next = *best;
      }
    } else {
      if (core.size() != 3) throw std::logic_error("auxiliary_sequence: core parity drift");
      if (core[1] == core[2]) {
        cse = 3;
        p_next = q_cur;
        q_next = q_cur;
        stop = true;
      } else if (core[0] == core[1]) {
        cse = 4;
        q_next = p_cur.value_or(q_cur);
        stop = true;
      } else if (y_next < core[2]) {
        cse = 5;
        if (!xi)
          throw std::domain_error("auxiliary_sequence: missing crossing (non-conforming)");
        q_next = *xi;
      } else {
        cse = 6;
      }
    }
    p_cur = p_next;
    q_cur = q_next;
    record(next, p_cur, q_cur, cse);
    if (stop) {
      seq.stabilized = true;
      seq.limit_p = p_cur;
      break;
    }
  }

  // distinct finite regularity radii, in order of first appearance
  for (const auto& t : seq.terms) {
    if (!t.p) continue;
    if (seq.distinct_xpoints.empty() || seq.distinct_xpoints.back() != *t.p)
      seq.distinct_xpoints.push_back(*t.p);
  }
  OrbitOptions sopt;
  sopt.max_steps = opt.scalar_cap;
  for (const auto& x : seq.distinct_xpoints) {
    OrbitResult r = iterate_until_stable(view.sys.at(x), sopt);
    seq.distinct_tau.push_back(r.transit_time.value_or(-1));
  }
  return seq;
}

// Direct orbit-driven variant for systems whose hierarchy is globally tame
// (for instance rank-2 model systems) or whose transit time does not key a
// normal form.
inline AuxiliarySequence auxiliary_sequence_direct(const SideView& view, const SideFacts& sf,
                                                   const Tractability& tract, int n_max,
                                                   const AnalyzerOptions& opt = {}) {
  if (!tract.tractable) throw std::domain_error("auxiliary_sequence: point is not tractable");
  AuxiliarySequence seq;
  seq.ell = tract.index;

  detail::LocalOrbit loc = detail::local_orbit_around(view.sys, sf.p, n_max);
  const FunctionalOrbit& orb = loc.orbit;
  const PiecewiseAffine& aux_fn = orb.Y(sf.aux_orbit_index);

  auto first_crossing_right = [&](const PiecewiseAffine& f) -> std::optional<Rational> {
    std::optional<Rational> best;
    for (const auto& c : intersections(f, aux_fn).crossings)
      if (c.x > sf.p && (!best || c.x < *best)) best = c.x;
    return best;
  };
  auto all_crossings_right = [&](const PiecewiseAffine& f, std::vector<Rational>& H) {
    for (const auto& c : intersections(f, aux_fn).crossings)
      if (c.x > sf.p) H.push_back(c.x);
  };

  std::vector<Rational> H;
  for (long k = sf.tau; k <= seq.ell; ++k) all_crossings_right(orb.Y(static_cast<int>(k)), H);

  std::optional<Rational> p_cur = detail::initial_regularity_radius(loc, sf.p, sf.m_p, seq.ell);
  Rational q_cur = tract.domain.hi;
  seq.terms.push_back({seq.ell, p_cur, q_cur, 0});

  for (long n = seq.ell; n + 1 <= orb.size(); ++n) {
    // the core tuple just right of p
    Bundle bn = orb.bundle_at(static_cast<int>(n));
    std::vector<AffinePiece> germs;
    for (const auto& mfn : bn.members()) germs.push_back(mfn.piece_right_of(sf.p));
    std::sort(germs.begin(), germs.end(), [&](const AffinePiece& a, const AffinePiece& b) {
      Rational va = a.at(sf.p), vb = b.at(sf.p);
      if (va != vb) return va < vb;
      return a.slope < b.slope;
    });
    std::size_t half = germs.size() / 2;
    std::vector<AffinePiece> core;
    if (germs.size() % 2 == 0)
      core = {germs[half - 1], germs[half]};
    else
      core = {germs[half - 1], germs[half], germs[half + 1]};

    const PiecewiseAffine& y_next_fn = orb.Y(static_cast<int>(n + 1));
    AffinePiece y_next = y_next_fn.piece_right_of(sf.p);
    if (auto xi = first_crossing_right(y_next_fn)) H.push_back(*xi);

    int cse = 0;
    std::optional<Rational> p_next = p_cur;
    Rational q_next = q_cur;
    bool stop = false;
    auto germ_le = [&](const AffinePiece& a, const AffinePiece& b) {
      Rational va = a.at(sf.p), vb = b.at(sf.p);
      if (va != vb) return va < vb;
      return a.slope <= b.slope;
    };
    if (n % 2 == 0) {
      if (core[0] == core[1]) {
        cse = 1;
        p_next = q_cur;
        stop = true;
      } else {
        cse = 2;
        p_next = q_cur;
        std::optional<Rational> best;
        for (const auto& h : H)
          if (h > sf.p && (!p_next || h < *p_next) && (!best || h > *best)) best = h;
        if (!best) throw std::domain_error("auxiliary_sequence: H \\cap U empty");
        q_next = *best;
      }
    } else {
      if (core[1] == core[2]) {
        cse = 3;
        p_next = q_cur;
        stop = true;
      } else if (core[0] == core[1]) {
        cse = 4;
        q_next = p_cur.value_or(q_cur);
        stop = true;
      } else if (germ_le(y_next, core[2]) && !(y_next == core[2])) {
        cse = 5;
        auto xi = first_crossing_right(y_next_fn);
        if (!xi) throw std::domain_error("auxiliary_sequence: missing crossing");
        q_next = *xi;
      } else {
        cse = 6;
      }
    }
    p_cur = p_next;
    q_cur = q_next;
    seq.terms.push_back({n + 1, p_cur, q_cur, cse});
    if (stop) {
      seq.stabilized = true;
      seq.limit_p = p_cur;
      break;
    }
  }

  for (const auto& t : seq.terms) {
    if (!t.p) continue;
    if (seq.distinct_xpoints.empty() || seq.distinct_xpoints.back() != *t.p)
      seq.distinct_xpoints.push_back(*t.p);
  }
  OrbitOptions sopt;
  sopt.max_steps = opt.scalar_cap;
  for (const auto& x : seq.distinct_xpoints) {
    OrbitResult r = iterate_until_stable(view.sys.at(x), sopt);
    seq.distinct_tau.push_back(r.transit_time.value_or(-1));
  }
  return seq;
}

// Probe-based resolution of the dichotomy at an X-point with auxiliary line
// `aux` and one-sided domain (p, domain_end).
inline DichotomyResult resolve_dichotomy(const SideView& view, const Rational& p,
                                         const Rational& m_p, const AffinePiece& aux,
                                         const Rational& domain_end,
                                         const AnalyzerOptions& opt = {}) {
  DichotomyResult res{DichotomyResult::Kind::Unresolved, std::nullopt, std::nullopt, 0};
  Rational gap = domain_end - p;
  if (!(gap > Rational(0))) throw std::domain_error("resolve_dichotomy: empty domain");
  Rational x0 = p + gap / Rational(1000);
  OrbitOptions sopt;
  sopt.max_steps = opt.scalar_cap;
  for (int attempt = 0; attempt < opt.dichotomy_retries; ++attempt) {
    res.probes_used = attempt + 1;
    OrbitResult r = iterate_until_stable(view.sys.at(x0), sopt);
    if (!r.limit) return res;  // cap exceeded: unresolved
    if (*r.limit == aux.at(x0)) {
      x0 = p + (x0 - p) / Rational(10);
      continue;
    }
    AffinePiece connector = AffinePiece::through(p, m_p, x0, *r.limit);
    auto x_inf = affine_crossing(connector, aux);
    if (!x_inf || !(*x_inf > p)) return res;
    res.kind = DichotomyResult::Kind::Continuous;
    res.p_inf = *x_inf;
    res.connector = connector;
    return res;
  }
  res.kind = DichotomyResult::Kind::DiscontinuousSuspected;
  return res;
}

// ---------------------------------------------------------------------------
// Inheritance of triad symmetries

struct InheritanceResult {
  bool precondition_ok = false;  // Y_{tau(p)} is an affine combination of the
                                 // upper/lower concatenations and the auxiliary
  bool holds = false;            // Y_n(mu(x)) = f(Y_n(x)) and tau(mu(x)) = tau(x)
};

// Checks the affine-combination precondition and then the functional
// identities at the samples for n in [n_lo, n_hi]. The samples and their mu
// images must lie inside the master domain.
inline InheritanceResult verify_inheritance(const System& sys, const Rational& p, long tau,
                                            const TriadSymmetry& sym,
                                            const std::vector<Rational>& samples, long n_lo,
                                            long n_hi, const AnalyzerOptions& opt = {}) {
  InheritanceResult out;
  int n0 = static_cast<int>(sys.master().size());
  long run_to = std::max<long>(n_hi, std::max<long>(tau, n0));
  detail::LocalOrbit loc = detail::local_orbit_around(sys, p, static_cast<int>(run_to));

  // the combination is solved on the right germs and checked on the left
  const TriadBranches& br = sym.branches;
  long tau_c = std::max<long>(tau, n0);
  AffinePiece w_r = loc.orbit.Y(static_cast<int>(tau_c)).piece_right_of(p);
  AffinePiece w_l = loc.orbit.Y(static_cast<int>(tau_c)).piece_left_of(p);
  // alpha*I + beta*J + gamma*K = w (slope and intercept), alpha+beta+gamma = 1
  Rational a1 = br.I.slope, b1 = br.J.slope, c1 = br.K.slope, d1 = w_r.slope;
  Rational a2 = br.I.intercept, b2 = br.J.intercept, c2 = br.K.intercept, d2 = w_r.intercept;
  // eliminate gamma = 1 - alpha - beta
  Rational A11 = a1 - c1, A12 = b1 - c1, B1 = d1 - c1;
  Rational A21 = a2 - c2, A22 = b2 - c2, B2 = d2 - c2;
  Rational det = A11 * A22 - A12 * A21;
  if (!det.is_zero()) {
    Rational alpha = (B1 * A22 - A12 * B2) / det;
    Rational beta = (A11 * B2 - B1 * A21) / det;
    Rational gamma = Rational(1) - alpha - beta;
    AffinePiece left_comb{alpha * br.Ip.slope + beta * br.Jp.slope + gamma * br.Kp.slope,
                          alpha * br.Ip.intercept + beta * br.Jp.intercept +
                              gamma * br.Kp.intercept};
    out.precondition_ok = (left_comb == w_l);
  }
  if (!out.precondition_ok) return out;

  OrbitOptions sopt;
  sopt.max_steps = opt.scalar_cap;
  out.holds = true;
  for (const auto& x : samples) {
    if (sym.mu.has_pole_at(x)) throw std::domain_error("verify_inheritance: pole at sample");
    Rational mx = sym.mu(x);
    if (!loc.window.contains(x) || !loc.window.contains(mx))
      throw std::domain_error("verify_inheritance: sample outside the analyzed window");
    AffineMap fx = sym.f_at(x);
    for (long n = std::max<long>(n_lo, n0); n <= n_hi; ++n) {
      const PiecewiseAffine& yn = loc.orbit.Y(static_cast<int>(n));
      if (yn(mx) != fx(yn(x))) {
        out.holds = false;
        return out;
      }
    }
    OrbitResult rx = iterate_until_stable(sys.at(x), sopt);
    OrbitResult rmx = iterate_until_stable(sys.at(mx), sopt);
    if (!rx.transit_time || !rmx.transit_time || *rx.transit_time != *rmx.transit_time) {
      out.holds = false;
      return out;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rank-1 analysis and quasi-regularity

struct Rank1Report {
  bool applies = false;
  std::string failure;  // names the first failed hypothesis otherwise
  Rational p3, p2, p1;  // last three distinct auxiliary terms, outermost first
  long tau_p2 = 0, tau_p3 = 0;
  AffinePiece y_star;   // the line the functional orbit stabilizes at near p
  std::optional<Rational> p_prime;
  bool cond_i = false;   // every earlier function clears (p2, p_prime)
  bool cond_ii = false;  // p_prime precedes the crossing of Y_{tau(p3)} with y_star
  DichotomyResult inner;  // at p2, toward p
  DichotomyResult outer;  // at p2, away from p
  // limit branches in the side's coordinates, ordered away from p
  std::vector<std::pair<Interval, AffinePiece>> branches;
};

namespace detail {

// Y_{k} of the system in a window, computed locally.
inline PiecewiseAffine function_on_window(const System& sys, const Interval& window, int k) {
  int n0 = static_cast<int>(sys.master().size());
  if (k <= n0) return sys.on(window).members()[static_cast<std::size_t>(k) - 1];
  FunctionalOrbit orb = iterate_bundle(sys.on(window), k - n0, {.stop_when_stable = false});
  return orb.Y(k);
}

}  // namespace detail

inline Rank1Report rank1_analysis(const SideView& view, const SideFacts& sf,
                                  const Tractability& tract, const AuxiliarySequence& seq,
                                  const AnalyzerOptions& opt = {}) {
  Rank1Report rep;
  if (!seq.stabilized || seq.distinct_xpoints.size() < 3) {
    rep.failure = "hypothesis: last three distinct terms absent";
    return rep;
  }
  std::size_t d = seq.distinct_xpoints.size();
  rep.p3 = seq.distinct_xpoints[d - 3];
  rep.p2 = seq.distinct_xpoints[d - 2];
  rep.p1 = seq.distinct_xpoints[d - 1];
  rep.tau_p2 = seq.distinct_tau[d - 2];
  rep.tau_p3 = seq.distinct_tau[d - 3];
  if (!(sf.p < rep.p1 && rep.p1 < rep.p2 && rep.p2 < rep.p3)) {
    rep.failure = "hypothesis: terms out of order";
    return rep;
  }

  // the stabilized function: lifted limit of the governing normal form
  OrbitOptions sopt;
  sopt.max_steps = opt.scalar_cap;
  OrbitResult at_p1 = iterate_until_stable(view.sys.at(rep.p1), sopt);
  if (!at_p1.limit) {
    rep.failure = "hypothesis: cap exceeded at the last term";
    return rep;
  }
  // y_star passes through (p, m(p)) and (p1, m(p1))
  rep.y_star = AffinePiece::through(sf.p, sf.m_p, rep.p1, *at_p1.limit);

  // p' = first meeting of Y_{tau(p2)} with y_star inside (p2, p3)
  Interval win{rep.p2 - (rep.p2 - rep.p1) / Rational(4), rep.p3};
  PiecewiseAffine y_tp2 = detail::function_on_window(view.sys, win, static_cast<int>(rep.tau_p2));
  PiecewiseAffine star_fn = PiecewiseAffine::affine(win, rep.y_star.slope, rep.y_star.intercept);
  for (const auto& c : intersections(y_tp2, star_fn).crossings)
    if (rep.p2 < c.x && c.x < rep.p3 && (!rep.p_prime || c.x < *rep.p_prime)) rep.p_prime = c.x;
  if (!rep.p_prime) {
    rep.failure = "hypothesis: p' does not exist";
    return rep;
  }

  // condition i): every function of Xi_{tau-1} except the auxiliary passes
  // below at p2 or above y_star at p'
  {
    Interval w2{sf.p - (rep.p1 - sf.p), rep.p3};
    Interval dom = view.sys.domain();
    w2.lo = max(w2.lo, dom.lo);
    Bundle early = [&] {
      int n0 = static_cast<int>(view.sys.master().size());
      int upto = std::max(static_cast<int>(sf.tau) - 1, n0);
      FunctionalOrbit orb =
          upto > n0 ? iterate_bundle(view.sys.on(w2), upto - n0, {.stop_when_stable = false})
                    : FunctionalOrbit{};
      if (upto == n0) return view.sys.on(w2);
      return orb.bundle_at(upto);
    }();
    rep.cond_i = true;
    PiecewiseAffine aux_like =
        PiecewiseAffine::affine(w2, sf.aux.slope, sf.aux.intercept);
    for (const auto& g : early.members()) {
      if (equality_intervals(g, aux_like).size() == 1 &&
          equality_intervals(g, aux_like)[0] == w2)
        continue;  // the auxiliary itself
      bool below_at_p2 = g(rep.p2) < sf.aux.at(rep.p2);
      bool above_at_pp = g(*rep.p_prime) > rep.y_star.at(*rep.p_prime);
      if (!below_at_p2 && !above_at_pp) {
        rep.cond_i = false;
        break;
      }
    }
  }

  // condition ii): p' < Y_{tau(p3)} bowtie y_star inside (p2, p3)
  {
    PiecewiseAffine y_tp3 =
        detail::function_on_window(view.sys, win, static_cast<int>(rep.tau_p3));
    std::optional<Rational> cross;
    for (const auto& c : intersections(y_tp3, star_fn).crossings)
      if (rep.p2 < c.x && c.x < rep.p3 && (!cross || c.x < *cross)) cross = c.x;
    rep.cond_ii = cross.has_value() && *rep.p_prime < *cross;
  }

  if (!rep.cond_i) {
    rep.failure = "hypothesis: condition i) fails";
    return rep;
  }

  // dichotomies at p2: toward p with domain (p, p2), away with (p2, p')
  OrbitResult at_p2 = iterate_until_stable(view.sys.at(rep.p2), sopt);
  if (!at_p2.limit) {
    rep.failure = "hypothesis: cap exceeded at the second-to-last term";
    return rep;
  }
  Rational m_p2 = *at_p2.limit;
  {
    // toward p: reflect about p2 so the machinery runs on its right side
    SideView inner_view{view.sys.reflected_about(rep.p2), rep.p2, true};
    AffinePiece star_reflected{-rep.y_star.slope,
                               rep.y_star.intercept + Rational(2) * rep.p2 * rep.y_star.slope};
    rep.inner = resolve_dichotomy(inner_view, rep.p2, m_p2, star_reflected,
                                  rep.p2 + (rep.p2 - sf.p), opt);
    if (rep.inner.p_inf) rep.inner.p_inf = Rational(2) * rep.p2 - *rep.inner.p_inf;
    if (rep.inner.connector)
      rep.inner.connector = AffinePiece{
          -rep.inner.connector->slope,
          rep.inner.connector->intercept + Rational(2) * rep.p2 * rep.inner.connector->slope};
  }
  if (rep.cond_ii)
    rep.outer = resolve_dichotomy(view, rep.p2, m_p2, rep.y_star, *rep.p_prime, opt);

  rep.applies = true;

  // assemble the limit branches away from p, where both dichotomies landed
  if (rep.inner.kind == DichotomyResult::Kind::Continuous &&
      (!rep.cond_ii || rep.outer.kind == DichotomyResult::Kind::Continuous)) {
    Rational inner_inf = *rep.inner.p_inf;  // between p and p2
    rep.branches.push_back({{sf.p, inner_inf}, rep.y_star});
    rep.branches.push_back({{inner_inf, rep.p2}, *rep.inner.connector});
    if (rep.cond_ii) {
      Rational outer_inf = *rep.outer.p_inf;
      rep.branches.push_back({{rep.p2, outer_inf}, *rep.outer.connector});
      rep.branches.push_back({{outer_inf, *rep.p_prime}, rep.y_star});
    }
  }
  return rep;
}

// Quasi-regularity neighbourhood on one side: the interval on which the
// terminating behaviour is certified, with fallbacks mirroring the census
// procedure.
struct QuasiRegularity {
  Rational hi;  // the side extends over (p, hi)
  std::string basis;  // "full", "iii-fallback", "ii-fallback", "i-fallback"
};

inline QuasiRegularity quasi_regularity_side(const SideView& view, const SideFacts& sf,
                                             const Tractability& tract,
                                             const AuxiliarySequence& seq,
                                             const Rank1Report& rank1,
                                             const AnalyzerOptions& opt = {}) {
  // condition i) of the census procedure: no crossing of two earlier
  // functions inside (p, p3)
  bool cond_i = true;
  std::optional<Rational> first_foreign;
  {
    Interval w{sf.p, rank1.applies || !rank1.failure.empty() ? rank1.p3 : tract.domain.hi};
    if (!(w.lo < w.hi)) w.hi = tract.domain.hi;
    int n0 = static_cast<int>(view.sys.master().size());
    int upto = std::max(static_cast<int>(sf.tau) - 1, n0);
    Interval run_w{sf.p - (w.hi - sf.p) / Rational(8), w.hi};
    run_w.lo = max(run_w.lo, view.sys.domain().lo);
    Bundle early = upto == n0
                       ? view.sys.on(run_w)
                       : iterate_bundle(view.sys.on(run_w), upto - n0,
                                        {.stop_when_stable = false})
                             .bundle_at(upto);
    for (const auto& c : bundle_crossings(early, {w.lo, w.hi})) {
      if (c.x > sf.p && c.x < w.hi && (!first_foreign || c.x < *first_foreign))
        first_foreign = c.x;
    }
    cond_i = !first_foreign.has_value();
  }

  if (!cond_i) return {*first_foreign, "i-fallback"};
  if (!rank1.cond_i && rank1.p_prime) {
    // condition ii) fallback: the offending function meets the limit function
    // somewhere in (p, p'); certify up to the first such meeting
    Interval w{sf.p, *rank1.p_prime};
    int n0 = static_cast<int>(view.sys.master().size());
    int upto = std::max(static_cast<int>(sf.tau) - 1, n0);
    Interval run_w{sf.p - (w.hi - sf.p) / Rational(8), w.hi};
    run_w.lo = max(run_w.lo, view.sys.domain().lo);
    Bundle early = upto == n0
                       ? view.sys.on(run_w)
                       : iterate_bundle(view.sys.on(run_w), upto - n0,
                                        {.stop_when_stable = false})
                             .bundle_at(upto);
    std::optional<Rational> cut;
    for (const auto& g : early.members()) {
      bool below_at_p2 = g(rank1.p2) < sf.aux.at(rank1.p2);
      bool above_at_pp = g(*rank1.p_prime) > rank1.y_star.at(*rank1.p_prime);
      if (below_at_p2 || above_at_pp) continue;
      // offending member: meets the limit function inside (p, p')
      for (const auto& [iv, piece] : rank1.branches) {
        PiecewiseAffine seg = PiecewiseAffine::affine(run_w, piece.slope, piece.intercept);
        for (const auto& c : intersections(g, seg).crossings)
          if (iv.contains(c.x) && c.x > sf.p && (!cut || c.x < *cut)) cut = c.x;
      }
      if (rank1.branches.empty()) {
        // fall back to the limit on [p, p1]: the stabilized line
        PiecewiseAffine seg =
            PiecewiseAffine::affine(run_w, rank1.y_star.slope, rank1.y_star.intercept);
        for (const auto& c : intersections(g, seg).crossings)
          if (c.x > sf.p && c.x < *rank1.p_prime && (!cut || c.x < *cut)) cut = c.x;
      }
    }
    if (cut) return {*cut, "ii-fallback"};
  }
  if (!rank1.cond_ii) return {rank1.p2, "iii-fallback"};
  return {*rank1.p_prime, "full"};
}

// ---------------------------------------------------------------------------
// Census and X-point decision

struct CensusOptions {
  AnalyzerOptions analyzer{};
  long scalar_cap_slack = 8;
};

// All active X-points with odd transit time <= t_max inside the window,
// found as the transversal crossings of the bundle at time t_max - 2 and
// filtered by their exact scalar transit time and activity.
inline std::map<long, std::vector<Rational>> census(const System& sys, long t_max,
                                                    const Interval& window,
                                                    const CensusOptions& opt = {}) {
  if (t_max < 5 || t_max % 2 == 0)
    throw std::domain_error("census: t_max must be odd and >= 5");
  int n0 = static_cast<int>(sys.master().size());
  int steps = static_cast<int>(t_max) - 2 - n0;
  if (steps < 1) throw std::domain_error("census: t_max too small for this system");
  FunctionalOrbit orb =
      iterate_bundle(sys.on(sys.domain()), steps, {.stop_when_stable = false,
                                                   .keep_medians = false});
  Bundle big = orb.bundle_at(orb.size());
  std::vector<BundleCrossing> crossings = bundle_crossings(big, window);

  std::vector<Rational> candidates;
  for (const auto& c : crossings) {
    if (!c.transversal) continue;
    if (candidates.empty() || candidates.back() != c.x) candidates.push_back(c.x);
  }

  std::map<long, std::vector<Rational>> out;
  for (long t = 5; t <= t_max; t += 2) out[t] = {};
  OrbitOptions sopt;
  sopt.max_steps = t_max + opt.scalar_cap_slack;

  for (const auto& p : candidates) {
    OrbitResult r = iterate_until_stable(sys.at(p), sopt);
    if (!r.transit_time) continue;
    long t = *r.transit_time;
    if (t < 5 || t % 2 == 0 || t > t_max) continue;
    // activity via local classification
    XPointRecord rec;
    rec.p = p;
    // recover the crossing record for this abscissa
    for (const auto& c : crossings) {
      if (c.x == p && c.transversal) {
        rec.value = c.value;
        rec.pair = c.pairs.front();
        rec.all_pairs = c.pairs;
        break;
      }
    }
    classify_xpoint(sys, rec, opt.analyzer);
    if (rec.classified && rec.active) out[t].push_back(p);
  }
  return out;
}

// Decides whether p is an X-point of the system: some pair of orbit
// functions crosses transversally at p. Sound once a window around p
// stabilizes completely; the window shrinks if deeper hierarchies intrude.
struct XPointDecision {
  bool is_xpoint = false;
  bool decided = false;  // false: cap exceeded on every window
};

inline XPointDecision is_xpoint(const System& sys, const Rational& p, int n_cap = 300,
                                int shrink_retries = 8) {
  Interval dom = sys.domain();
  Rational radius = min(min(p - dom.lo, dom.hi - p) / Rational(4), Rational(1, 64));
  for (int attempt = 0; attempt <= shrink_retries; ++attempt) {
    Interval w{p - radius, p + radius};
    BundleOrbitOptions bopt;
    bopt.grid_budget = 4000;
    FunctionalOrbit orb = iterate_bundle(sys.on(w), n_cap, bopt);
    Bundle all = orb.bundle_at(orb.size());
    for (const auto& c : bundle_crossings(all, w))
      if (c.x == p && c.transversal) return {true, true};
    if (!orb.budget_exceeded && stabilization_map(orb).fully_resolved) return {false, true};
    radius /= Rational(16);
  }
  return {false, false};
}

}  // namespace mmm

#endif  // MMM_XPOINT_HPP
