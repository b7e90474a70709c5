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

#include "mmm/piecewise_affine.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <random>

using mmm::AffinePiece;
using mmm::ConcatMode;
using mmm::Interval;
using mmm::PiecewiseAffine;
using mmm::Rational;
using mmm::affine_combine;

namespace {

Rational q(const char* s) { return Rational::parse(s); }

Interval unit() { return {Rational(0), Rational(1)}; }

PiecewiseAffine line(const Interval& dom, const char* slope, const char* intercept) {
  return PiecewiseAffine::affine(dom, q(slope), q(intercept));
}

// Uniformly random piecewise-affine function with small rational data.
PiecewiseAffine random_pwa(std::mt19937& rng, const Interval& dom) {
  std::uniform_int_distribution<long> num(-12, 12), den(1, 8), parts(1, 4);
  long k = parts(rng);
  std::vector<Rational> bps{dom.lo};
  for (long i = 1; i < k; ++i) {
    Rational t(num(rng), den(rng));
    // map into the open interval
    Rational frac = (t - Rational(-12)) / Rational(24);
    Rational x = dom.lo + frac * (dom.hi - dom.lo);
    if (dom.contains_interior(x)) bps.push_back(x);
  }
  std::sort(bps.begin(), bps.end());
  bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
  bps.push_back(dom.hi);
  std::vector<AffinePiece> ps;
  Rational y(num(rng), den(rng));
  for (std::size_t i = 0; i + 1 < bps.size(); ++i) {
    Rational s(num(rng), den(rng));
    ps.push_back({s, y - s * bps[i]});
    y = ps.back().at(bps[i + 1]);
  }
  return PiecewiseAffine(std::move(bps), std::move(ps));
}

}  // namespace

TEST_CASE("eval on affine pieces", "[pwa]") {
  Interval dom{q("1/2"), q("2/3")};
  CHECK(line(dom, "3", "-1")(q("3/5")) == q("4/5"));
  CHECK(PiecewiseAffine::constant(dom, Rational(1))(q("5/9")) == Rational(1));
  // 27/2 x - 25/4 at 7/12
  CHECK(line(dom, "27/2", "-25/4")(q("7/12")) == q("13/8"));
  CHECK_THROWS_AS(line(dom, "1", "0")(Rational(2)), std::domain_error);
}

TEST_CASE("construction validates and canonicalizes", "[pwa]") {
  // redundant interior breakpoint merges away
  PiecewiseAffine f({q("0"), q("1/2"), q("1")},
                    {AffinePiece{q("1"), q("0")}, AffinePiece{q("1"), q("0")}});
  CHECK(f.piece_count() == 1);
  CHECK(f == line(unit(), "1", "0"));
  // discontinuity rejected
  CHECK_THROWS_AS(PiecewiseAffine({q("0"), q("1/2"), q("1")},
                                  {AffinePiece{q("1"), q("0")}, AffinePiece{q("1"), q("1")}}),
                  std::domain_error);
  // non-increasing breakpoints rejected
  CHECK_THROWS_AS(PiecewiseAffine({q("0"), q("0")}, {AffinePiece{q("1"), q("0")}}),
                  std::domain_error);
}

TEST_CASE("eval agrees across breakpoints by continuity", "[pwa]") {
  PiecewiseAffine f({q("0"), q("1/2"), q("1")},
                    {AffinePiece{q("1"), q("0")}, AffinePiece{q("-1"), q("1")}});
  CHECK(f(q("1/2")) == q("1/2"));
  CHECK(f(q("1/4")) == q("1/4"));
  CHECK(f(q("3/4")) == q("1/4"));
  CHECK(f.corners() == std::vector<Rational>{q("1/2")});
}

TEST_CASE("affine_combine on the documented examples", "[pwa]") {
  Interval dom{q("1/2"), q("2/3")};
  PiecewiseAffine y = line(dom, "3", "-1");
  CHECK(affine_combine({{Rational(1), &y}}) == y);
  // 5*M4 - 4*M3 with M4 = 2x - 1/2 and M3 = x gives 6x - 5/2
  PiecewiseAffine m4 = line(dom, "2", "-1/2");
  PiecewiseAffine m3 = line(dom, "1", "0");
  CHECK(affine_combine({{Rational(5), &m4}, {Rational(-4), &m3}}) == line(dom, "6", "-5/2"));
  CHECK(affine_combine({{q("1/2"), &y}, {q("1/2"), &y}}) == y);
}

TEST_CASE("upper and lower concatenations", "[pwa]") {
  PiecewiseAffine a = line(unit(), "1", "0");
  PiecewiseAffine b = line(unit(), "-1", "1");
  PiecewiseAffine mx = concatenate(a, b, ConcatMode::Upper);
  PiecewiseAffine mn = concatenate(a, b, ConcatMode::Lower);
  CHECK(mx == PiecewiseAffine({q("0"), q("1/2"), q("1")},
                              {AffinePiece{q("-1"), q("1")}, AffinePiece{q("1"), q("0")}}));
  CHECK(mn(q("0")) == q("0"));
  CHECK(mn(q("3/4")) == q("1/4"));
  CHECK(concatenate(a, a, ConcatMode::Lower) == a);
}

TEST_CASE("envelope identities on random pairs", "[pwa][property]") {
  std::mt19937 rng(31);
  std::uniform_int_distribution<long> num(-12, 12), den(1, 8);
  for (int it = 0; it < 60; ++it) {
    PiecewiseAffine a = random_pwa(rng, unit());
    PiecewiseAffine b = random_pwa(rng, unit());
    PiecewiseAffine up = concatenate(a, b, ConcatMode::Upper);
    PiecewiseAffine lo = concatenate(a, b, ConcatMode::Lower);
    // max + min == a + b
    PiecewiseAffine sum1 = affine_combine({{Rational(1), &up}, {Rational(1), &lo}});
    PiecewiseAffine sum2 = affine_combine({{Rational(1), &a}, {Rational(1), &b}});
    CHECK(sum1 == sum2);
    for (int s = 0; s < 8; ++s) {
      Rational x(num(rng) + 12, 25);  // within [0,24/25]
      CHECK(up(x) == mmm::max(a(x), b(x)));
      CHECK(lo(x) == mmm::min(a(x), b(x)));
    }
  }
}

TEST_CASE("intersections classify crossings and overlaps", "[pwa]") {
  Interval dom{q("1/2"), q("2/3")};
  // 6x - 5/2 meets the constant 1 at 7/12, transversally
  auto rep = intersections(line(dom, "6", "-5/2"), PiecewiseAffine::constant(dom, Rational(1)));
  REQUIRE(rep.crossings.size() == 1);
  CHECK(rep.crossings[0].x == q("7/12"));
  CHECK(rep.crossings[0].value == Rational(1));
  CHECK(rep.crossings[0].transversal);
  CHECK(rep.overlaps.empty());

  // a function against itself: one overlap, no crossings
  PiecewiseAffine f = line(dom, "3", "-1");
  auto self_rep = intersections(f, f);
  CHECK(self_rep.crossings.empty());
  REQUIRE(self_rep.overlaps.size() == 1);
  CHECK(self_rep.overlaps[0] == dom);

  // x against 1-x on [0,1]
  auto rep2 = intersections(line(unit(), "1", "0"), line(unit(), "-1", "1"));
  REQUIRE(rep2.crossings.size() == 1);
  CHECK(rep2.crossings[0].x == q("1/2"));
  CHECK(rep2.crossings[0].transversal);
}

TEST_CASE("tangential touch is not transversal", "[pwa]") {
  // V-shape touching a horizontal line at its vertex
  PiecewiseAffine v({q("0"), q("1/2"), q("1")},
                    {AffinePiece{q("-1"), q("1/2")}, AffinePiece{q("1"), q("-1/2")}});
  auto rep = intersections(v, PiecewiseAffine::constant(unit(), Rational(0)));
  REQUIRE(rep.crossings.size() == 1);
  CHECK(rep.crossings[0].x == q("1/2"));
  CHECK_FALSE(rep.crossings[0].transversal);
}

TEST_CASE("partial overlap reports both regimes", "[pwa]") {
  // equal on [0,1/2], diverging afterwards
  PiecewiseAffine a({q("0"), q("1/2"), q("1")},
                    {AffinePiece{q("1"), q("0")}, AffinePiece{q("2"), q("-1/2")}});
  PiecewiseAffine b = line(unit(), "1", "0");
  auto rep = intersections(a, b);
  REQUIRE(rep.overlaps.size() == 1);
  CHECK(rep.overlaps[0] == Interval{q("0"), q("1/2")});
  CHECK(rep.crossings.empty());
}

TEST_CASE("pwa equality is canonical-form equality", "[pwa]") {
  PiecewiseAffine f = line(unit(), "1", "0");
  PiecewiseAffine g({q("0"), q("1/3"), q("1")},
                    {AffinePiece{q("1"), q("0")}, AffinePiece{q("1"), q("0")}});
  CHECK(mmm::pwa_equal(f, g));
  CHECK_FALSE(mmm::pwa_equal(line(unit(), "3", "-1"), line(unit(), "3", "-1/2")));
}

TEST_CASE("restrict clips exactly", "[pwa]") {
  PiecewiseAffine f({q("0"), q("1/2"), q("1")},
                    {AffinePiece{q("1"), q("0")}, AffinePiece{q("-1"), q("1")}});
  PiecewiseAffine r = f.restrict({q("1/4"), q("3/4")});
  CHECK(r.domain() == Interval{q("1/4"), q("3/4")});
  CHECK(r(q("1/4")) == q("1/4"));
  CHECK(r(q("3/4")) == q("1/4"));
  CHECK(r.piece_count() == 2);
  PiecewiseAffine s = f.restrict({q("1/2"), q("1")});
  CHECK(s.piece_count() == 1);
  CHECK(s.pieces()[0] == AffinePiece{q("-1"), q("1")});
}
