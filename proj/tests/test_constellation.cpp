#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "apsk/constellation.hpp"

using namespace apsk;

namespace {

GeneVector random_genes(const RingLayout& layout, SymmetryMode sym,
                        std::mt19937_64& rng) {
  const auto bounds = gene_bounds(layout, sym);
  std::vector<double> flat(bounds.size());
  for (std::size_t i = 0; i < flat.size(); ++i) {
    std::uniform_real_distribution<double> u(bounds[i].lo, bounds[i].hi);
    flat[i] = u(rng);
    if (sym == SymmetryMode::kNone && i >= flat.size() - layout.order() &&
        flat[i] >= kTwoPi)
      flat[i] = 0.0;
  }
  return GeneVector::from_flat(layout, sym, flat);
}

const ConstellationPoint& point_with_value(const Constellation& c, int value) {
  for (const auto& p : c.points)
    if (p.value == value) return p;
  REQUIRE(false);
  return c.points.front();  // unreachable
}

}  // namespace

TEST_CASE("layout strings and order") {
  CHECK(RingLayout::apsk16().order() == 16);
  CHECK(RingLayout::apsk32().order() == 32);
  CHECK(to_string(RingLayout::apsk16()) == "4+12");
  CHECK(to_string(RingLayout::apsk32()) == "4+12+16");
  CHECK(layout_from_string("16apsk") == RingLayout::apsk16());
  CHECK(layout_from_string("32apsk") == RingLayout::apsk32());
  CHECK(layout_from_string("4+12") == RingLayout::apsk16());
  CHECK(layout_from_string("4+12+16") == RingLayout::apsk32());
  CHECK_THROWS_AS(layout_from_string("4+13"), std::invalid_argument);  // order 17
  CHECK_THROWS_AS(layout_from_string("nope"), std::invalid_argument);
  CHECK_THROWS_AS(layout_from_string(""), std::invalid_argument);
  CHECK_THROWS_AS(check_layout(RingLayout{{4, -4}}), std::invalid_argument);
}

TEST_CASE("symmetry fold and phase ranges") {
  CHECK(fold(SymmetryMode::kDouble) == 4);
  CHECK(fold(SymmetryMode::kSingle) == 2);
  CHECK(fold(SymmetryMode::kNone) == 1);
  CHECK(phase_upper(SymmetryMode::kDouble) == doctest::Approx(kPi / 2));
  CHECK(phase_upper(SymmetryMode::kSingle) == doctest::Approx(kPi));
  CHECK(phase_upper(SymmetryMode::kNone) == doctest::Approx(kTwoPi));
  CHECK(symmetry_from_string("double") == SymmetryMode::kDouble);
  CHECK(symmetry_from_string("none") == SymmetryMode::kNone);
  CHECK_THROWS_AS(symmetry_from_string("full"), std::invalid_argument);
}

TEST_CASE("gene counts per layout and symmetry") {
  // (n_rings - 1) radii plus order/fold phases.
  const RingLayout l16 = RingLayout::apsk16();
  const RingLayout l32 = RingLayout::apsk32();
  CHECK(gene_bounds(l16, SymmetryMode::kDouble).size() == 5);
  CHECK(gene_bounds(l16, SymmetryMode::kSingle).size() == 9);
  CHECK(gene_bounds(l16, SymmetryMode::kNone).size() == 17);
  CHECK(gene_bounds(l32, SymmetryMode::kDouble).size() == 10);
  CHECK(gene_bounds(l32, SymmetryMode::kSingle).size() == 18);
  CHECK(gene_bounds(l32, SymmetryMode::kNone).size() == 34);
}

TEST_CASE("gene bounds keep radii off the ring limits") {
  const auto bounds = gene_bounds(RingLayout::apsk32(), SymmetryMode::kSingle);
  CHECK(bounds[0].lo == doctest::Approx(1e-3));
  CHECK(bounds[0].hi == doctest::Approx(1.0 - 1e-3));
  CHECK(bounds[1].lo == doctest::Approx(1e-3));
  CHECK(bounds[2].lo == 0.0);
  CHECK(bounds[2].hi == doctest::Approx(kPi));
}

TEST_CASE("double symmetry mirrors a phase gene into all four quadrants") {
  GeneVector g;
  g.layout = RingLayout::apsk16();
  g.symmetry = SymmetryMode::kDouble;
  g.radii = {0.8996};
  g.phases = {1.0360, 0.8867, 0.5802, 0.4013};
  const Constellation c = expand(g);
  REQUIRE(c.points.size() == 16);
  CHECK(validate(c).empty());

  // Base gene 0 sits on the inner ring; its mirrors take values 4, 8, 12.
  CHECK(point_with_value(c, 0).phase == doctest::Approx(1.0360).epsilon(1e-12));
  CHECK(point_with_value(c, 4).phase ==
        doctest::Approx(2.105592653589793).epsilon(1e-12));
  CHECK(point_with_value(c, 8).phase ==
        doctest::Approx(kPi + 1.0360).epsilon(1e-12));
  CHECK(point_with_value(c, 12).phase ==
        doctest::Approx(kTwoPi - 1.0360).epsilon(1e-12));
  for (int v : {0, 4, 8, 12}) {
    CHECK(point_with_value(c, v).ring == 0);
    CHECK(point_with_value(c, v).radius == doctest::Approx(0.8996));
  }
  // Outer-ring base genes 1..3 mirror to value blocks offset by 4.
  CHECK(point_with_value(c, 1).phase == doctest::Approx(0.8867));
  CHECK(point_with_value(c, 5).phase == doctest::Approx(kPi - 0.8867));
  CHECK(point_with_value(c, 9).phase == doctest::Approx(kPi + 0.8867));
  CHECK(point_with_value(c, 13).phase == doctest::Approx(kTwoPi - 0.8867));
  CHECK(point_with_value(c, 1).radius == doctest::Approx(1.0));
}

TEST_CASE("single symmetry mirrors across the x axis only") {
  GeneVector g;
  g.layout = RingLayout::apsk16();
  g.symmetry = SymmetryMode::kSingle;
  g.radii = {0.9627};
  g.phases = {2.5650, 2.3592, 2.0128, 1.7317, 1.4188, 1.2107, 0.8849, 0.5372};
  const Constellation c = expand(g);
  CHECK(validate(c).empty());
  CHECK(point_with_value(c, 0).phase == doctest::Approx(2.5650));
  CHECK(point_with_value(c, 8).phase ==
        doctest::Approx(3.7181853071795863).epsilon(1e-12));
  CHECK(point_with_value(c, 2).phase == doctest::Approx(2.0128));
  CHECK(point_with_value(c, 10).phase == doctest::Approx(kTwoPi - 2.0128));
  // Inner ring holds base genes 0 and 1 plus their mirrors.
  for (int v : {0, 1, 8, 9}) CHECK(point_with_value(c, v).ring == 0);
  for (int v : {2, 7, 10, 15}) CHECK(point_with_value(c, v).ring == 1);
}

TEST_CASE("no symmetry is the identity encoding") {
  const Constellation ref = reference_constellation(RingLayout::apsk16(), {0.5});
  GeneVector g;
  g.layout = ref.layout;
  g.symmetry = SymmetryMode::kNone;
  g.radii = {0.5};
  g.phases.resize(16);
  for (const auto& p : ref.points) g.phases[p.value] = p.phase;
  const Constellation c = expand(g);
  REQUIRE(validate(c).empty());
  for (int v = 0; v < 16; ++v) {
    CHECK(point_with_value(c, v).phase ==
          doctest::Approx(point_with_value(ref, v).phase).epsilon(1e-12));
    CHECK(point_with_value(c, v).ring == point_with_value(ref, v).ring);
  }
}

TEST_CASE("expanded labels partition the alphabet for every mode") {
  std::mt19937_64 rng(7);
  for (const RingLayout& layout : {RingLayout::apsk16(), RingLayout::apsk32()}) {
    for (SymmetryMode sym : {SymmetryMode::kDouble, SymmetryMode::kSingle,
                             SymmetryMode::kNone}) {
      for (int trial = 0; trial < 20; ++trial) {
        const Constellation c = expand(random_genes(layout, sym, rng));
        CHECK(validate(c).empty());
        std::set<int> values;
        for (const auto& p : c.points) values.insert(p.value);
        CHECK(values.size() == static_cast<std::size_t>(layout.order()));
      }
    }
  }
}

TEST_CASE("double symmetry yields mirror-symmetric point sets") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const Constellation c =
        expand(random_genes(RingLayout::apsk16(), SymmetryMode::kDouble, rng));
    for (const auto& p : c.points) {
      const double x = p.radius * std::cos(p.phase);
      const double y = p.radius * std::sin(p.phase);
      bool found_x_mirror = false, found_y_mirror = false;
      for (const auto& q : c.points) {
        const double qx = q.radius * std::cos(q.phase);
        const double qy = q.radius * std::sin(q.phase);
        if (std::abs(qx - x) < 1e-9 && std::abs(qy + y) < 1e-9)
          found_x_mirror = true;
        if (std::abs(qx + x) < 1e-9 && std::abs(qy - y) < 1e-9)
          found_y_mirror = true;
      }
      CHECK(found_x_mirror);
      CHECK(found_y_mirror);
    }
  }
}

TEST_CASE("from_flat sorts radius genes ascending") {
  const GeneVector g = GeneVector::from_flat(
      RingLayout::apsk32(), SymmetryMode::kDouble,
      {0.8, 0.2, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8});
  CHECK(g.radii == std::vector<double>{0.2, 0.8});
  CHECK(g.phases.size() == 8);
  CHECK_THROWS_AS(GeneVector::from_flat(RingLayout::apsk16(),
                                        SymmetryMode::kDouble, {0.5, 0.1}),
                  std::invalid_argument);
}

TEST_CASE("expand rejects malformed gene vectors") {
  GeneVector g;
  g.layout = RingLayout::apsk16();
  g.symmetry = SymmetryMode::kDouble;
  g.radii = {0.5};
  g.phases = {0.1, 0.2, 0.3};  // one phase short
  CHECK_THROWS_WITH_AS(expand(g), doctest::Contains("phase genes"),
                       std::invalid_argument);
  g.phases = {0.1, 0.2, 0.3, 2.0};  // above pi/2
  CHECK_THROWS_WITH_AS(expand(g), doctest::Contains("phase gene 3"),
                       std::invalid_argument);
  g.phases = {0.1, 0.2, 0.3, 0.4};
  g.radii = {1.5};
  CHECK_THROWS_WITH_AS(expand(g), doctest::Contains("radius gene 0"),
                       std::invalid_argument);
  g.radii = {};
  CHECK_THROWS_WITH_AS(expand(g), doctest::Contains("radius genes"),
                       std::invalid_argument);
}

TEST_CASE("validate reports each violation") {
  Constellation c = reference_constellation(RingLayout::apsk16(), {0.5});
  CHECK(validate(c).empty());

  Constellation dup = c;
  dup.points[5].value = 3;
  const auto v1 = validate(dup);
  REQUIRE(!v1.empty());
  bool saw_dup = false, saw_missing = false;
  for (const auto& m : v1) {
    if (m.find("duplicate label 3") != std::string::npos) saw_dup = true;
    if (m.find("missing label 5") != std::string::npos) saw_missing = true;
  }
  CHECK(saw_dup);
  CHECK(saw_missing);

  Constellation shrunk = c;
  for (auto& p : shrunk.points)
    if (p.ring == 1) p.radius = 0.9;
  const auto v2 = validate(shrunk);
  REQUIRE(!v2.empty());
  CHECK(v2.front().find("outer radius != 1") != std::string::npos);

  Constellation moved = c;
  moved.points[0].ring = 1;
  moved.points[0].radius = 1.0;
  const auto v3 = validate(moved);
  bool saw_count = false;
  for (const auto& m : v3)
    if (m.find("expected") != std::string::npos) saw_count = true;
  CHECK(saw_count);
}

TEST_CASE("reference constellation offsets each ring by half a slot") {
  const Constellation c = reference_constellation(RingLayout::apsk16(), {0.5});
  REQUIRE(validate(c).empty());
  CHECK(point_with_value(c, 0).phase == doctest::Approx(kPi / 4).epsilon(1e-12));
  CHECK(point_with_value(c, 1).phase ==
        doctest::Approx(kPi / 4 + kPi / 2).epsilon(1e-12));
  CHECK(point_with_value(c, 4).phase == doctest::Approx(kPi / 12).epsilon(1e-12));
  CHECK(point_with_value(c, 5).phase ==
        doctest::Approx(kPi / 12 + kPi / 6).epsilon(1e-12));
  CHECK_THROWS_AS(reference_constellation(RingLayout::apsk16(), {1.5}),
                  std::invalid_argument);
  CHECK_THROWS_AS(reference_constellation(RingLayout::apsk32(), {0.8, 0.2}),
                  std::invalid_argument);
}

TEST_CASE("document round trip preserves every point to 1e-12") {
  std::mt19937_64 rng(23);
  for (const RingLayout& layout : {RingLayout::apsk16(), RingLayout::apsk32()}) {
    for (SymmetryMode sym : {SymmetryMode::kDouble, SymmetryMode::kSingle,
                             SymmetryMode::kNone}) {
      const Constellation c = expand(random_genes(layout, sym, rng));
      const Constellation back = from_record(to_record(c));
      REQUIRE(back.points.size() == c.points.size());
      CHECK(back.layout == c.layout);
      CHECK(back.symmetry == sym);
      for (std::size_t i = 0; i < c.points.size(); ++i) {
        CHECK(back.points[i].ring == c.points[i].ring);
        CHECK(back.points[i].value == c.points[i].value);
        CHECK(std::abs(back.points[i].radius - c.points[i].radius) <= 1e-12);
        CHECK(std::abs(back.points[i].phase - c.points[i].phase) <= 1e-12);
      }
    }
  }
}

TEST_CASE("document parser reports line and field on failure") {
  const Constellation c = reference_constellation(RingLayout::apsk16(), {0.5});
  std::string good = to_record(c);

  SUBCASE("missing value field") {
    std::string bad = good;
    const auto pos = bad.find(" value=0");
    bad.erase(pos, 8);
    CHECK_THROWS_WITH_AS(from_record(bad), doctest::Contains("value"), ParseError);
  }
  SUBCASE("bad number") {
    std::string bad = good;
    const auto pos = bad.find("radius=");
    bad.replace(pos, bad.find(' ', pos) - pos, "radius=x.yz");
    CHECK_THROWS_WITH_AS(from_record(bad), doctest::Contains("bad number"),
                         ParseError);
  }
  SUBCASE("unknown key") {
    CHECK_THROWS_WITH_AS(from_record("layout 4+12\nsymmetry none\nwhat 3\n"),
                         doctest::Contains("unknown key"), ParseError);
  }
  SUBCASE("declared point count mismatch") {
    std::string bad = good;
    bad.replace(bad.find("points 16"), 9, "points 15");
    CHECK_THROWS_WITH_AS(from_record(bad), doctest::Contains("declared"),
                         ParseError);
  }
  SUBCASE("missing header lines") {
    CHECK_THROWS_AS(from_record(std::string("symmetry none\n")), ParseError);
    CHECK_THROWS_AS(from_record(std::string("layout 4+12\n")), ParseError);
  }
  SUBCASE("inconsistent geometry is rejected after parsing") {
    std::string bad = good;
    bad.replace(bad.find("value=0"), 7, "value=1");
    CHECK_THROWS_WITH_AS(from_record(bad), doctest::Contains("duplicate label 1"),
                         ParseError);
  }
  SUBCASE("comments and blank lines are skipped") {
    const Constellation back =
        from_record("# header\n\n" + good + "# trailing comment\n");
    CHECK(back.points.size() == 16);
  }
}
