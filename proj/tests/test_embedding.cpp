#include <gtest/gtest.h>

#include <random>

#include "amalgam/embedding.hpp"
#include "oracles.hpp"

using namespace amalgam;

namespace {

PartialMap random_map(const Structure& s, const std::vector<int>& dom, std::mt19937_64& rng) {
  std::vector<int> img = s.vertices;
  std::shuffle(img.begin(), img.end(), rng);
  PartialMap m;
  for (std::size_t i = 0; i < dom.size(); ++i) m.vertex_map[dom[i]] = img[i];
  for (const Pair& p : pairs_over(dom)) m.shift[p] = static_cast<int>(rng() & 1);
  return m;
}

}  // namespace

TEST(PartialMaps, ComposeAndInverse) {
  Structure s = generate(Flavor::Example1, 4, 1);
  auto auts = oracle::automorphisms(s, s.vertices);
  ASSERT_GE(auts.size(), 2u);
  for (const auto& f : auts)
    for (const auto& g : auts) {
      PartialMap gf = compose(g, f);
      for (const Element& e : ClosedSet(s.vertices).elements()) EXPECT_EQ(gf.apply(e), g.apply(f.apply(e)));
    }
  for (const auto& f : auts) {
    EXPECT_TRUE(compose(inverse(f), f).is_identity());
    EXPECT_TRUE(compose(f, inverse(f)).is_identity());
  }
}

TEST(PartialMaps, MergeDetectsConflicts) {
  PartialMap a, b;
  a.vertex_map = {{0, 0}, {1, 1}};
  a.shift[{0, 1}] = 1;
  b.vertex_map = {{1, 1}, {2, 2}};
  b.shift[{1, 2}] = 0;
  auto m = merge_maps({a, b});
  ASSERT_TRUE(m.has_value());
  EXPECT_EQ(m->vertex_map.size(), 3u);
  PartialMap c = b;
  c.vertex_map[1] = 2;
  std::string why;
  EXPECT_FALSE(merge_maps({a, c}, &why).has_value());
  EXPECT_FALSE(why.empty());
}

TEST(Elementary, SolverMatchesDirectScan) {
  std::mt19937_64 rng(3);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Flavor fl = seed % 2 ? Flavor::Example2 : Flavor::Example1;
    Structure s = generate(fl, 5, seed);
    for (int trial = 0; trial < 60; ++trial) {
      PartialMap m = random_map(s, {0, 1, 2, 3}, rng);
      EXPECT_EQ(is_elementary(s, m).ok, preserves_Q_scan(s, s, m));
    }
  }
}

TEST(Elementary, FailureNamesATriangle) {
  Structure s = generate(Flavor::Example1, 3, 0);
  PartialMap m = PartialMap::identity(ClosedSet({0, 1, 2}));
  m.shift[{0, 1}] = 1;
  auto v = is_elementary(s, m);
  EXPECT_FALSE(v.ok);
  ASSERT_TRUE(v.triangle.has_value());
  EXPECT_EQ(*v.triangle, (Triple{0, 1, 2}));
}

TEST(Elementary, ExtendToClosureFillsShifts) {
  std::mt19937_64 rng(8);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Structure s = generate(Flavor::Example1, 4, seed);
    auto auts = oracle::automorphisms(s, s.vertices);
    const PartialMap& full = auts[rng() % auts.size()];
    PartialMap part;
    part.vertex_map = full.vertex_map;
    part.shift[{0, 1}] = full.shift.at({0, 1});
    auto ext = extend_to_closure(s, part, ClosedSet(s.vertices));
    EXPECT_TRUE(is_elementary(s, ext.map).ok);
    EXPECT_TRUE(preserves_Q_scan(s, s, ext.map));
    EXPECT_EQ(ext.map.shift.at({0, 1}), full.shift.at({0, 1}));
  }
}

TEST(Elementary, NoExtensionIsReported) {
  Structure s = generate(Flavor::Example1, 3, 0);
  PartialMap m = PartialMap::identity(ClosedSet({0, 1, 2}));
  m.shift[{0, 1}] = 1;
  try {
    extend_to_closure(s, m, ClosedSet({0, 1, 2}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoExtension);
  }
}

TEST(AutGroup, OrderMatchesBruteForce) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Flavor fl = seed % 2 ? Flavor::Example2 : Flavor::Example1;
    Structure s = generate(fl, 5, seed);
    std::vector<Element> fixed{Element::vertex(0), Element::fiber({1, 2}, 0)};
    auto g = aut_group(s, ClosedSet({0, 1, 2, 3}), fixed);
    std::vector<PartialMap> brute;
    for (const auto& m : oracle::automorphisms(induced(s, {0, 1, 2, 3}), {0, 1, 2, 3}))
      if (oracle::fixes(m, fixed)) brute.push_back(m);
    EXPECT_EQ(g.elements, brute);
    for (int i = 0; i < g.order(); ++i) EXPECT_EQ(g.table[i][g.inverse_of(i)], g.identity);
  }
}

TEST(AutGroup, CapRaisesResourceLimit) {
  Structure s = generate(Flavor::Example1, 4, 0);
  try {
    aut_group(s, ClosedSet(s.vertices), {}, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ResourceLimit);
  }
}

TEST(Json, MapRoundTrip) {
  std::mt19937_64 rng(2);
  Structure s = generate(Flavor::Example1, 6, 0);
  for (int trial = 0; trial < 20; ++trial) {
    PartialMap m = random_map(s, {0, 2, 4, 5}, rng);
    EXPECT_EQ(map_from_json(json::parse(map_to_json(m).dump())), m);
  }
  EXPECT_THROW(map_from_json({{"vertex_map", {{0, 1}, {0, 2}}}}), Error);
}
