#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "sufaudit/errors.hpp"
#include "sufaudit/graph.hpp"

using namespace sufaudit;

namespace {

std::string error_of(std::string_view dsl) {
  try {
    parse_graph(dsl);
  } catch (const GraphError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(GraphParse, ChainsLatentAndComments) {
  const auto g = parse_graph("# panel\nA -> B -> C\nlatent U\nU -> A; U -> C\nD\n", "g");
  EXPECT_EQ(g.label(), "g");
  EXPECT_EQ(g.size(), 5u);
  EXPECT_FALSE(g.observed(g.index_of("U")));
  EXPECT_TRUE(g.observed(g.index_of("D")));
  EXPECT_EQ(g.edges().size(), 4u);
  EXPECT_EQ(g.parents(g.index_of("C")).size(), 2u);
}

TEST(GraphParse, CycleIsReportedWithItsPath) {
  EXPECT_EQ(error_of("A -> B\nB -> C\nC -> A"), "cycle detected: A -> B -> C -> A");
  EXPECT_EQ(error_of("A -> A"), "cycle detected: A -> A");
}

TEST(GraphParse, SyntaxErrorsCarryLineNumbers) {
  EXPECT_NE(error_of("A -> B\nA => C").find("line 2"), std::string::npos);
  EXPECT_NE(error_of("A\nA").find("duplicate node declaration"), std::string::npos);
  EXPECT_NE(error_of("A -> B\nA -> B").find("duplicate edge"), std::string::npos);
  EXPECT_NE(error_of("1A -> B").find("line 1"), std::string::npos);
}

TEST(GraphParse, RoundTripsThroughDsl) {
  const auto g = parse_graph("latent C\nC -> X -> Y\nC -> Y\nZ -> X\nW", "rt");
  const auto back = parse_graph(g.to_dsl(), "rt");
  EXPECT_EQ(g, back);
}

TEST(GraphParse, TopologicalOrderIgnoresDeclarationOrder) {
  const auto a = parse_graph("B -> C\nA -> C\nD");
  const auto b = parse_graph("D\nA -> C\nB -> C");
  std::vector<std::string> na;
  std::vector<std::string> nb;
  for (auto i : a.topological_order()) na.push_back(a.name(i));
  for (auto i : b.topological_order()) nb.push_back(b.name(i));
  EXPECT_EQ(na, nb);
  EXPECT_EQ(na, (std::vector<std::string>{"A", "B", "C", "D"}));
}

TEST(DSeparation, ChainForkCollider) {
  const auto chain = parse_graph("A -> B -> C");
  EXPECT_FALSE(d_separated(chain, {"A"}, {"C"}, {}));
  EXPECT_TRUE(d_separated(chain, {"A"}, {"C"}, {"B"}));
  const auto fork = parse_graph("B -> A\nB -> C");
  EXPECT_TRUE(d_separated(fork, {"A"}, {"C"}, {"B"}));
  const auto collider = parse_graph("A -> B\nC -> B\nB -> D");
  EXPECT_TRUE(d_separated(collider, {"A"}, {"C"}, {}));
  EXPECT_FALSE(d_separated(collider, {"A"}, {"C"}, {"B"}));
  EXPECT_FALSE(d_separated(collider, {"A"}, {"C"}, {"D"}));
}

TEST(DSeparation, RejectsOverlappingSets) {
  const auto g = parse_graph("A -> B");
  EXPECT_THROW(d_separated(g, {"A"}, {"A"}, {}), GraphError);
  EXPECT_THROW(d_separated(g, {"A"}, {"B"}, {"B"}), GraphError);
  EXPECT_THROW(d_separated(g, {"A"}, {"Q"}, {}), GraphError);
}

TEST(DSeparation, MatchesPathEnumerationOnRandomDags) {
  std::mt19937_64 rng(20240611);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 7;
    const auto g = oracle::random_dag(rng, n, 0.35);
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) names.push_back(g.name(i));
    std::shuffle(names.begin(), names.end(), rng);
    NodeSet z;
    for (std::size_t i = 2; i < n; ++i) {
      if (rng() % 2) z.insert(names[i]);
    }
    EXPECT_EQ(d_separated(g, {names[0]}, {names[1]}, z), oracle::dsep(g, {names[0]}, {names[1]}, z))
        << g.to_dsl() << " z=" << z.size();
  }
}

TEST(Backdoor, ConfounderAndMediator) {
  const auto g = parse_graph("C -> X -> M -> Y\nC -> Y");
  const auto sets = backdoor_sets(g, "X", "Y");
  ASSERT_FALSE(sets.empty());
  EXPECT_EQ(sets.front(), NodeSet{"C"});
  EXPECT_FALSE(is_backdoor_set(g, "X", "Y", {"M", "C"}));
  EXPECT_FALSE(is_backdoor_set(g, "X", "Y", {}));
}

TEST(Backdoor, LatentConfounderLeavesNothing) {
  const auto g = parse_graph("latent C\nC -> X -> Y\nC -> Y");
  EXPECT_TRUE(backdoor_sets(g, "X", "Y").empty());
}

TEST(Backdoor, EmptySetWhenNoBackdoorPath) {
  const auto g = parse_graph("X -> Y\nW -> Y");
  const auto sets = backdoor_sets(g, "X", "Y");
  ASSERT_FALSE(sets.empty());
  EXPECT_TRUE(sets.front().empty());
}

TEST(Backdoor, MatchesDefinitionOnRandomDags) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t n = 2 + rng() % 7;
    const auto g = oracle::random_dag(rng, n, 0.35, 0.2);
    const std::string t = g.name(rng() % n);
    std::string y = g.name(rng() % n);
    if (t == y) continue;
    EXPECT_EQ(backdoor_sets(g, t, y, 6), oracle::all_backdoor_sets(g, t, y, 6)) << g.to_dsl();
  }
}

TEST(Instrument, TextbookInstrument) {
  const auto g = parse_graph("latent C\nZ -> X -> Y\nC -> X\nC -> Y");
  EXPECT_TRUE(validate_instrument(g, "Z", "X", "Y"));
  const auto direct = parse_graph("latent C\nZ -> X -> Y\nC -> X\nC -> Y\nZ -> Y");
  EXPECT_FALSE(validate_instrument(direct, "Z", "X", "Y"));
  const auto confounded = parse_graph("latent C\nZ -> X -> Y\nC -> X\nC -> Y\nC -> Z");
  EXPECT_FALSE(validate_instrument(confounded, "Z", "X", "Y"));
  const auto irrelevant = parse_graph("Z\nX -> Y");
  EXPECT_FALSE(validate_instrument(irrelevant, "Z", "X", "Y"));
}

// A valid instrument can still be a member of a minimal backdoor set: here
// {W, Z} blocks X <- W <- C -> Y only together (W alone opens Z -> W <- C)
// yet Z stays a valid instrument.
TEST(Instrument, CanBelongToAMinimalBackdoorSet) {
  const auto g = parse_graph("latent C\nZ -> X -> Y\nZ -> W\nC -> W\nC -> Y\nW -> X");
  EXPECT_TRUE(validate_instrument(g, "Z", "X", "Y"));
  EXPECT_TRUE(is_backdoor_set(g, "X", "Y", {"W", "Z"}));
  EXPECT_FALSE(is_backdoor_set(g, "X", "Y", {"W"}));
  EXPECT_FALSE(is_backdoor_set(g, "X", "Y", {"Z"}));
}

// When {Z} alone is a minimal backdoor set, Z lies on an open backdoor path and
// cannot be an instrument.
TEST(Instrument, SoleMinimalBackdoorMemberIsNeverValid) {
  std::mt19937_64 rng(5);
  int checked = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 3 + rng() % 6;
    const auto g = oracle::random_dag(rng, n, 0.4, 0.2);
    const std::string t = g.name(rng() % n);
    const std::string y = g.name(rng() % n);
    if (t == y || is_backdoor_set(g, t, y, {})) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const std::string z = g.name(i);
      if (z == t || z == y || !g.observed(i)) continue;
      if (oracle::backdoor(g, t, y, {z})) {
        ++checked;
        EXPECT_FALSE(validate_instrument(g, z, t, y)) << g.to_dsl();
      }
    }
  }
  EXPECT_GT(checked, 50);
}
