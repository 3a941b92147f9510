#include <gtest/gtest.h>

#include "botweave/graph_analysis.hpp"
#include "test_util.hpp"

using namespace botweave;

namespace {

FollowGraph complete(std::vector<UserId> ids) {
  FollowGraph g;
  for (UserId a : ids)
    for (UserId b : ids)
      if (a != b) g.edges.push_back({a, b});
  return g;
}

}  // namespace

TEST(Links, CompleteDigraphIsFullyInternal) {
  const auto c = link_composition(complete({1, 2, 3}), {1, 2, 3});
  EXPECT_EQ(c.incoming_total, 6u);
  EXPECT_EQ(c.outgoing_total, 6u);
  EXPECT_DOUBLE_EQ(c.incoming_fraction(), 1.0);
  EXPECT_DOUBLE_EQ(c.outgoing_fraction(), 1.0);
  EXPECT_EQ(c.distinct_followers, 3u);
  EXPECT_EQ(c.distinct_friends, 3u);
}

TEST(Links, NineOfTenInternal) {
  FollowGraph g;
  for (UserId i = 1; i <= 9; ++i) g.edges.push_back({i, 10});
  g.edges.push_back({100, 10});
  const auto c = link_composition(g, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  EXPECT_DOUBLE_EQ(c.incoming_fraction(), 0.9);
  EXPECT_DOUBLE_EQ(c.outgoing_fraction(), 1.0);
}

TEST(Links, EdgelessGraph) {
  const auto c = link_composition(FollowGraph{}, {1, 2});
  EXPECT_EQ(c, LinkComposition{});
  EXPECT_DOUBLE_EQ(c.incoming_fraction(), 0.0);
}

TEST(Links, IntraCountsAgreeOnGeneratedGraph) {
  const Dataset ds = botweave::testing::small_dataset(400, 200);
  IdSet bots;
  for (const auto& u : ds.users)
    if (u.label == Label::bot) bots.insert(u.id);
  const auto c = link_composition(ds.graph, bots);
  EXPECT_EQ(c.incoming_from_botnet, c.outgoing_to_botnet);
  EXPECT_NEAR(c.incoming_fraction(), 0.91, 0.03);
  EXPECT_NEAR(c.outgoing_fraction(), 1.0 / 3.0, 0.03);
}

TEST(Degrees, ConservationAndZeros) {
  FollowGraph g;
  g.edges = {{1, 2}, {1, 3}, {2, 3}, {3, 99}};
  const std::vector<UserId> pop{1, 2, 3, 4};
  const auto h = degree_distributions(g, pop);
  std::uint64_t users = 0, in_sum = 0;
  for (const auto& [d, n] : h.in) users += n, in_sum += d * n;
  EXPECT_EQ(users, pop.size());
  EXPECT_EQ(in_sum, 3u);
  EXPECT_EQ(h.in.at(0), 2u);
  EXPECT_EQ(h.max_in(), 2u);
  EXPECT_EQ(h.max_out(), 2u);
  EXPECT_EQ(h.out.at(0), 1u);
}

TEST(Degrees, GeneratedBotsRespectCaps) {
  const Dataset ds = botweave::testing::small_dataset(400, 200);
  std::vector<UserId> bots;
  for (const auto& u : ds.users)
    if (u.label == Label::bot) bots.push_back(u.id);
  const auto h = degree_distributions(ds.graph, bots);
  EXPECT_LE(h.max_in(), 10u);
  EXPECT_LE(h.max_out(), 31u);
}

TEST(TopFollowed, RanksExternalAccounts) {
  FollowGraph g;
  g.edges = {{1, 50}, {2, 50}, {1, 40}, {1, 2}, {70, 60}};
  const auto top = top_external_followed(g, {1, 2}, 10);
  EXPECT_EQ(top, (std::vector<FollowedAccount>{{50, 2}, {40, 1}}));
  EXPECT_EQ(top_external_followed(g, {1, 2}, 1).size(), 1u);
}

TEST(TopFollowed, TiesByAscendingId) {
  FollowGraph g;
  g.edges = {{1, 9}, {1, 8}, {1, 7}};
  const auto top = top_external_followed(g, {1}, 3);
  EXPECT_EQ(top, (std::vector<FollowedAccount>{{7, 1}, {8, 1}, {9, 1}}));
}

TEST(TopFollowed, EmptyInputs) {
  EXPECT_TRUE(top_external_followed(FollowGraph{}, {1}, 5).empty());
  EXPECT_TRUE(top_external_followed(complete({1, 2}), {}, 5).empty());
}
