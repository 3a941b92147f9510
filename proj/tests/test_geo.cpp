#include <gtest/gtest.h>

#include <random>

#include "botweave/geo.hpp"
#include "botweave/rng.hpp"
#include "botweave/stats.hpp"

using namespace botweave;

namespace {

UserRecord geo_user(UserId id, Label label, std::vector<GeoPoint> points) {
  UserRecord u;
  u.id = id;
  u.screen_name = "g" + std::to_string(id);
  u.language = "en";
  u.label = label;
  u.created_at = make_date(2013, 1, 1);
  Timestamp ts = make_date(2013, 2, 1);
  for (const GeoPoint& p : points) {
    u.tweets.push_back({"x", ts, TweetSource::other, p});
    ts += std::chrono::hours(1);
  }
  return u;
}

// Fills every cell in [lat0, lat1) x [lon0, lon1) with `n` tweets.
void fill_block(GeoGrid& g, int lat0, int lat1, int lon0, int lon1, std::uint64_t n) {
  for (int la = lat0; la < lat1; ++la)
    for (int lo = lon0; lo < lon1; ++lo) g.add(CellKey{la, lo}, n);
}

}  // namespace

TEST(Cells, FloorBinning) {
  EXPECT_EQ(cell_of({10.5, -3.2}), (CellKey{10, -4}));
  EXPECT_EQ(cell_of({-0.1, 0.0}), (CellKey{-1, 0}));
  EXPECT_EQ(cell_of({90.0, 180.0}), (CellKey{89, 179}));
  EXPECT_EQ(cell_of({-90.0, -180.0}), (CellKey{-90, -180}));
}

TEST(Cells, BinTweetsSkipsUntagged) {
  UserRecord u = geo_user(1, Label::real, {{1.5, 1.5}, {1.2, 1.9}, {5, 5}});
  u.tweets.push_back({"no geo", make_date(2014, 1, 1), TweetSource::other, std::nullopt});
  const GeoGrid g = bin_tweets(std::vector<UserRecord>{u});
  EXPECT_EQ(g.total(), 3u);
  EXPECT_EQ(g.count({1, 1}), 2u);
  EXPECT_EQ(g.count({5, 5}), 1u);
}

TEST(Haversine, KnownDistances) {
  EXPECT_NEAR(haversine_km({0, 0}, {0, 180}), 20015.086796020572, 0.01);
  EXPECT_NEAR(haversine_km({0, 0}, {90, 0}), 10007.543398010286, 0.01);
  EXPECT_DOUBLE_EQ(haversine_km({12.3, 45.6}, {12.3, 45.6}), 0.0);
}

TEST(Haversine, SymmetricAndTriangleInequality) {
  Rng rng = make_rng(1, "haversine");
  std::uniform_real_distribution<double> lat(-90, 90), lon(-180, 180);
  for (int i = 0; i < 2000; ++i) {
    const GeoPoint a{lat(rng), lon(rng)}, b{lat(rng), lon(rng)}, c{lat(rng), lon(rng)};
    const double ab = haversine_km(a, b);
    EXPECT_NEAR(ab, haversine_km(b, a), 1e-9);
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 20015.09);
    EXPECT_LE(ab, haversine_km(a, c) + haversine_km(c, b) + 1e-6);
  }
}

TEST(Haversine, DestinationRoundTrip) {
  Rng rng = make_rng(2, "destination");
  std::uniform_real_distribution<double> lat(-80, 80), lon(-180, 180), bearing(0, 6.283185307179586),
      dist(0, 5000);
  for (int i = 0; i < 1000; ++i) {
    const GeoPoint a{lat(rng), lon(rng)};
    const double d = dist(rng);
    const GeoPoint b = destination_point(a, bearing(rng), d);
    ASSERT_TRUE(b.valid());
    EXPECT_NEAR(haversine_km(a, b), d, 1e-6 * std::max(1.0, d));
  }
}

TEST(Mobility, ConsecutiveMeansPerUser) {
  const double quarter = haversine_km({0, 0}, {0, 90});
  std::vector<UserRecord> users{
      geo_user(3, Label::bot, {{0, 0}, {0, 90}, {0, 0}}),
      geo_user(1, Label::real, {{10, 10}, {10, 10}}),
      geo_user(2, Label::real, {{10, 10}}),
  };
  const auto s = consecutive_distance_stats(users);
  ASSERT_EQ(s.per_user.size(), 2u);
  EXPECT_EQ(s.per_user[0].id, 1u);
  EXPECT_DOUBLE_EQ(s.per_user[0].mean_km, 0.0);
  EXPECT_EQ(s.per_user[1].id, 3u);
  EXPECT_EQ(s.per_user[1].pairs, 2u);
  EXPECT_NEAR(s.per_user[1].mean_km, quarter, 1e-9);
  EXPECT_EQ(s.bots.total(), 1u);
  EXPECT_EQ(s.reals.total(), 1u);
  EXPECT_EQ(s.reals.counts.front(), 1u);
}

TEST(Mobility, CustomPopulationOverridesLabels) {
  std::vector<UserRecord> users{geo_user(1, Label::real, {{0, 0}, {1, 1}})};
  const auto s = consecutive_distance_stats(users, [](const UserRecord&) { return Label::bot; });
  EXPECT_EQ(s.bots.total(), 1u);
  EXPECT_EQ(s.reals.total(), 0u);
}

TEST(Detect, EmptyGridHasNoRegions) {
  EXPECT_TRUE(detect_rectangles(GeoGrid{}).empty());
}

TEST(Detect, RecoversConstructedBlock) {
  GeoGrid g;
  fill_block(g, 30, 60, -120, -60, 3);
  const auto r = detect_rectangles(g);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].bounds, (GeoRect{30, 60, -120, -60}));
  EXPECT_EQ(r[0].n_cells, 1800u);
  EXPECT_DOUBLE_EQ(r[0].fill_ratio, 1.0);
  EXPECT_DOUBLE_EQ(r[0].mean_count, 3.0);
}

TEST(Detect, DenseCellsAreNotAnomalous) {
  GeoGrid g;
  fill_block(g, 0, 20, 0, 20, 50);
  EXPECT_TRUE(detect_rectangles(g).empty());
}

TEST(Detect, SmallOrSparseComponentsAreDropped) {
  GeoGrid g;
  fill_block(g, 0, 5, 0, 5, 2);  // 25 cells
  for (int i = 0; i < 200; ++i) g.add(CellKey{20 + 2 * (i / 20), 2 * (i % 20)});  // isolated cells
  EXPECT_TRUE(detect_rectangles(g).empty());
}

TEST(Detect, HollowRingFailsFill) {
  GeoGrid g;
  for (int la = 0; la < 40; ++la)
    for (int lo = 0; lo < 40; ++lo)
      if (la < 2 || la >= 38 || lo < 2 || lo >= 38) g.add(CellKey{la, lo}, 2);
  DetectOptions opts;
  EXPECT_TRUE(detect_rectangles(g, nullptr, opts).empty());
  opts.min_fill = 0.0;
  EXPECT_EQ(detect_rectangles(g, nullptr, opts).size(), 1u);
}

TEST(Detect, BaselineMasksInhabitedCells) {
  GeoGrid g, baseline;
  fill_block(g, 0, 20, 0, 20, 2);
  fill_block(baseline, 0, 20, 0, 10, 1);
  const auto r = detect_rectangles(g, &baseline);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].bounds, (GeoRect{0, 20, 10, 20}));
  EXPECT_EQ(r[0].n_cells, 200u);
}

TEST(Detect, BaselineHolesDoNotCountAgainstFill) {
  GeoGrid g, baseline;
  fill_block(g, 0, 20, 0, 20, 2);
  baseline.add(CellKey{10, 10}, 5);
  const auto r = detect_rectangles(g, &baseline);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].n_cells, 399u);
  EXPECT_DOUBLE_EQ(r[0].fill_ratio, 1.0);
}

TEST(Uniformity, EqualCountsGiveZeroStatistic) {
  GeoGrid g;
  fill_block(g, 0, 10, 0, 10, 7);
  const auto r = uniformity_test(g, {0, 10, 0, 10});
  EXPECT_EQ(r.cells, 100u);
  EXPECT_EQ(r.dof, 99u);
  EXPECT_DOUBLE_EQ(r.statistic, 0.0);
  EXPECT_DOUBLE_EQ(r.p_value, 1.0);
}

TEST(Uniformity, ConcentratedCountsAreRejected) {
  GeoGrid g;
  fill_block(g, 0, 10, 0, 10, 5);
  g.add(CellKey{3, 3}, 500);
  EXPECT_LT(uniformity_test(g, {0, 10, 0, 10}).p_value, 1e-6);
}

TEST(Uniformity, Preconditions) {
  GeoGrid g;
  fill_block(g, 0, 10, 0, 10, 1);
  EXPECT_THROW(uniformity_test(g, {0, 10, 0, 10}), PreconditionError);
  EXPECT_THROW(uniformity_test(g, {0.5, 1.5, 0.5, 1.5}), PreconditionError);
}

TEST(Uniformity, ChiSquareTail) {
  EXPECT_NEAR(chi_square_sf(3.841459, 1), 0.05, 1e-6);
  EXPECT_NEAR(chi_square_sf(18.307, 10), 0.05, 1e-4);
  EXPECT_DOUBLE_EQ(chi_square_sf(0.0, 5), 1.0);
  // dof = 2 has the closed form exp(-x/2).
  for (double x : {0.5, 1.0, 4.0, 11.0}) EXPECT_NEAR(chi_square_sf(x, 2), std::exp(-x / 2), 1e-12);
}

TEST(RectSplit, CountsCornersAndOutliers) {
  const std::pair<GeoRect, GeoRect> rects{{0, 10, 0, 10}, {20, 30, 20, 30}};
  std::vector<UserRecord> users{geo_user(1, Label::bot, {{0, 0}, {10, 10}, {25, 25}, {15, 15}})};
  EXPECT_EQ(rect_split_stats(users, rects), (RectSplit{2, 1, 1}));
}

TEST(RectSplit, OverlapIsAConfigError) {
  const std::pair<GeoRect, GeoRect> rects{{0, 10, 0, 10}, {5, 15, 5, 15}};
  EXPECT_THROW(rect_split_stats(std::vector<UserRecord>{}, rects), ConfigError);
}

TEST(Shape, Unimodality) {
  const std::vector<std::uint64_t> hump{1, 10, 100, 400, 100, 10, 1};
  const std::vector<std::uint64_t> twin{1, 400, 10, 10, 400, 1};
  const std::vector<std::uint64_t> noisy{100, 210, 300, 295, 200, 100};
  EXPECT_TRUE(is_unimodal(hump));
  EXPECT_FALSE(is_unimodal(twin));
  EXPECT_TRUE(is_unimodal(noisy));
  EXPECT_FALSE(is_unimodal(std::vector<std::uint64_t>{}));
}

TEST(Shape, ParetoTailIsStraightOnLogLog) {
  Rng rng = make_rng(3, "pareto");
  std::vector<double> v;
  for (int i = 0; i < 20000; ++i) v.push_back(std::pow(1.0 - uniform01(rng), -1.0 / 1.5));
  const auto fit = loglog_tail_fit(v, 0.2);
  EXPECT_GT(fit.r_squared, 0.98);
  EXPECT_NEAR(fit.slope, -1.5, 0.15);
}

TEST(Shape, LeastSquaresExactLine) {
  const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
  const auto fit = least_squares(x, y);
  EXPECT_DOUBLE_EQ(fit.slope, 2.0);
  EXPECT_DOUBLE_EQ(fit.intercept, 1.0);
  EXPECT_DOUBLE_EQ(fit.r_squared, 1.0);
}

TEST(Shape, HistogramBins) {
  auto h = Histogram::with_edges({0, 1, 10});
  for (double x : {0.0, 0.5, 1.0, 9.9, 1e6}) h.add(x);
  EXPECT_EQ(h.counts, (std::vector<std::uint64_t>{2, 3}));
  EXPECT_EQ(h.total(), 5u);
}
