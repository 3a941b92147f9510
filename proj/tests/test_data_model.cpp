#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "botweave/dataset_io.hpp"
#include "test_util.hpp"

using namespace botweave;
using botweave::testing::TempDir;

namespace {

UserRecord plain_user(UserId id) {
  UserRecord u;
  u.id = id;
  u.screen_name = "u" + std::to_string(id);
  u.language = "en";
  u.created_at = make_date(2013, 7, 1);
  u.tweets.push_back({"hello there", make_date(2013, 7, 2), TweetSource::web_client, std::nullopt});
  return u;
}

bool has_rule(const std::vector<Violation>& v, const std::string& rule) {
  return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.rule == rule; });
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Labels, RoundTripThroughText) {
  for (Label l : {Label::bot, Label::real, Label::unknown}) EXPECT_EQ(parse_label(to_string(l)), l);
  EXPECT_FALSE(parse_label("human"));
}

TEST(Sources, RoundTripThroughText) {
  for (TweetSource s : kAllSources) EXPECT_EQ(parse_source(to_string(s)), s);
  EXPECT_FALSE(parse_source("Twitter for Palm"));
}

TEST(GeoRectTest, MembershipIsClosed) {
  const GeoRect r{10, 20, 30, 40};
  EXPECT_TRUE(r.contains({10, 30}));
  EXPECT_TRUE(r.contains({20, 40}));
  EXPECT_FALSE(r.contains({20.0001, 35}));
}

TEST(GeoRectTest, Jaccard) {
  const GeoRect a{0, 10, 0, 10};
  EXPECT_DOUBLE_EQ(jaccard(a, a), 1.0);
  EXPECT_DOUBLE_EQ(jaccard(a, {20, 30, 20, 30}), 0.0);
  // Half-shifted copy: intersection 50, union 150.
  EXPECT_DOUBLE_EQ(jaccard(a, {0, 10, 5, 15}), 1.0 / 3.0);
}

TEST(Timestamps, FormatAndParseRoundTrip) {
  const Timestamp t = make_date(2013, 6, 20) + std::chrono::seconds(3723);
  EXPECT_EQ(format_iso8601(t), "2013-06-20T01:02:03Z");
  EXPECT_EQ(parse_iso8601("2013-06-20T01:02:03Z"), t);
  EXPECT_THROW(parse_iso8601("2013-02-30T00:00:00Z"), std::invalid_argument);
  EXPECT_THROW(parse_iso8601("2013-06-20 01:02:03"), std::invalid_argument);
}

TEST(Validation, AcceptsWellFormedDataset) {
  Dataset ds;
  ds.users = {plain_user(1), plain_user(2)};
  ds.graph.edges = {{1, 2}, {2, 1}, {1, 99}};
  EXPECT_TRUE(validate_dataset(ds).empty());
}

TEST(Validation, FlagsEveryBrokenInvariant) {
  Dataset ds;
  UserRecord a = plain_user(5);
  a.tweets[0].text = "";
  UserRecord b = plain_user(6);
  b.tweets[0].text = std::string(281, 'x');
  UserRecord c = plain_user(7);
  c.tweets[0].geo = GeoPoint{91.0, 0.0};
  UserRecord d = plain_user(8);
  d.tweets.push_back(d.tweets[0]);  // same timestamp twice
  UserRecord e = plain_user(0);
  ds.users = {a, b, c, d, e, plain_user(5)};
  ds.graph.edges = {{3, 3}, {1, 2}, {1, 2}, {0, 4}};
  const auto v = validate_dataset(ds);
  for (const char* rule : {"tweet_text_nonempty", "tweet_text_length", "geo_range", "tweets_ordered",
                           "user_id_positive", "user_id_unique", "edge_no_self_loop", "edge_unique",
                           "edge_endpoint_positive"})
    EXPECT_TRUE(has_rule(v, rule)) << rule;
}

TEST(Validation, LengthCountsCodePointsNotBytes) {
  Dataset ds;
  UserRecord u = plain_user(1);
  std::string text;
  for (int i = 0; i < 280; ++i) text += "\xC3\xA9";  // 280 two-byte characters
  u.tweets[0].text = text;
  ds.users = {u};
  EXPECT_TRUE(validate_dataset(ds).empty());
  ds.users[0].tweets[0].text += "x";
  EXPECT_TRUE(has_rule(validate_dataset(ds), "tweet_text_length"));
}

TEST(DatasetIo, SaveLoadRoundTripIsExact) {
  TempDir dir("roundtrip");
  const Dataset ds = botweave::testing::small_dataset(40, 60);
  save_dataset(ds, dir.path());
  const Dataset back = load_dataset(dir.path());
  EXPECT_EQ(back, ds);
}

TEST(DatasetIo, UnlabeledLoadDropsLabels) {
  TempDir dir("nolabels");
  save_dataset(botweave::testing::small_dataset(10, 10), dir.path());
  const Dataset ds = load_dataset(dir.path(), LoadOptions{.keep_labels = false});
  for (const auto& u : ds.users) EXPECT_FALSE(u.label.has_value());
}

TEST(DatasetIo, FileLayout) {
  TempDir dir("layout");
  Dataset ds;
  ds.users = {plain_user(3), plain_user(1)};
  ds.graph.edges = {{3, 1}, {1, 3}};
  ds.meta = {{"seed", "7"}};
  save_dataset(ds, dir.path());
  const std::string users = slurp(dir.path() / "users.ndjson");
  EXPECT_EQ(users.substr(0, 7), "{\"id\":1");
  EXPECT_NE(users.find("\"screen_name\":\"u1\",\"lang\":\"en\",\"created_at\":\"2013-07-01T00:00:00Z\""),
            std::string::npos);
  EXPECT_EQ(slurp(dir.path() / "edges.tsv"), "follower\tfriend\n1\t3\n3\t1\n");
  const std::string meta = slurp(dir.path() / "meta.toml");
  EXPECT_EQ(meta.substr(0, meta.find('\n')), "format = \"botweave-dataset-1\"");
  EXPECT_NE(meta.find("seed = 7"), std::string::npos);
}

TEST(DatasetIo, MalformedRecordNamesLineAndField) {
  try {
    user_from_json_line(R"({"id": 4, "screen_name": "x", "lang": "en"})", 17);
    FAIL() << "expected DatasetError";
  } catch (const DatasetError& e) {
    EXPECT_NE(std::string(e.what()).find("users.ndjson:17"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("created_at"), std::string::npos);
  }
}

TEST(DatasetIo, OutOfRangeLatitudeNamesUser) {
  const std::string line =
      R"({"id":42,"screen_name":"x","lang":"en","created_at":"2013-07-01T00:00:00Z","followers_count":0,)"
      R"("friends_count":0,"tweets":[{"text":"t","ts":"2013-07-02T00:00:00Z","source":"Other","lat":95.0,"lon":1.0}]})";
  try {
    user_from_json_line(line, 1);
    FAIL() << "expected DatasetError";
  } catch (const DatasetError& e) {
    EXPECT_NE(std::string(e.what()).find("user 42"), std::string::npos);
  }
}

TEST(DatasetIo, DuplicateIdsAreRejectedOnLoad) {
  TempDir dir("dup");
  save_dataset(Dataset{{plain_user(1)}, {}, {}}, dir.path());
  const std::string line = slurp(dir.path() / "users.ndjson");
  std::ofstream(dir.path() / "users.ndjson", std::ios::app) << line;
  EXPECT_THROW(load_dataset(dir.path()), DatasetError);
}

TEST(DatasetIo, MissingDirectoryIsAnIoError) {
  EXPECT_THROW(load_dataset("/nonexistent/botweave/dataset"), IoError);
}

TEST(DatasetIo, RefusesToSaveInvalidDataset) {
  TempDir dir("invalid");
  Dataset ds;
  ds.users = {plain_user(1)};
  ds.graph.edges = {{1, 1}};
  EXPECT_THROW(save_dataset(ds, dir.path()), DatasetError);
}
