#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "botweave/config.hpp"
#include "botweave/pipeline.hpp"
#include "test_util.hpp"

using namespace botweave;
using botweave::testing::TempDir;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string l;
  while (std::getline(in, l)) out.push_back(l);
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, sep)) out.push_back(part);
  return out;
}

std::string small_config(const fs::path& out, std::size_t n_bots = 800) {
  return "seed = 17\nthreads = 2\n[paths]\nout = \"" + out.string() +
         "\"\n[generate]\nn_bots = " + std::to_string(n_bots) +
         "\nn_real = 1500\nn_reference = 1500\nreal_tweets_mean = 20\n"
         "[classifier]\nk_folds = 5\n"
         "[geo]\nrect_a = [40, 50, -110, -90]\nrect_b = [45, 55, 0, 20]\nmin_cells = 100\n";
}

PipelineConfig config_for(const fs::path& out, std::size_t n_bots = 800) {
  Config c = Config::parse(small_config(out, n_bots), "test");
  return pipeline_config_from(c);
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(BOTWEAVE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(ConfigFile, ParsesSectionsArraysAndComments) {
  Config c = Config::parse("seed = 9 # trailing\n[geo]\nrect_a = [1, 2, 3, 4]\n[paths]\nout = \"a # b\"\n", "t");
  EXPECT_EQ(c.get_uint("seed", 0), 9u);
  EXPECT_EQ(c.get_doubles("geo.rect_a", {}), (std::vector<double>{1, 2, 3, 4}));
  EXPECT_EQ(c.get_string("paths.out", ""), "a # b");
  EXPECT_EQ(c.get_double("missing", 2.5), 2.5);
  EXPECT_NO_THROW(c.reject_unknown());
}

TEST(ConfigFile, UnknownKeyNamesLine) {
  Config c = Config::parse("seed = 1\n\n[generate]\nn_botz = 4\n", "desk.toml");
  try {
    pipeline_config_from(c);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("desk.toml:4"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("generate.n_botz"), std::string::npos) << e.what();
  }
}

TEST(ConfigFile, BadValuesAreConfigErrors) {
  for (const char* text : {"seed = -3\n", "seed = abc\n", "[geo]\nrect_a = [1, 2, 3]\n", "[sample]\np = 1.5\n",
                           "[filter]\nrequired_source = \"Pager\"\n", "[filter]\nforbid_mentions = maybe\n",
                           "[generate]\ndate_lo = \"yesterday\"\n", "= 3\n", "[geo\n"}) {
    EXPECT_THROW(
        {
          Config c = Config::parse(text, "t");
          pipeline_config_from(c);
        },
        ConfigError)
        << text;
  }
}

TEST(ConfigFile, EnvironmentOverridesFile) {
  ::setenv("BOTWEAVE_GENERATE_N_BOTS", "123", 1);
  Config c = Config::parse("[generate]\nn_bots = 5\n", "t");
  const PipelineConfig p = pipeline_config_from(c);
  ::unsetenv("BOTWEAVE_GENERATE_N_BOTS");
  EXPECT_EQ(p.gen.n_bots, 123u);
}

TEST(ConfigFile, DeskConfigLoads) {
  Config c = Config::load(fs::path(BOTWEAVE_SOURCE_DIR) / "configs" / "desk.toml");
  const PipelineConfig p = pipeline_config_from(c);
  EXPECT_EQ(p.gen.n_bots, 5000u);
  EXPECT_EQ(p.gen.n_real, 20000u);
  EXPECT_EQ(p.gen.rects.first, (GeoRect{25, 50, -125, -65}));
}

class SmallPipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir("pipeline");
    pipeline_ = new Pipeline(config_for(dir_->path()), nullptr);
    pipeline_->run_all();
  }
  static void TearDownTestSuite() {
    delete pipeline_;
    delete dir_;
  }
  static fs::path at(const std::string& rel) { return dir_->path() / rel; }

  static TempDir* dir_;
  static Pipeline* pipeline_;
};

TempDir* SmallPipeline::dir_ = nullptr;
Pipeline* SmallPipeline::pipeline_ = nullptr;

TEST_F(SmallPipeline, ReportBundleIsComplete) {
  for (const auto& [rel, stage] : Pipeline::report_sources()) {
    const fs::path copy = at("report") / fs::path(rel).filename();
    ASSERT_TRUE(fs::exists(copy)) << copy;
    EXPECT_EQ(slurp(copy), slurp(at(rel)));
  }
  EXPECT_TRUE(fs::exists(at("report/summary.txt")));
  EXPECT_TRUE(fs::exists(at("report/retrieval.txt")));
  EXPECT_EQ(lines(slurp(at("report/grid.csv"))).front(), "lat_cell,lon_cell,count");
}

TEST_F(SmallPipeline, DiscoversBothRectangles) {
  const auto rows = lines(slurp(at("geo/regions.tsv")));
  ASSERT_EQ(rows.size(), 3u) << slurp(at("geo/regions.tsv"));
  const GeoRect truth[] = {{40, 50, -110, -90}, {45, 55, 0, 20}};
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto f = split(rows[i], '\t');
    const GeoRect found{std::stod(f[0]), std::stod(f[1]), std::stod(f[2]), std::stod(f[3])};
    EXPECT_GE(std::max(jaccard(found, truth[0]), jaccard(found, truth[1])), 0.7) << rows[i];
  }
}

TEST_F(SmallPipeline, ConfusionRowsSumToClassTotals) {
  const auto rows = lines(slurp(at("eval/confusion_matrix.csv")));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], "actual,predicted_bot,predicted_real,total");
  std::uint64_t bots = 0, reals = 0;
  for (const auto& l : lines(slurp(at("model/training_set.csv"))))
    if (l.find(",bot,") != std::string::npos)
      ++bots;
    else if (l.find(",real,") != std::string::npos)
      ++reals;
  for (std::size_t r = 1; r < 3; ++r) {
    const auto f = split(rows[r], ',');
    ASSERT_EQ(f.size(), 4u);
    EXPECT_EQ(std::stoull(f[1]) + std::stoull(f[2]), std::stoull(f[3]));
    EXPECT_EQ(std::stoull(f[3]), r == 1 ? bots : reals);
  }
  EXPECT_GT(bots, 0u);
}

TEST_F(SmallPipeline, DistanceHistogramCountsEveryMultiGeotagUser) {
  const Dataset ds = load_dataset(pipeline_->config().dataset_dir());
  std::uint64_t expected = 0;
  for (const auto& u : ds.users)
    expected += std::count_if(u.tweets.begin(), u.tweets.end(), [](const Tweet& t) { return t.geo.has_value(); }) >= 2;
  std::uint64_t mass = 0;
  const auto rows = lines(slurp(at("analyze/distance_hist.csv")));
  EXPECT_EQ(rows.front(), "bin_lo_km,bin_hi_km,bots,reals");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto f = split(rows[i], ',');
    mass += std::stoull(f[2]) + std::stoull(f[3]);
  }
  EXPECT_EQ(mass, expected);
}

TEST_F(SmallPipeline, RetrievalIsAccurate) {
  const auto rows = lines(slurp(at("report/retrieval.txt")));
  double precision = 0, recall = 0;
  for (const auto& r : rows) {
    const auto f = split(r, '\t');
    if (f[0] == "precision") precision = std::stod(f[1]);
    if (f[0] == "recall") recall = std::stod(f[1]);
  }
  EXPECT_GE(precision, 0.9);
  EXPECT_GE(recall, 0.9);
}

TEST_F(SmallPipeline, StagesAreIdempotent) {
  const std::vector<std::string> files{"sample/sampled_ids.txt", "geo/regions.tsv",       "filter/candidates.txt",
                                       "model/nb_model.txt",     "eval/eval_report.txt",  "classify/predictions.csv",
                                       "analyze/summary.txt",    "report/summary.txt"};
  std::vector<std::string> before;
  for (const auto& f : files) before.push_back(slurp(at(f)));
  for (const auto& s : Pipeline::stage_names())
    if (s != "generate") pipeline_->run_stage(s);
  for (std::size_t i = 0; i < files.size(); ++i) EXPECT_EQ(slurp(at(files[i])), before[i]) << files[i];
}

TEST(PipelineStages, NoBotsRetrievesNobody) {
  TempDir dir("nobots");
  Pipeline p(config_for(dir.path(), 0), nullptr);
  p.run_all();
  EXPECT_EQ(slurp(dir.path() / "classify/retrieved_bots.txt"), "");
  EXPECT_NE(slurp(dir.path() / "eval/eval_report.txt").find("skipped"), std::string::npos);
}

TEST(PipelineStages, MissingArtifactNamesStageToRerun) {
  TempDir dir("missing");
  Pipeline p(config_for(dir.path()), nullptr);
  try {
    p.run_stage("classify");
    FAIL() << "expected StageError";
  } catch (const StageError& e) {
    EXPECT_EQ(e.exit_code(), kExitStage);
    EXPECT_NE(std::string(e.what()).find("generate"), std::string::npos) << e.what();
  }
}

TEST(Cli, ExitCodes) {
  TempDir dir("cli");
  const fs::path cfg = dir.path() / "bad.toml";
  std::ofstream(cfg) << "[generate]\nn_botz = 1\n";
  EXPECT_EQ(run_cli("--config " + cfg.string() + " generate"), kExitConfig);
  EXPECT_EQ(run_cli("frobnicate"), kExitConfig);
  EXPECT_EQ(run_cli("--out " + (dir.path() / "o").string() + " classify"), kExitStage);

  const fs::path broken = dir.path() / "broken";
  fs::create_directories(broken);
  std::ofstream(broken / "users.ndjson") << "{not json\n";
  std::ofstream(broken / "edges.tsv") << "follower\tfriend\n";
  std::ofstream(broken / "meta.toml") << "format = \"botweave-dataset-1\"\n";
  EXPECT_EQ(run_cli("--out " + (dir.path() / "o2").string() + " --dataset " + broken.string() + " sample"),
            kExitData);
}
