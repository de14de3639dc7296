#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

#include "json.hpp"
#include "lpwfcm/arff.hpp"
#include "lpwfcm/dataset.hpp"
#include "lpwfcm/report.hpp"

namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("lpwfcm_cli_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = std::string(LPWFCM_CLI) + " " + args + " >" + (work_dir() / "stdout.txt").string() + " 2>" +
                          (work_dir() / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

struct CleanUp : ::testing::Environment {
  void TearDown() override { fs::remove_all(work_dir()); }
};
const auto* const kCleanUp = ::testing::AddGlobalTestEnvironment(new CleanUp);

const std::string kSmallRun = "--synthetic 60,3,3,0.2 --folds 3 --seed 3 --learner stump --rrc soft";

}  // namespace

TEST(Cli, RunWritesOutputsDeterministically) {
  const auto cfg = work_dir() / "cfg.json";
  spit(cfg, R"({"beta_grid": [1, 3], "gamma_grid": [0.25]})");
  const auto a = work_dir() / "run_a", b = work_dir() / "run_b";
  ASSERT_EQ(run("run --config " + cfg.string() + " " + kSmallRun + " --out " + a.string()), 0) << slurp(work_dir() / "stderr.txt");
  ASSERT_EQ(run("run --config " + cfg.string() + " " + kSmallRun + " --out " + b.string()), 0);
  const auto m = slurp(a / "metrics.csv");
  EXPECT_EQ(m, slurp(b / "metrics.csv"));
  // 3 algorithms x 3 folds x 8 metrics + header
  EXPECT_EQ(std::count(m.begin(), m.end(), '\n'), 73);
  const auto tuning = nlohmann::json::parse(slurp(a / "tuning.json"));
  EXPECT_EQ(tuning.size(), 6u);
  const auto manifest = nlohmann::json::parse(slurp(a / "run-manifest.json"));
  EXPECT_EQ(manifest.at("config").at("beta_grid"), nlohmann::json::parse("[1.0, 3.0]"));
  EXPECT_EQ(manifest.at("seeds").at("run"), 3);
}

TEST(Cli, TraceFile) {
  const auto out = work_dir() / "run_trace";
  ASSERT_EQ(run("run " + kSmallRun + " --alg 3 --trace --out " + out.string()), 0);
  const auto t = slurp(out / "trace.csv");
  // 60 test rows x 3 pairs + header
  EXPECT_EQ(std::count(t.begin(), t.end(), '\n'), 181);
}

TEST(Cli, CompareConsumesRunOutput) {
  const auto out = work_dir() / "run_cmp";
  ASSERT_EQ(run("run " + kSmallRun + " --out " + out.string()), 0);
  const auto cmp = work_dir() / "cmp";
  ASSERT_EQ(run("compare " + (out / "metrics.csv").string() + " --blocks fold --out " + cmp.string()), 0)
      << slurp(work_dir() / "stderr.txt");
  const auto j = nlohmann::json::parse(slurp(cmp / "compare.json"));
  EXPECT_EQ(j.size(), 8u);
  EXPECT_EQ(j.at("macro_f1_loss").at("wilcoxon").size(), 3u);
  EXPECT_TRUE(fs::exists(cmp / "compare.csv"));
  // a single dataset cannot form dataset blocks
  EXPECT_EQ(run("compare " + (out / "metrics.csv").string() + " --out " + cmp.string()), 2);
}

TEST(Cli, CompareWideTableWithIdenticalColumns) {
  const auto t = work_dir() / "hamming.csv";
  spit(t, "dataset,1,2,3\na,0.1,0.1,0.1\nb,0.2,0.2,0.2\nc,0.3,0.3,0.3\n");
  const auto cmp = work_dir() / "cmp_wide";
  ASSERT_EQ(run("compare " + t.string() + " --out " + cmp.string()), 0) << slurp(work_dir() / "stderr.txt");
  const auto j = nlohmann::json::parse(slurp(cmp / "compare.json"));
  EXPECT_EQ(j.at("hamming").at("friedman").at("p"), 1.0);
}

TEST(Cli, MissingXmlIsError) {
  const auto ds = lpwfcm::generate_synthetic(20, 3, 3, 0.1, 1);
  const auto arff = work_dir() / "toy.arff";
  spit(arff, lpwfcm::write_arff(ds));
  EXPECT_EQ(run("run --data " + arff.string() + " --out " + (work_dir() / "x").string()), 2);
  EXPECT_NE(slurp(work_dir() / "stderr.txt").find("labels-xml"), std::string::npos);
  EXPECT_EQ(run("run --data " + arff.string() + " --labels-xml " + (work_dir() / "nope.xml").string()), 2);
}

TEST(Cli, StatsPartialFailure) {
  auto good = lpwfcm::generate_synthetic(30, 3, 3, 0.1, 1);
  auto bad = good;
  for (std::size_t i = 0; i < bad.size(); ++i) bad.labels(i, 2) = 0;
  spit(work_dir() / "good.arff", lpwfcm::write_arff(good));
  spit(work_dir() / "bad.arff", lpwfcm::write_arff(bad));
  std::string xml = "<labels>";
  for (const auto& n : good.label_names) xml += "<label name=\"" + n + "\"/>";
  xml += "</labels>";
  spit(work_dir() / "labels.xml", xml);
  const auto out = work_dir() / "stats.csv";
  const auto w = work_dir();
  const int code = run("stats --data " + (w / "bad.arff").string() + " --labels-xml " + (w / "labels.xml").string() +
                       " --data " + (w / "good.arff").string() + " --labels-xml " + (w / "labels.xml").string() +
                       " --out " + out.string());
  EXPECT_EQ(code, 2);
  const auto rows = lpwfcm::detail::read_csv(slurp(out));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1][0], "bad");
  EXPECT_FALSE(rows[1][7].empty());
  EXPECT_EQ(rows[2][0], "good");
  EXPECT_TRUE(rows[2][7].empty());
  double lc = 0, ld = 0;
  lpwfcm::detail::parse_double(rows[2][4], lc);
  lpwfcm::detail::parse_double(rows[2][5], ld);
  EXPECT_EQ(ld, lc / 3.0);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("run --synthetic 1,2"), 1);
  EXPECT_EQ(run("run --synthetic 60,3,3,0.2 --learner svm"), 1);
  EXPECT_EQ(run("--version"), 0);
}
