#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "config.hpp"

using namespace gradsync;
using namespace gradsync::cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

int run(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(GRADSYNC_BIN) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(GRADSYNC_TEST_TMP) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

const char* kMinimal =
    "[potential]\n"
    "family = quartic\n"
    "a = 0.5\n"
    "[rng]\n"
    "master_seed = 7\n"
    "[campaign]\n"
    "kind = lyapunov\n";

}  // namespace

TEST(Config, MinimalConfigParses) {
  const auto cfg = parse_config(kMinimal);
  EXPECT_EQ(cfg.campaign.kind, CampaignKind::LyapunovCircle);
  EXPECT_EQ(cfg.campaign.master_seed, 7u);
  EXPECT_EQ(cfg.campaign.replicas, 16u);
}

TEST(Config, BareCampaignLine) {
  const auto cfg = parse_config("[potential]\nfamily = quartic\n[rng]\nmaster_seed = 1\ncampaign = gronwall\n");
  EXPECT_EQ(cfg.campaign.kind, CampaignKind::GronwallComparison);
}

TEST(Config, MisspelledKeyReportsItsLine) {
  const std::string text = "[potential]\nfamly = quartic\n[rng]\nmaster_seed = 1\n[campaign]\nkind = escape\n";
  try {
    parse_config(text);
    FAIL() << "expected ConfigErrors";
  } catch (const ConfigErrors& e) {
    ASSERT_EQ(e.errors().size(), 1u);
    EXPECT_EQ(e.errors()[0].kind(), "UnknownKey");
    EXPECT_EQ(e.errors()[0].line(), 2);
    EXPECT_NE(std::string(e.errors()[0].what()).find("potential.famly"), std::string::npos);
  }
}

TEST(Config, EpsilonListSortedDescending) {
  const auto cfg = parse_config(std::string(kMinimal) + "epsilons = 0.1,0.3,0.2\n");
  EXPECT_EQ(cfg.campaign.epsilons, (std::vector<double>{0.3, 0.2, 0.1}));
}

TEST(Config, TypeErrorsAreCollected) {
  const std::string text = std::string(kMinimal) + "replicas = many\ndelta = -1\n";
  try {
    parse_config(text);
    FAIL() << "expected ConfigErrors";
  } catch (const ConfigErrors& e) {
    ASSERT_EQ(e.errors().size(), 2u);
    EXPECT_EQ(e.errors()[0].kind(), "TypeError");
    EXPECT_EQ(e.errors()[0].line(), 8);
    EXPECT_EQ(e.errors()[1].line(), 9);
  }
}

TEST(Config, MissingSection) {
  try {
    parse_config("[potential]\nfamily = quartic\n[campaign]\nkind = escape\n");
    FAIL() << "expected ConfigErrors";
  } catch (const ConfigErrors& e) {
    ASSERT_FALSE(e.errors().empty());
    EXPECT_EQ(e.errors()[0].kind(), "MissingSection");
  }
}

TEST(Config, HashCoversEveryKeyButTheOutputDirectory) {
  auto a = default_config(CampaignKind::EscapeScaling), b = a;
  EXPECT_EQ(a.hash(), b.hash());
  apply_override(b, "output.dir=elsewhere");
  EXPECT_EQ(a.hash(), b.hash());
  apply_override(b, "campaign.replicas=201");
  EXPECT_NE(a.hash(), b.hash());
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cull);
}

TEST(Config, CanonicalListsKnownKeysInOrder) {
  const auto canon = default_config(CampaignKind::LyapunovCircle).canonical();
  std::size_t pos = 0;
  for (const auto& k : known_keys()) {
    if (k == "output.dir") continue;
    const auto at = canon.find(k + "=", pos);
    ASSERT_NE(at, std::string::npos) << k;
    pos = at;
  }
}

TEST(Cli, HelpListsSubcommands) {
  const auto dir = scratch("help");
  EXPECT_EQ(run("--help", dir / "log"), 0);
  const auto text = slurp(dir / "log");
  for (const char* s : {"escape", "exit-prob", "set-sync", "point-sync", "lyapunov", "circle-sync", "gronwall",
                        "control-verify", "validate-potential"})
    EXPECT_NE(text.find(s), std::string::npos) << s;
}

TEST(Cli, LyapunovWritesCsvAndSummary) {
  const auto dir = scratch("lyap");
  std::ofstream(dir / "run.cfg") << kMinimal << "T = 1000\ndt = 0.01\n";
  EXPECT_EQ(run("lyapunov --config " + (dir / "run.cfg").string() + " --out " + (dir / "out").string(), dir / "log"),
            0)
      << slurp(dir / "log");
  ASSERT_TRUE(fs::exists(dir / "out" / "lyapunov.csv"));
  ASSERT_TRUE(fs::exists(dir / "out" / "summary.txt"));
  for (const auto& f : fs::directory_iterator(dir / "out")) {
    const auto text = slurp(f.path());
    EXPECT_EQ(text.rfind("# gradsync ", 0), 0u) << f.path();
    EXPECT_NE(text.find("config_hash="), std::string::npos);
    EXPECT_NE(text.find("master_seed=7"), std::string::npos);
  }
}

TEST(Cli, RerunsAreByteIdentical) {
  const auto dir = scratch("rerun");
  const std::string common =
      "escape --set campaign.epsilons=0.6,0.5,0.4 --set campaign.replicas=30 --set campaign.sphere_points=8 "
      "--emit-plot-data --out ";
  ASSERT_EQ(run(common + (dir / "a").string() + " --jobs 1", dir / "log_a"), 0) << slurp(dir / "log_a");
  ASSERT_EQ(run(common + (dir / "b").string() + " --jobs 2", dir / "log_b"), 0) << slurp(dir / "log_b");
  std::size_t compared = 0;
  for (const auto& f : fs::directory_iterator(dir / "a")) {
    EXPECT_EQ(slurp(f.path()), slurp(dir / "b" / f.path().filename())) << f.path().filename();
    ++compared;
  }
  EXPECT_GE(compared, 3u);
}

TEST(Cli, TooFewReplicasExitsTwo) {
  const auto dir = scratch("few");
  EXPECT_EQ(run("escape --set campaign.replicas=1 --out " + (dir / "out").string(), dir / "log"), 2);
}

TEST(Cli, UnknownOverrideExitsOne) {
  const auto dir = scratch("bad");
  EXPECT_EQ(run("lyapunov --set campaign.bogus=1 --out " + (dir / "out").string(), dir / "log"), 1);
  EXPECT_NE(slurp(dir / "log").find("UnknownKey"), std::string::npos);
}

TEST(Cli, ValidatePotential) {
  const auto dir = scratch("validate");
  EXPECT_EQ(run("validate-potential --out " + (dir / "ok").string(), dir / "log"), 0);
  EXPECT_EQ(run("validate-potential --set potential.family=custom --set potential.coeffs=0,0,-1,0.2 --out " +
                    (dir / "bad").string(),
                dir / "log"),
            2);
}
