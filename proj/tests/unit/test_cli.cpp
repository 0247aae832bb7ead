#include <gtest/gtest.h>

#include <cli.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using plbif::cli::run;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("plbif_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  int call(std::vector<std::string> args) {
    args.insert(args.begin(), "plbif");
    out_.str("");
    err_.str("");
    return run(args, out_, err_);
  }

  std::string dir(const std::string& name) const { return (root_ / name).string(); }
  std::string cache() const { return dir("cache"); }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }

  std::vector<std::string> scan_args(const std::string& out, int depth) const {
    return {"scan", "-f", "quadratic.fam", "-g", "-1,0,-0.5,0.5,5", "-d", std::to_string(depth),
            "-o", dir(out), "--cache-dir", cache()};
  }

  fs::path root_;
  std::ostringstream out_, err_;
};

}  // namespace

TEST_F(Cli, LyapunovAtOrigin) {
  ASSERT_EQ(call({"lyapunov", "--family", "quadratic.fam", "--param", "0,0", "--depth", "12", "-o", dir("l")}), 0)
      << err_.str();
  EXPECT_NE(out_.str().find("L_1 = 0.693147"), std::string::npos) << out_.str();
  EXPECT_TRUE(fs::exists(root_ / "l" / "lyapunov.csv"));
  EXPECT_TRUE(fs::exists(root_ / "l" / "lyapunov.manifest"));
}

TEST_F(Cli, ValidationErrorsExitTwo) {
  EXPECT_EQ(call({"lyapunov", "-f", "quadratic", "-s", "0,0", "--bogus"}), 2);
  EXPECT_NE(err_.str().find("--bogus"), std::string::npos);
  EXPECT_EQ(call({"lyapunov", "-f", "quadratic", "-s", "9,0", "-o", dir("x")}), 2);
  EXPECT_EQ(call({"lyapunov", "-f", "quadratic", "-s", "0,0", "--method", "walk", "-o", dir("x")}), 2);
  EXPECT_NE(err_.str().find("--seed"), std::string::npos);
  EXPECT_EQ(call({"lyapunov", "-f", "no_such_family", "-s", "0,0"}), 2);
  EXPECT_EQ(call({"frobnicate"}), 2);
  EXPECT_EQ(call({"scan", "-f", "quadratic", "-g", "1,0,0,1,5", "-o", dir("x")}), 2);
}

TEST_F(Cli, WalkWithSeedIsDeterministic) {
  auto args = [&](const std::string& out) {
    return std::vector<std::string>{"lyapunov", "-f", "quadratic", "-s", "-1,0", "--method", "walk",
                                    "--seed", "7", "--walkers", "512", "-o", dir(out)};
  };
  ASSERT_EQ(call(args("a")), 0) << err_.str();
  ASSERT_EQ(call(args("b")), 0) << err_.str();
  EXPECT_EQ(slurp(root_ / "a" / "lyapunov.csv"), slurp(root_ / "b" / "lyapunov.csv"));
}

TEST_F(Cli, CacheHitReproducesFiles) {
  ASSERT_EQ(call(scan_args("first", 6)), 0) << err_.str();
  EXPECT_EQ(out_.str().find("cache hit"), std::string::npos);
  ASSERT_EQ(call(scan_args("second", 6)), 0) << err_.str();
  EXPECT_NE(out_.str().find("cache hit"), std::string::npos);
  for (const char* name : {"scan.csv", "scan.pgm", "scan_summary.txt"})
    EXPECT_EQ(slurp(root_ / "first" / name), slurp(root_ / "second" / name)) << name;
  EXPECT_NE(slurp(root_ / "second" / "scan.manifest").find("cache=hit"), std::string::npos);
  EXPECT_NE(slurp(root_ / "first" / "scan.manifest").find("cache=miss"), std::string::npos);
}

TEST_F(Cli, ChangedDepthMisses) {
  ASSERT_EQ(call(scan_args("a", 6)), 0);
  ASSERT_EQ(call(scan_args("b", 7)), 0);
  EXPECT_EQ(out_.str().find("cache hit"), std::string::npos);
  EXPECT_NE(slurp(root_ / "b" / "scan.manifest").find("cache=miss"), std::string::npos);
}

TEST_F(Cli, DeletedCacheRecomputes) {
  ASSERT_EQ(call(scan_args("a", 6)), 0);
  fs::remove_all(cache());
  ASSERT_EQ(call(scan_args("b", 6)), 0);
  EXPECT_EQ(out_.str().find("cache hit"), std::string::npos);
  EXPECT_EQ(slurp(root_ / "a" / "scan.csv"), slurp(root_ / "b" / "scan.csv"));
  EXPECT_TRUE(fs::exists(cache()));
}

TEST_F(Cli, CorruptEntryIsRecomputed) {
  ASSERT_EQ(call(scan_args("a", 6)), 0);
  for (const auto& entry : fs::recursive_directory_iterator(cache()))
    if (entry.path().filename() == "scan.csv") std::ofstream(entry.path(), std::ios::app) << "garbage\n";
  ASSERT_EQ(call(scan_args("b", 6)), 0);
  EXPECT_EQ(out_.str().find("cache hit"), std::string::npos);
  EXPECT_NE(err_.str().find("warning"), std::string::npos);
  EXPECT_EQ(slurp(root_ / "a" / "scan.csv"), slurp(root_ / "b" / "scan.csv"));
  ASSERT_EQ(call(scan_args("c", 6)), 0);
  EXPECT_NE(out_.str().find("cache hit"), std::string::npos);
}

TEST_F(Cli, CacheRootFromEnvironment) {
  ::setenv("PLBIF_CACHE_DIR", cache().c_str(), 1);
  ASSERT_EQ(call({"scan", "-f", "quadratic", "-g", "-1,0,-0.5,0.5,5", "-d", "5", "-o", dir("a")}), 0);
  ::unsetenv("PLBIF_CACHE_DIR");
  EXPECT_FALSE(fs::is_empty(cache()));
}

TEST_F(Cli, NoCacheLeavesNothingBehind) {
  auto args = scan_args("a", 6);
  args.push_back("--no-cache");
  ASSERT_EQ(call(args), 0);
  EXPECT_FALSE(fs::exists(cache()));
  EXPECT_NE(slurp(root_ / "a" / "scan.manifest").find("cache=off"), std::string::npos);
}

TEST_F(Cli, ManifestRecordsTheRun) {
  ASSERT_EQ(call(scan_args("a", 6)), 0);
  const std::string m = slurp(root_ / "a" / "scan.manifest");
  for (const char* key : {"command=scan", "argv=", "version=", "config_hash=", "family_hash=", "depth=6",
                          "grid=", "wall_time_s=", "artifacts=scan.csv"})
    EXPECT_NE(m.find(key), std::string::npos) << key;
}

TEST_F(Cli, SubcommandsProduceArtifacts) {
  ASSERT_EQ(call({"bifurcation", "-f", "quadratic", "-g", "-1,0,-0.5,0.5,9", "-d", "6", "-o", dir("b"),
                  "--cache-dir", cache()}),
            0)
      << err_.str();
  for (const char* name : {"field.csv", "ddc.csv", "support.csv", "field.pgm", "ddc.pgm"})
    EXPECT_TRUE(fs::exists(root_ / "b" / name)) << name;
  ASSERT_EQ(call({"julia", "-f", "quadratic", "-s", "-1,0", "-d", "8", "-o", dir("j")}), 0) << err_.str();
  ASSERT_EQ(call({"periodic", "-f", "quadratic", "-s", "-1,0", "-N", "2", "-o", dir("p")}), 0) << err_.str();
  ASSERT_EQ(call({"slice-check", "-f", "quadratic", "-g", "-0.3,0.1,-0.2,0.2,5", "-d", "4", "-o", dir("c")}), 0)
      << err_.str();
  ASSERT_EQ(call({"stability", "-f", "quadratic", "-g", "-0.2,0.2,-0.2,0.2,5", "-d", "8", "-o", dir("s"),
                  "--cache-dir", cache()}),
            0)
      << err_.str();
}

TEST_F(Cli, SelftestPasses) {
  EXPECT_EQ(call({"selftest"}), 0) << out_.str();
  EXPECT_EQ(out_.str().find("FAIL"), std::string::npos);
}
