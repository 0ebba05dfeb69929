#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace {

const std::string kCli = TAILCOMB_CLI;
const std::string kData = TAILCOMB_TEST_DATA;

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args, const std::string& input = "") {
  std::string cmd = kCli + " " + args + " 2>/dev/null";
  if (!input.empty()) cmd = "printf '" + input + "\\n' | " + cmd;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {-1, ""};
  std::string out;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("tailcomb_cli_" + name);
}

}  // namespace

TEST(Cli, Combine) {
  const auto r = run("combine --test tippett --pvalues " + kData + "/pvalues.txt");
  ASSERT_EQ(r.code, 0);
  std::istringstream lines(r.out);
  double a = 0.0, b = 0.0, c = 0.0;
  lines >> a >> b >> c;
  EXPECT_DOUBLE_EQ(a, 0.75);
  EXPECT_NEAR(b, 0.0199, 1e-16);
  EXPECT_NEAR(c, 2e-8 - 1e-16, 1e-22);
  const auto f = run("combine --test fct --blocks " + kData + "/blocks.txt --pvalues -", "0.1 0.2 0.3 0.4");
  EXPECT_EQ(f.code, 0);
}

TEST(Cli, CombineRejectsBadInput) {
  EXPECT_EQ(run("combine --test tippett --pvalues -", "0.5 1.5").code, 2);
  EXPECT_EQ(run("combine --test nope --pvalues " + kData + "/pvalues.txt").code, 2);
  EXPECT_EQ(run("combine --test pct --pvalues /nonexistent").code, 2);
  EXPECT_EQ(run("bogus").code, 2);
}

TEST(Cli, RatioAndLambda) {
  const auto r = run("ratio --combiner tippett --measure " + kData + "/axes2.json");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "ratio 1\nclassification calibrated\n");
  const auto pm = run("ratio --combiner powermean:gamma=2 --measure " + kData + "/axes2.json");
  EXPECT_EQ(pm.out, "ratio 1.4142135623730951\nclassification liberal\n");
  const auto c = run("ratio --combiner linear --measure " + kData + "/comonotone2.json");
  EXPECT_EQ(c.out, "ratio 1\nclassification calibrated\n");
  const auto l = run("lambda --nu 1 --rho 0.5");
  ASSERT_EQ(l.code, 0);
  EXPECT_NEAR(std::stod(l.out), 0.5, 1e-12);
  EXPECT_EQ(run("lambda --nu -1 --rho 0.5").code, 2);
}

TEST(Cli, CalibrateDeterministicAcrossWorkers) {
  const std::string base = "calibrate --model t,nu=1,d=4,sigma=ar:0.5 --alphas 0.05 --n 5000 --seed 3";
  const auto a = run(base + " --workers 1");
  const auto b = run(base + " --workers 4");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out.rfind("test,model,nu,", 0), 0u);
  EXPECT_EQ(run("calibrate --model " + kData + "/mvt_ar.json --n 1000 --alphas 0.05").code, 0);
  // Several models land in one CSV sorted by (test, nu, alpha).
  const auto multi = run("calibrate --model t,nu=5,d=3 --model t,nu=1,d=3 --tests pct "
                         "--alphas 0.05,0.01 --n 2000");
  ASSERT_EQ(multi.code, 0);
  std::istringstream rows(multi.out);
  std::string line;
  std::vector<std::string> nus;
  std::getline(rows, line);
  while (std::getline(rows, line)) nus.push_back(line.substr(line.find(',', 4) + 1, 1));
  EXPECT_EQ(nus, (std::vector<std::string>{"1", "1", "5", "5"}));
}

TEST(Cli, ConfigFilePrecedence) {
  const auto cfg = temp_file("config.toml");
  {
    std::ofstream os(cfg);
    os << "[calibrate]\nmodel = \"iid,d=3\"\nn = 2000\nseed = 5\nalphas = \"0.05\"\n";
  }
  const auto from_config = run("calibrate --config " + cfg.string());
  const auto from_flags = run("calibrate --model iid,d=3 --n 2000 --seed 5 --alphas 0.05");
  ASSERT_EQ(from_config.code, 0);
  EXPECT_EQ(from_config.out, from_flags.out);
  const auto overridden = run("calibrate --config " + cfg.string() + " --seed 6");
  EXPECT_EQ(overridden.out, run("calibrate --model iid,d=3 --n 2000 --seed 6 --alphas 0.05").out);
  std::filesystem::remove(cfg);
}

TEST(Cli, OutputFiles) {
  const auto out = temp_file("power.csv");
  const auto r = run("power --d 3 --nu 5 --effects 0,2 --n 2000 --tests pct --out " + out.string());
  ASSERT_EQ(r.code, 0);
  std::ifstream is(out);
  std::string header;
  std::getline(is, header);
  EXPECT_EQ(header.rfind("test,effect_size,", 0), 0u);
  std::filesystem::remove(out);
  EXPECT_EQ(run("power --effects 1,2 --n 100").code, 2);
  EXPECT_EQ(run("calibrate --model iid,d=3 --n 100 --out /nonexistent/dir/x.csv").code, 2);
}

TEST(Cli, FalsifyAndTailscale) {
  const auto f = run("falsify --combiner tippett --d 2 --budget 300");
  ASSERT_EQ(f.code, 0);
  EXPECT_NE(f.out.find("\"best_ratio\""), std::string::npos);
  const auto t = run("tailscale --model " + kData + "/breiman3.json --combiner linear "
                     "--thresholds 100,1000 --n 2000");
  ASSERT_EQ(t.code, 0);
  EXPECT_EQ(t.out.rfind("model,combiner,threshold,", 0), 0u);
}
