#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cluslasso/cli.hpp"
#include "cluslasso/data.hpp"

using namespace cluslasso;
namespace fs = std::filesystem;

namespace {

struct CmdResult {
  int code = 0;
  std::string out;
  std::string err;
};

CmdResult call(int (*cmd)(const std::vector<std::string>&, std::ostream&, std::ostream&), std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cmd(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);)
    if (!l.empty()) out.push_back(l);
  return out;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("cluslasso_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string tiny_libsvm() const {
    const std::string p = path("tiny.libsvm");
    std::ofstream(p) << "1 1:1 2:0.5\n-2 1:0.3 3:2\n0.5 2:1 3:-1\n3 1:2 2:1 3:1\n";
    return p;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, NullModelGivesZeroSolution) {
  const std::string out = path("null.json");
  const CmdResult r = call(cmd_solve, {"--input", tiny_libsvm(), "--beta", "1e9", "--rho", "0", "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  const Vec x = read_vector_bin(out + ".x.bin");
  EXPECT_EQ(x.size(), 3);
  EXPECT_EQ(x, Vec::Zero(3));
  const auto j = nlohmann::json::parse(slurp(out));
  EXPECT_EQ(j["status"], "converged");
  EXPECT_EQ(j["nnz"], 0);
  EXPECT_EQ(j["beta"], 1e9);
}

TEST_F(CliTest, MissingInputIsUsageError) {
  const CmdResult r = call(cmd_solve, {"--beta", "1"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--input"), std::string::npos);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
}

TEST_F(CliTest, BadArgumentsExitTwo) {
  EXPECT_EQ(call(cmd_solve, {"--input", tiny_libsvm(), "--beta", "1", "--solver", "newton"}).code, 2);
  EXPECT_EQ(call(cmd_solve, {"--input", tiny_libsvm()}).code, 2);
  EXPECT_EQ(call(cmd_solve, {"--input", tiny_libsvm(), "--alpha1", "0.1"}).code, 2);
  EXPECT_EQ(call(cmd_solve, {"--input", tiny_libsvm(), "--beta", "-1"}).code, 2);
  EXPECT_EQ(call(cmd_solve, {"--input", "x", "--scenario", "1", "--beta", "1"}).code, 2);
  EXPECT_EQ(call(cmd_gen, {"--scenario", "9", "--out-prefix", path("g")}).code, 2);
  EXPECT_EQ(call(cmd_bench, {"--scenario", "1", "--alphas", "0.1"}).code, 2);
  EXPECT_EQ(call(cmd_bench, {"--scenario", "1", "--solvers", "nope"}).code, 2);
}

TEST_F(CliTest, MissingFileExitsOne) {
  EXPECT_EQ(call(cmd_solve, {"--input", path("absent.libsvm"), "--beta", "1"}).code, 1);
}

TEST(CliTopLevel, Dispatch) {
  std::ostringstream out, err;
  const char* none[] = {"cluslasso"};
  EXPECT_EQ(run_cli(1, none, out, err), 2);
  const char* help[] = {"cluslasso", "--help"};
  EXPECT_EQ(run_cli(2, help, out, err), 0);
  const char* bad[] = {"cluslasso", "frobnicate"};
  EXPECT_EQ(run_cli(2, bad, out, err), 2);
  const char* sub_help[] = {"cluslasso", "solve", "--help"};
  EXPECT_EQ(run_cli(3, sub_help, out, err), 0);
  EXPECT_NE(out.str().find("--solver"), std::string::npos);
}

TEST_F(CliTest, ScenarioOneEndToEnd) {
  const std::string out = path("s1.json");
  const CmdResult r = call(cmd_solve, {"--scenario", "1", "--k", "2", "--seed", "1", "--alpha1", "1e-3", "--alpha2", "1e-2",
                                 "--solver", "auto", "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(out));
  EXPECT_EQ(j["status"], "converged");
  EXPECT_EQ(j["solver"], "ssnal-p");  // m > n
  EXPECT_LE(j["eta_kkt"].get<double>(), 1e-6);
  // The three true groups come back intact; see the notes for why gnnz itself exceeds 3.
  const Vec x = read_vector_bin(out + ".x.bin");
  const Vec truth = true_coefficients(1, 2);
  ASSERT_EQ(x.size(), truth.size());
  for (Index i = 0; i < x.size(); ++i) {
    if (truth[i] == 0.0) {
      EXPECT_LT(std::abs(x[i]), 0.05) << i;
    } else {
      EXPECT_GE(x[i] / truth[i], 5.0 / 6.0) << i;
      EXPECT_LE(x[i] / truth[i], 6.0 / 5.0) << i;
    }
  }
  GroupingRule big;
  big.zero_tol = 0.05;
  EXPECT_EQ(gnnz(x, big), 3u);
}

TEST_F(CliTest, AutoResolution) {
  const ProblemData wide{DesignMatrix(Mat::Ones(3, 5)), Vec::Ones(3), {}};
  const ProblemData tall{DesignMatrix(Mat::Ones(5, 3)), Vec::Ones(5), {}};
  const ProblemData square{DesignMatrix(Mat::Ones(4, 4)), Vec::Ones(4), {}};
  EXPECT_EQ(resolve_solver("auto", wide), "ssnal-d");
  EXPECT_EQ(resolve_solver("auto", square), "ssnal-d");
  EXPECT_EQ(resolve_solver("auto", tall), "ssnal-p");
  EXPECT_EQ(resolve_solver("apg", tall), "apg");
}

TEST_F(CliTest, CsvOutput) {
  const std::string out = path("run.csv");
  const CmdResult r = call(cmd_solve, {"--input", tiny_libsvm(), "--beta", "0.1", "--rho", "0.05", "--solver", "admm-p",
                                 "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ls = lines(slurp(out));
  ASSERT_EQ(ls.size(), 2u);
  EXPECT_EQ(ls[0], csv_header());
  EXPECT_NE(ls[1].find(",admm-p,"), std::string::npos);
  EXPECT_NE(r.out.find("admm-p: converged"), std::string::npos);
}

TEST_F(CliTest, JsonToStdoutWithoutOut) {
  const CmdResult r = call(cmd_solve, {"--input", tiny_libsvm(), "--beta", "0.1", "--solver", "ssnal-d"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["solver"], "ssnal-d");
  EXPECT_EQ(j["m"], 4);
  EXPECT_EQ(j["n"], 3);
  EXPECT_TRUE(j["alpha1"].is_null());
}

TEST_F(CliTest, IterationLimitGivesExitOne) {
  const CmdResult r = call(cmd_solve, {"--scenario", "2", "--k", "2", "--seed", "3", "--m-override", "300", "--alpha1",
                                 "1e-3", "--alpha2", "1e-2", "--solver", "apg", "--max-iters", "2", "--tol", "1e-12"});
  EXPECT_EQ(r.code, 1);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["status"], "max_iters");
  EXPECT_EQ(j["iterations"], 2);
}

TEST_F(CliTest, VectorBinRoundTrip) {
  const Vec v{{1.0, -0.0, 3.5e-300, 1e300, -2.25}};
  write_vector_bin(path("v.bin"), v);
  EXPECT_EQ(fs::file_size(path("v.bin")), 8u + 5u * 8u);
  const Vec back = read_vector_bin(path("v.bin"));
  EXPECT_EQ(back, v);
  EXPECT_THROW(read_vector_bin(path("absent.bin")), std::exception);
  std::ofstream(path("short.bin"), std::ios::binary) << "abc";
  EXPECT_THROW(read_vector_bin(path("short.bin")), std::exception);
}

TEST_F(CliTest, GenWritesScenarioFiles) {
  const CmdResult r = call(cmd_gen, {"--scenario", "4", "--k", "1", "--seed", "5", "--m-override", "500", "--out-prefix",
                               path("s4")});
  ASSERT_EQ(r.code, 0) << r.err;
  const LabeledMatrix train = read_libsvm(path("s4.train.libsvm"), 13);
  const LabeledMatrix test = read_libsvm(path("s4.test.libsvm"), 13);
  EXPECT_EQ(train.A.rows(), 400);
  EXPECT_EQ(test.A.rows(), 100);
  EXPECT_EQ(train.A.cols(), 13);
  const auto side = nlohmann::json::parse(slurp(path("s4.json")));
  EXPECT_EQ(side["x_true"].size(), 13u);

  ASSERT_EQ(call(cmd_gen, {"--scenario", "4", "--k", "1", "--seed", "5", "--m-override", "500", "--out-prefix",
                           path("again")})
                .code,
            0);
  EXPECT_EQ(slurp(path("s4.train.libsvm")), slurp(path("again.train.libsvm")));
  EXPECT_EQ(slurp(path("s4.test.libsvm")), slurp(path("again.test.libsvm")));
}

TEST_F(CliTest, BenchGridRowsAndProfile) {
  const std::string out = path("bench.csv");
  const CmdResult r = call(cmd_bench, {"--scenario", "1", "--k", "2", "--seed", "2", "--m-override", "400", "--solvers",
                                 "admm-p,ssnal-p", "--alphas", "1e-3:1e-2,1e-2:1e-2", "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ls = lines(slurp(out));
  ASSERT_EQ(ls.size(), 1u + 2u * 3u);
  EXPECT_EQ(ls[0], csv_header() + ",role,max_pair_eta_rel");
  int refs = 0, cells = 0;
  for (std::size_t i = 1; i < ls.size(); ++i) {
    const std::string& row = ls[i];
    const auto last = row.rfind(',');
    const auto role_start = row.rfind(',', last - 1) + 1;
    const std::string role = row.substr(role_start, last - role_start);
    refs += role == "reference";
    cells += role == "cell";
    EXPECT_NE(row.find(",converged,"), std::string::npos) << row;
    EXPECT_LE(std::stod(row.substr(last + 1)), 1e-4) << row;
  }
  EXPECT_EQ(refs, 2);
  EXPECT_EQ(cells, 4);
  // Reference first within each cell.
  EXPECT_NE(ls[1].find(",reference,"), std::string::npos);
  EXPECT_NE(ls[4].find(",reference,"), std::string::npos);

  const auto prof = lines(slurp(out + ".profile.csv"));
  ASSERT_EQ(prof.size(), 7u);
  EXPECT_EQ(prof[0], "solver,instance,time_ms,success");
  for (std::size_t i = 1; i < prof.size(); ++i) EXPECT_EQ(prof[i].back(), '1') << prof[i];
}
