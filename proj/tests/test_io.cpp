#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "dspg/io.hpp"
#include "test_support.hpp"

using namespace dspg;
namespace fs = std::filesystem;

namespace {

SymMat parse(const std::string& text) {
  std::istringstream in(text);
  return parse_matrix(in, "m.mtx");
}

std::size_t error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  ADD_FAILURE() << "no ParseError for:\n" << text;
  return 0;
}

class TempDir : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dspg_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  void write(const std::string& name, const std::string& text) {
    std::ofstream(dir_ / name) << text;
  }

  fs::path dir_;
};

}  // namespace

TEST(ParseMatrix, Valid) {
  const SymMat m = parse("%%SymCoord 3 3\n1 1 2.5\n\n1 3 -1\n3 3 4\n");
  EXPECT_EQ(m(0, 0), 2.5);
  EXPECT_EQ(m(2, 0), -1.0);
  EXPECT_EQ(m(1, 1), 0.0);
  EXPECT_EQ(parse("%%SymCoord 2 0\n"), SymMat::zeros(2));
}

TEST(ParseMatrix, ErrorsCarryLineNumbers) {
  EXPECT_EQ(error_line(""), 1u);
  EXPECT_EQ(error_line("SymCoord 2 1\n1 1 1\n"), 1u);
  EXPECT_EQ(error_line("%%SymCoord 2 2\n1 1 1\n1 1 2\n"), 3u);        // duplicate
  EXPECT_EQ(error_line("%%SymCoord 2 2\n1 1 1\n2 1 2\n"), 3u);        // lower triangle
  EXPECT_EQ(error_line("%%SymCoord 2 1\n3 3 1\n"), 2u);               // beyond n
  EXPECT_EQ(error_line("%%SymCoord 2 1\n1 1 abc\n"), 2u);
  EXPECT_EQ(error_line("%%SymCoord 2 1\n1 1\n"), 2u);
  EXPECT_EQ(error_line("%%SymCoord 2 1\n1 1 nan\n"), 2u);
  EXPECT_EQ(error_line("%%SymCoord 2 1\n1 1 1\n2 2 1\n"), 3u);        // too many
  EXPECT_EQ(error_line("%%SymCoord 2 2\n1 1 1\n"), 2u);               // too few
}

TEST(ParseMatrix, MessageNamesFileAndLine) {
  try {
    parse("%%SymCoord 2 2\n1 1 1\n1 1 2\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.file(), "m.mtx");
    EXPECT_NE(std::string(e.what()).find("m.mtx:3:"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("duplicate"), std::string::npos);
  }
}

TEST(WriteMatrix, RoundTripIsExact) {
  std::mt19937_64 rng(4);
  for (const Index n : {1, 5, 30}) {
    SymMat m = test::random_sym(n, rng, -1e3, 1e3);
    m.set(0, n - 1, 1.0 / 3.0);
    std::ostringstream out;
    write_matrix(out, m);
    std::istringstream in(out.str());
    EXPECT_EQ(parse_matrix(in, "rt"), m);
  }
}

TEST(Format, ExactAndDisplay) {
  const double v = 0.1 + 0.2;
  EXPECT_EQ(std::stod(format_exact(v)), v);
  EXPECT_EQ(format_display(-0.000135661234567891), "-0.000135661234568");
  EXPECT_EQ(round_display(1.0 / 3.0), 0.333333333333);
}

TEST_F(TempDir, ManifestRoundTrip) {
  InstanceManifest m;
  m.n = 3;
  m.mu = 2.0;
  m.rho_uniform = 0.25;
  m.c_path = "C.mtx";
  m.zero_pattern = std::vector<IndexPair>{{0, 2}, {1, 2}};
  m.metadata["note"] = "x";
  write_manifest(dir_ / "manifest.json", m);
  const auto back = read_manifest(dir_ / "manifest.json");
  EXPECT_EQ(back.n, 3);
  EXPECT_EQ(back.mu, 2.0);
  EXPECT_EQ(*back.rho_uniform, 0.25);
  EXPECT_EQ(*back.zero_pattern, *m.zero_pattern);
  EXPECT_EQ(back.metadata, m.metadata);
  std::ifstream raw(dir_ / "manifest.json");
  const std::string text((std::istreambuf_iterator<char>(raw)), {});
  EXPECT_NE(text.find("[\n        1,\n        3\n      ]"), std::string::npos) << "1-based on disk";
}

TEST_F(TempDir, ZeroPatternManifestBuildsConstraints) {
  write("C.mtx", "%%SymCoord 2 2\n1 1 1\n2 2 1\n");
  write("manifest.json",
        R"({"schema_version":1,"n":2,"rho":{"uniform":0.1},"c_path":"C.mtx",)"
        R"("constraints":{"zero_pattern":[[1,2]]}})");
  const auto inst = read_instance(dir_ / "manifest.json");
  EXPECT_EQ(inst.m(), 1);
  EXPECT_EQ(inst.map().rhs()(0), 0.0);
  ASSERT_TRUE(inst.zero_pattern().has_value());
  EXPECT_EQ(inst.zero_pattern()->front(), (IndexPair{0, 1}));
  EXPECT_EQ(inst.mu(), 1.0);
  EXPECT_EQ(inst.rho()(0, 1), 0.1);
}

TEST_F(TempDir, GeneralConstraintsAndRhoMatrix) {
  write("C.mtx", "%%SymCoord 2 2\n1 1 2\n2 2 2\n");
  write("R.mtx", "%%SymCoord 2 1\n1 2 0.3\n");
  write("A1.mtx", "%%SymCoord 2 2\n1 1 1\n2 2 1\n");
  write("manifest.json",
        R"({"schema_version":1,"n":2,"mu":0.5,"rho":{"matrix":"R.mtx"},"c_path":"C.mtx",)"
        R"("constraints":{"general":[{"matrix":"A1.mtx","b":1.5}]}})");
  const auto m = read_manifest(dir_ / "manifest.json");
  const auto inst = load_instance(m);
  EXPECT_EQ(inst.m(), 1);
  EXPECT_EQ(inst.map().rhs()(0), 1.5);
  EXPECT_EQ(inst.rho()(0, 1), 0.3);
  EXPECT_EQ(inst.rho()(0, 0), 0.0);
  EXPECT_THROW(load_instance(m, 0.2), ValidationError);
}

TEST_F(TempDir, ManifestErrors) {
  write("C.mtx", "%%SymCoord 2 2\n1 1 1\n2 2 1\n");
  write("a.json", R"({"schema_version":2,"n":2,"rho":{"uniform":0.1},"c_path":"C.mtx"})");
  EXPECT_THROW(read_manifest(dir_ / "a.json"), ParseError);
  write("b.json", R"({"schema_version":1,"n":2,"rho":{"uniform":-1},"c_path":"C.mtx"})");
  EXPECT_THROW(read_manifest(dir_ / "b.json"), ValidationError);
  write("c.json", R"({"schema_version":1,"n":2,"rho":{"uniform":0.1},"c_path":"C.mtx",)"
                  R"("constraints":{"zero_pattern":[[2,1]]}})");
  EXPECT_THROW(read_manifest(dir_ / "c.json"), ValidationError);
  write("d.json", R"({"schema_version":1,"n":3,"rho":{"uniform":0.1},"c_path":"C.mtx"})");
  EXPECT_THROW(read_instance(dir_ / "d.json"), ValidationError);
  write("e.json", "{not json");
  EXPECT_THROW(read_manifest(dir_ / "e.json"), ParseError);
  EXPECT_THROW(read_manifest(dir_ / "missing.json"), ParseError);
}

TEST_F(TempDir, ReportDoublesAsInit) {
  const auto inst = test::uniform_instance(test::synthetic_covariance(8, 0.3, 2), 0.1);
  SolverConfig cfg;
  const auto rep = solve(inst, cfg);
  ASSERT_EQ(rep.status, SolveStatus::Converged);
  write_report(dir_ / "report.json", rep, inst, cfg);
  EXPECT_TRUE(fs::exists(dir_ / "report.json.W.mtx"));
  EXPECT_TRUE(fs::exists(dir_ / "report.json.X.mtx"));
  const auto [y, w] = read_init(dir_ / "report.json", inst);
  EXPECT_EQ(w, rep.w);
  const auto again = solve(inst, cfg, std::make_pair(y, w));
  EXPECT_EQ(again.status, SolveStatus::Converged);
  EXPECT_EQ(again.iterations, 0);
  EXPECT_EQ(read_matrix_file(dir_ / "report.json.X.mtx"), rep.x);
}

TEST(TraceCsv, Header) {
  std::ostringstream out;
  IterationRecord r;
  r.k = 3;
  write_trace_csv(out, {r});
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "k,g,direction_inf,alpha,lambda,inner_steps");
}
