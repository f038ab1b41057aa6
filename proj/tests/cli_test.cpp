#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "kahler_lens/catalog.hpp"
#include "kahler_lens/cli.hpp"

namespace kahler {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("kahler_lens_cli_test_" + name);
  fs::remove_all(d);
  return d;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream s(text);
  for (std::string l; std::getline(s, l);) out.push_back(l);
  return out;
}

TEST(Grid, ResolutionForms) {
  EXPECT_EQ(GridSpec::parse("5").resolution, std::vector<int>{5});
  EXPECT_EQ(GridSpec::parse("3x4").resolution, (std::vector<int>{3, 4}));
  EXPECT_EQ(GridSpec::parse(R"({"resolution": [2, 3]})").resolution, (std::vector<int>{2, 3}));
  EXPECT_THROW(GridSpec::parse("0"), ConfigError);
  EXPECT_THROW(GridSpec::parse("3x"), ConfigError);
  EXPECT_THROW(GridSpec::parse(""), ConfigError);
  EXPECT_THROW(GridSpec::parse("no/such/file.json"), ConfigError);
}

TEST(Grid, CellCentersRowMajor) {
  const auto f = build("lambda-graph");
  const auto pts = GridSpec::parse(R"({"box": {"lower": [0, -1], "upper": [1, 1]}, "resolution": 2})").points_for(*f);
  ASSERT_EQ(pts.size(), 4u);
  EXPECT_DOUBLE_EQ(pts[0][0], 0.25);
  EXPECT_DOUBLE_EQ(pts[0][1], -0.5);
  EXPECT_DOUBLE_EQ(pts[1][0], 0.25);
  EXPECT_DOUBLE_EQ(pts[1][1], 0.5);
  EXPECT_DOUBLE_EQ(pts[2][0], 0.75);
}

TEST(Grid, ExplicitPointsAndDomainErrors) {
  const auto f = build("weierstrass");
  EXPECT_EQ(GridSpec::parse(R"({"points": [[0.1, 0.2], [0, 0]]})").points_for(*f).size(), 2u);
  EXPECT_THROW(GridSpec::parse(R"({"points": [[0.1, 0.2, 0.3]]})").points_for(*f), ConfigError);
  EXPECT_THROW(GridSpec::parse(R"({"points": [[5, 5]]})").points_for(*f), DomainError);
  EXPECT_THROW(GridSpec::parse(R"({"box": {"lower": [-9, -9], "upper": [0, 0]}, "resolution": 2})").points_for(*f),
               DomainError);
  EXPECT_THROW(GridSpec::parse("2x2x2").points_for(*f), ConfigError);
}

TEST(Grid, ReadsFromFile) {
  const fs::path d = scratch_dir("grid");
  fs::create_directories(d);
  std::ofstream(d / "grid.json") << R"({"resolution": 3})";
  EXPECT_EQ(GridSpec::parse((d / "grid.json").string()).resolution, std::vector<int>{3});
  fs::remove_all(d);
}

TEST(Config, KeysAndDefaults) {
  const RunConfig c = RunConfig::from_json_text(
      R"({"immersion": "lambda-graph", "grid": 3, "identities": ["minimality", "dkappa-formula"],
          "tol_fd": 1e-5, "fd_step": 0.002, "fd_order": 2, "richardson": true, "seed": 9})");
  EXPECT_EQ(c.immersion, "lambda-graph");
  EXPECT_EQ(c.grid, "3");
  EXPECT_EQ(c.identities, "minimality,dkappa-formula");
  EXPECT_EQ(c.options.tol_fd, 1e-5);
  EXPECT_EQ(c.options.tol_fd_first, 1e-5);
  EXPECT_EQ(c.options.first.h, 0.002);
  EXPECT_EQ(c.options.laplacian.order, 2);
  EXPECT_TRUE(c.options.laplacian.richardson);
  EXPECT_EQ(c.options.seed, 9u);
  const RunConfig inline_descriptor = RunConfig::from_json_text(R"({"immersion": {"type": "catalog", "id": "weierstrass"}})");
  EXPECT_EQ(immersion_from_string(inline_descriptor.immersion)->id(), "weierstrass");
}

TEST(Config, ErrorsNameTheLine) {
  try {
    RunConfig::from_json_text("{\n  \"grid\": \"3\",\n  \"tol_alg\": \"tight\"\n}", "run.json");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("run.json:3:", 0), 0u) << e.what();
  }
  try {
    RunConfig::from_json_text("{\n\n  \"colour\": 1\n}", "run.json");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("run.json:3: unknown key", 0), 0u) << e.what();
  }
  EXPECT_THROW(RunConfig::from_json_text("{\"grid\": ", "run.json"), ConfigError);
  EXPECT_THROW(RunConfig::from_file("/no/such/config.json"), ConfigError);
}

TEST(Config, ValidateRejectsBadValues) {
  RunConfig c;
  c.options.tol_alg = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  RunConfig d;
  d.identities = "minimality,bogus";
  EXPECT_THROW(d.validate(), Error);
  RunConfig e;
  e.set_fd_order(3);
  EXPECT_THROW(e.validate(), ConfigError);
}

TEST(Threads, EnvironmentCapsParallelism) {
  EXPECT_EQ(thread_count(3), 3);
  ::setenv("KAHLER_LENS_THREADS", "2", 1);
  EXPECT_EQ(thread_count(), 2);
  ::unsetenv("KAHLER_LENS_THREADS");
  EXPECT_GE(thread_count(), 1);
}

TEST(Threads, ParallelForVisitsEveryIndexAndRethrows) {
  std::vector<int> seen(100, 0);
  parallel_for(seen.size(), 4, [&](std::size_t i) { seen[i] += 1; });
  for (int s : seen) EXPECT_EQ(s, 1);
  EXPECT_THROW(parallel_for(10, 3, [](std::size_t i) {
                 if (i == 7) throw DomainError("boom");
               }),
               DomainError);
}

TEST(Analyze, LambdaGraphRowsAreConstant) {
  RunConfig c;
  c.immersion = "lambda-graph";
  c.grid = "5";
  std::ostringstream out, err;
  ASSERT_EQ(run_analyze(c, out, err), 0) << err.str();
  const auto rows = lines(out.str());
  ASSERT_EQ(rows.size(), 26u);
  EXPECT_EQ(rows[0], "p1,p2,cos1,rank,kappa,minimality_residual,pluriminimality_residual,flags");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    std::stringstream s(rows[i]);
    std::vector<std::string> cells;
    for (std::string cell; std::getline(s, cell, ',');) cells.push_back(cell);
    EXPECT_NEAR(std::stod(cells[2]), 0.6, 1e-12);
    EXPECT_EQ(cells[3], "1");
    EXPECT_NEAR(std::stod(cells[4]), std::log(4.0), 1e-12);
  }
}

TEST(Analyze, RankHistogramsOfExamples) {
  RunConfig c;
  c.immersion = "lagrangian-plane";
  c.grid = "3";
  const auto lag = build(c.immersion);
  const auto pts = GridSpec::parse(c.grid).points_for(*lag);
  auto s = analyze_summary(*lag, analyze_points(*lag, pts, c), c);
  EXPECT_EQ(s["rank_histogram"], nlohmann::json({{"0", 9}}));
  EXPECT_EQ(s["classification"]["lagrangian_points"], 9);
  EXPECT_EQ(s["schema_version"], 1);

  c.immersion = "product";
  c.grid = "2";
  const auto prod = immersion_from_string(c.immersion);
  const auto ppts = GridSpec::parse(c.grid).points_for(*prod);
  s = analyze_summary(*prod, analyze_points(*prod, ppts, c), c);
  EXPECT_EQ(s["rank_histogram"], nlohmann::json({{"1", 16}}));
  EXPECT_EQ(s["classification"]["has_lagrangian"], 16);
}

TEST(Analyze, ComplexPointsReportInfiniteKappa) {
  RunConfig c;
  c.immersion = "complex-graph";
  c.grid = "2";
  const auto f = build(c.immersion);
  const auto rows = analyze_points(*f, GridSpec::parse(c.grid).points_for(*f), c);
  for (const auto& r : rows) {
    EXPECT_TRUE(std::isinf(r.kappa));
    EXPECT_NE(std::find(r.flags.begin(), r.flags.end(), "complex_point"), r.flags.end());
  }
  EXPECT_EQ(analyze_summary(*f, rows, c)["kappa"]["infinite"], 4);
}

TEST(Verify, WeierstrassHasNoFailures) {
  RunConfig c;
  c.grid = "3";
  std::ostringstream out, err;
  EXPECT_EQ(run_verify(c, out, err), 0) << err.str();
  EXPECT_EQ(out.str().find("\"verdict\":\"fail\""), std::string::npos);
}

TEST(Verify, GatedIdentityOnNonMinimalGraphSkipsWithExitZero) {
  RunConfig c;
  c.immersion = "nonminimal-graph";
  c.identities = "delta-kappa-pluriminimal";
  c.grid = "3";
  const auto f = build(c.immersion);
  const auto reports = verify_points(*f, GridSpec::parse(c.grid).points_for(*f), c);
  ASSERT_EQ(reports.size(), 9u);
  for (const auto& r : reports) EXPECT_EQ(r.verdict, Verdict::Skipped);
  const auto s = verify_summary(*f, reports, c);
  EXPECT_EQ(s["totals"]["skipped"], 9);
  EXPECT_EQ(s["exit_status"], 0);
  std::ostringstream out, err;
  EXPECT_EQ(run_verify(c, out, err), 0);
}

TEST(Verify, ImpossibleToleranceFails) {
  RunConfig c;
  c.immersion = "lambda-graph-family";
  c.grid = "2";
  c.set_tol_fd(1e-300);
  std::ostringstream out, err;
  EXPECT_EQ(run_verify(c, out, err), 1);
}

TEST(Verify, ConfigurationErrorsExitTwo) {
  RunConfig c;
  c.immersion = "no-such-entry";
  std::ostringstream out, err;
  EXPECT_EQ(run_verify(c, out, err), 2);
  EXPECT_FALSE(err.str().empty());
  RunConfig d;
  d.grid = R"({"points": [[9, 9]]})";
  EXPECT_EQ(run_analyze(d, out, err), 2);
}

TEST(Verify, OutputIsIndependentOfThreadCount) {
  RunConfig c;
  c.grid = "3";
  std::string reference;
  for (int threads : {1, 3}) {
    c.threads = threads;
    const fs::path d = scratch_dir("threads" + std::to_string(threads));
    c.out = d.string();
    std::ostringstream out, err;
    ASSERT_EQ(run_verify(c, out, err), 0) << err.str();
    const std::string jsonl = slurp(d / "verify.jsonl") + slurp(d / "verify.csv") + slurp(d / "verify_summary.json");
    if (reference.empty()) reference = jsonl;
    else EXPECT_EQ(jsonl, reference);
    fs::remove_all(d);
  }
}

TEST(Verify, OutDirectoryHoldsReports) {
  RunConfig c;
  c.grid = "2";
  const fs::path d = scratch_dir("out");
  c.out = d.string();
  std::ostringstream out, err;
  ASSERT_EQ(run_verify(c, out, err), 0);
  ASSERT_EQ(run_analyze(c, out, err), 0);
  for (const char* name : {"verify.jsonl", "verify.csv", "verify_summary.json", "analyze.csv", "analyze_summary.json"})
    EXPECT_TRUE(fs::exists(d / name)) << name;
  const auto summary = nlohmann::json::parse(slurp(d / "verify_summary.json"));
  EXPECT_EQ(summary["schema_version"], 1);
  EXPECT_EQ(summary["totals"]["fail"], 0);
  fs::remove_all(d);
}

TEST(Catalog, ListAndDescribe) {
  std::ostringstream out, err;
  EXPECT_EQ(run_catalog_list(out), 0);
  EXPECT_NE(out.str().find("rotated-j-curve"), std::string::npos);
  std::ostringstream d;
  EXPECT_EQ(run_catalog_describe("weierstrass", d, err), 0);
  EXPECT_EQ(nlohmann::json::parse(d.str())["id"], "weierstrass");
  EXPECT_EQ(run_catalog_describe("nope", d, err), 2);
}

}  // namespace
}  // namespace kahler
