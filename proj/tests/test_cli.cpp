#include <gtest/gtest.h>

#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tubecantor/cli.hpp"
#include "tubecantor/io.hpp"

using namespace tubecantor;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Outcome r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

const fs::path kScratch = fs::temp_directory_path() / ("tubecantor_cli_" + std::to_string(getpid()));

struct ScratchCleanup {
  ~ScratchCleanup() { fs::remove_all(kScratch); }
} cleanup;

fs::path scratch(const std::string& name) {
  const fs::path p = kScratch / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "run.cfg";
  std::ofstream(p) << text;
  return p;
}

const std::string kReference = "d = 2\ns = 0.5\ngenerations = 2\nm = 100000, 100000000\nA = 4\nseed = 1\n";

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

std::size_t occurrences(const std::string& text, const std::string& what) {
  std::size_t n = 0;
  for (std::size_t at = text.find(what); at != std::string::npos; at = text.find(what, at + 1)) ++n;
  return n;
}

// Reference two-generation run built once and shared; tests that mutate files copy it first.
const fs::path& reference_run() {
  static const fs::path run = [] {
    const fs::path dir = scratch("reference");
    const Outcome r = cli({"construct", write_config(dir, kReference).string(), "--out", (dir / "run").string()});
    EXPECT_EQ(r.code, 0) << r.err;
    return dir / "run";
  }();
  return run;
}

fs::path copy_of_reference(const std::string& name) {
  const fs::path dst = scratch(name) / "run";
  fs::copy(reference_run(), dst, fs::copy_options::recursive);
  return dst;
}

}  // namespace

TEST(Params, ReferenceSelection) {
  const Outcome a = cli({"params", "--d", "2", "--s", "0.5"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_NE(a.out.find("k = 5\n"), std::string::npos);
  EXPECT_NE(a.out.find("m = 14858\n"), std::string::npos);
  EXPECT_NE(a.out.find("eta = "), std::string::npos);
  EXPECT_NE(a.out.find("N = 4: eps = 0.0625"), std::string::npos);
  EXPECT_EQ(a.out, cli({"params", "--d", "2", "--s", "0.5"}).out);
}

TEST(Params, InvalidDimensionPair) {
  const Outcome r = cli({"params", "--d", "2", "--s", "1"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("s < d-1"), std::string::npos) << r.err;
  EXPECT_EQ(cli({"params", "--d", "2"}).code, 2);
  EXPECT_EQ(cli({}).code, 2);
  EXPECT_EQ(cli({"frobnicate"}).code, 2);
}

TEST(Construct, ConfigErrors) {
  const fs::path dir = scratch("config_errors");
  EXPECT_EQ(cli({"construct", (dir / "missing.cfg").string()}).code, 2);
  EXPECT_EQ(cli({"construct", write_config(dir, "d = 2\ncolour = red\n").string()}).code, 2);
  EXPECT_EQ(cli({"construct", write_config(dir, "d = 2\ns = half\n").string()}).code, 2);
  EXPECT_EQ(cli({"construct", write_config(dir, "d = 2\ns = 1.5\n").string()}).code, 2);
  EXPECT_EQ(cli({"construct", write_config(dir, "generations = 2\nm = 1, 2, 3\n").string()}).code, 2);
}

TEST(Construct, FailureExitsThree) {
  const fs::path dir = scratch("fail");
  const Outcome r = cli({"construct", write_config(dir, "d = 2\ns = 0.5\nm = 400\nmax_retries = 3\n").string(), "--out",
                     (dir / "run").string()});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("dominant failure"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir / "run" / "manifest.json"));
}

TEST(Construct, FileCountsMatchSideLengths) {
  const fs::path& run = reference_run();
  const auto manifest = nlohmann::json::parse(read_file(run / "manifest.json"));
  ASSERT_EQ(manifest.at("generations").size(), 2u);
  for (int n = 1; n <= 2; ++n) {
    const auto rows = lines(read_file(run / ("cubes_gen_" + std::to_string(n) + ".csv")));
    const double side = manifest.at("generations")[n - 1].at("side").get<double>();
    EXPECT_EQ(static_cast<double>(rows.size() - 1), std::round(std::pow(side, -0.5)));
    EXPECT_EQ(rows.front(), "generation,cube_id,parent_id,c0,c1,side");
    EXPECT_TRUE(fs::exists(run / ("points_gen_" + std::to_string(n) + ".csv")));
  }
  EXPECT_EQ(manifest.at("k").get<int>(), 5);
  EXPECT_EQ(manifest.at("tool_version").get<std::string>(), kToolVersion);
}

// 17 significant digits: every value read back equals the in-memory build bit for bit.
TEST(Construct, CsvRoundTripsExactly) {
  const fs::path& run = reference_run();
  const auto manifest = nlohmann::json::parse(read_file(run / "manifest.json"));
  const CantorSet cs = load_cantor(run, manifest);
  const CantorSet fresh = build_cantor(to_schedule(parse_config(kReference)));
  for (std::size_t n = 1; n <= 2; ++n) {
    EXPECT_EQ(cs.cubes(n), fresh.cubes(n));
    EXPECT_EQ(cs.parents(n), fresh.parents(n));
  }
}

TEST(Construct, ByteIdenticalAcrossRunsAndThreadCounts) {
  const fs::path dir = scratch("determinism");
  const fs::path cfg = write_config(dir, kReference);
  setenv("TUBECANTOR_THREADS", "1", 1);
  ASSERT_EQ(cli({"construct", cfg.string(), "--out", (dir / "a").string()}).code, 0);
  setenv("TUBECANTOR_THREADS", "4", 1);
  ASSERT_EQ(cli({"construct", cfg.string(), "--out", (dir / "b").string()}).code, 0);
  unsetenv("TUBECANTOR_THREADS");
  for (const std::string f : {"cubes_gen_1.csv", "cubes_gen_2.csv", "points_gen_1.csv", "points_gen_2.csv", "manifest.json"}) {
    EXPECT_EQ(read_file(dir / "a" / f), read_file(dir / "b" / f)) << f;
    EXPECT_EQ(read_file(dir / "a" / f), read_file(reference_run() / f)) << f;
  }
}

TEST(Verify, FreshRunPassesAndEmbedsSeed) {
  const fs::path run = copy_of_reference("verify_fresh");
  const Outcome r = cli({"verify", run.string()});
  EXPECT_EQ(r.code, 0) << r.out;
  const auto report = nlohmann::json::parse(read_file(run / "verification.json"));
  EXPECT_EQ(report.at("seed").get<int>(), 1);
  EXPECT_TRUE(report.at("all_pass").get<bool>());
  ASSERT_EQ(report.at("generations").size(), 2u);
  EXPECT_EQ(report.at("generations")[0].at("seed").get<std::uint64_t>(),
            nlohmann::json::parse(read_file(run / "manifest.json")).at("generations")[0].at("seed").get<std::uint64_t>());
  const auto manifest = nlohmann::json::parse(read_file(run / "manifest.json"));
  EXPECT_TRUE(manifest.at("constants").at("law_constant").is_number());
}

TEST(Verify, DuplicateRowExitsFour) {
  const fs::path run = copy_of_reference("verify_dup");
  const fs::path f = run / "cubes_gen_2.csv";
  const auto rows = lines(read_file(f));
  std::ofstream(f, std::ios::app) << rows[1] << "\n";
  const Outcome r = cli({"verify", run.string()});
  EXPECT_EQ(r.code, 4);
  EXPECT_NE(r.out.find("integrity FAIL"), std::string::npos);
}

TEST(Verify, CorruptInputsExitTwo) {
  const fs::path run = copy_of_reference("verify_corrupt");
  std::ofstream(run / "cubes_gen_1.csv", std::ios::app) << "1,99,0,0.5\n";
  EXPECT_EQ(cli({"verify", run.string()}).code, 2);
  EXPECT_EQ(cli({"verify", (run / "nowhere").string()}).code, 2);
  std::ofstream(run / "manifest.json") << "{ not json";
  EXPECT_EQ(cli({"verify", run.string()}).code, 2);
}

TEST(Sweep, ProfileAndManifestUpdate) {
  const fs::path run = copy_of_reference("sweep");
  const Outcome r = cli({"sweep", run.string(), "--tubes", "400"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines(read_file(run / "content_profile.csv"));
  ASSERT_EQ(rows.size(), 401u);
  EXPECT_EQ(rows.front(), "tube_id,width,a0,a1,u0,u1,generation,count,estimate,ratio,trivial,extrapolated");
  double c_run = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    std::vector<std::string> f;
    std::istringstream is(rows[i]);
    for (std::string x; std::getline(is, x, ',');) f.push_back(x);
    ASSERT_EQ(f.size(), 12u);
    const double width = std::stod(f[1]), ratio = std::stod(f[9]);
    if (width >= 1.0) EXPECT_LE(ratio, 1.0);
    c_run = std::max(c_run, ratio);
  }
  const auto manifest = nlohmann::json::parse(read_file(run / "manifest.json"));
  EXPECT_EQ(manifest.at("constants").at("C_run").get<double>(), c_run);
  EXPECT_TRUE(std::isfinite(c_run));
  EXPECT_EQ(manifest.at("constants").at("C_run_by_generation").size(), 2u);
}

TEST(Sweep, WideRangeClampsAndMoreTubesNeverLowerMax) {
  const fs::path run = copy_of_reference("sweep_more");
  ASSERT_EQ(cli({"sweep", run.string(), "--tubes", "100", "--w-min", "1", "--w-max", "4"}).code, 0);
  const auto rows = lines(read_file(run / "content_profile.csv"));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    std::vector<std::string> f;
    std::istringstream is(rows[i]);
    for (std::string x; std::getline(is, x, ',');) f.push_back(x);
    EXPECT_EQ(f[10], "1");
    EXPECT_LE(std::stod(f[9]), 1.0);
  }
  auto c_run = [&](const std::string& tubes) {
    EXPECT_EQ(cli({"sweep", run.string(), "--tubes", tubes}).code, 0);
    return nlohmann::json::parse(read_file(run / "manifest.json")).at("constants").at("C_run").get<double>();
  };
  const double a = c_run("200");
  EXPECT_GE(c_run("400"), a);
}

TEST(MonteCarlo, HeaderRangeAndReproducible) {
  const fs::path dir = scratch("mc");
  const fs::path cfg = write_config(dir, "d = 2\ns = 0.5\nm = 100000\n");
  ASSERT_EQ(cli({"montecarlo", cfg.string(), "--trials", "100", "--no-form4-proxy", "--out", (dir / "a").string()}).code, 0);
  ASSERT_EQ(cli({"montecarlo", cfg.string(), "--trials", "100", "--no-form4-proxy", "--out", (dir / "b").string()}).code, 0);
  const std::string csv = read_file(dir / "a" / "montecarlo.csv");
  EXPECT_EQ(csv, read_file(dir / "b" / "montecarlo.csv"));
  const auto rows = lines(csv);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], "event,trials,passes,frequency");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double f = std::stod(rows[i].substr(rows[i].rfind(',') + 1));
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 1.0);
  }
  const auto hist = lines(read_file(dir / "a" / "xr_histogram.csv"));
  EXPECT_EQ(hist.front(), "bin_lo,bin_hi,count");
  EXPECT_EQ(cli({"montecarlo", cfg.string(), "--trials", "50", "--out", (dir / "c").string()}).code, 2);
}

TEST(ExportSvg, RectCountAndStableBytes) {
  const fs::path run = copy_of_reference("svg");
  ASSERT_EQ(cli({"export-svg", run.string(), "--generation", "1"}).code, 0);
  const std::string a = read_file(run / "gen_1.svg");
  EXPECT_EQ(occurrences(a, "<rect"), 4u);
  ASSERT_EQ(cli({"export-svg", run.string(), "--generation", "1", "--out", (run / "again.svg").string()}).code, 0);
  EXPECT_EQ(a, read_file(run / "again.svg"));
  ASSERT_EQ(cli({"export-svg", run.string(), "--generation", "2"}).code, 0);
  EXPECT_EQ(occurrences(read_file(run / "gen_2.svg"), "<rect"), 60u);
  EXPECT_EQ(cli({"export-svg", run.string(), "--generation", "3"}).code, 2);
}

TEST(ExportSvg, OverlayDrawsWitness) {
  const fs::path run = copy_of_reference("svg_overlay");
  ASSERT_EQ(cli({"verify", run.string()}).code, 0);
  ASSERT_EQ(cli({"export-svg", run.string(), "--overlay"}).code, 0);
  const auto report = nlohmann::json::parse(read_file(run / "verification.json"));
  std::size_t witnesses = 0;
  for (const auto& c : report.at("generations")[0].at("checks")) witnesses += c.at("name") == "thin_tube_max" && !c.at("witness").is_null();
  EXPECT_EQ(occurrences(read_file(run / "gen_1.svg"), "<polygon"), witnesses);
  ASSERT_EQ(cli({"export-svg", run.string(), "--out", (run / "plain.svg").string()}).code, 0);
  EXPECT_EQ(occurrences(read_file(run / "plain.svg"), "<polygon"), 0u);
}

TEST(ExportSvg, ThreeDimensionalRunRejected) {
  const fs::path run = scratch("svg3") / "run";
  fs::create_directories(run);
  std::ofstream(run / "manifest.json") << R"({"config": {"d": 3}, "generations": [{}]})";
  EXPECT_EQ(cli({"export-svg", run.string()}).code, 2);
}
