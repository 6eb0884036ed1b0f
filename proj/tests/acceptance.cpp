// Acceptance run: one PASS/FAIL line per criterion at the reference configuration
// (d = 2, s = 0.5, k = 5, A = 4, m = 1e5 then 1e8). Exit status is the number of failures.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tubecantor/cantor.hpp"
#include "tubecantor/io.hpp"
#include "tubecantor/verify.hpp"

using namespace tubecantor;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kRoot = fs::temp_directory_path() / ("tubecantor_acceptance_" + std::to_string(getpid()));

std::string config_text(std::uint64_t seed, int generations = 2) {
  return "d = 2\ns = 0.5\ngenerations = " + std::to_string(generations) +
         (generations == 1 ? "\nm = 100000" : "\nm = 100000, 100000000") + "\nA = 4\nseed = " + std::to_string(seed) + "\n";
}

int tool(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + "'" + std::string(TUBECANTOR_EXE) + "' " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path construct(const std::string& name, const std::string& cfg_text, const std::string& env = "") {
  const fs::path dir = kRoot / name;
  fs::create_directories(dir);
  std::ofstream(dir / "run.cfg") << cfg_text;
  const int code = tool("construct '" + (dir / "run.cfg").string() + "' --out '" + (dir / "run").string() + "'", env);
  if (code != 0) throw std::runtime_error("construct " + name + " exited " + std::to_string(code));
  return dir / "run";
}

json manifest_of(const fs::path& run) { return json::parse(read_file(run / "manifest.json")); }

std::vector<VerificationReport> reports_of(const fs::path& run) {
  const json m = manifest_of(run);
  VerifyOptions opt;
  opt.thin_samples = 10000;
  opt.law_samples = 1000;
  std::vector<VerificationReport> out;
  for (std::size_t n = 1; n <= m.at("generations").size(); ++n) out.push_back(full_report(load_verify_input(run, m, static_cast<int>(n)), opt));
  return out;
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

struct Line {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Line()>& body) {
  Line l;
  try {
    l = body();
  } catch (const std::exception& e) {
    l = {false, std::string("error: ") + e.what()};
  }
  failures += !l.pass;
  std::cout << "criterion " << id << " " << (l.pass ? "PASS" : "FAIL") << " [" << title << "] " << l.detail << std::endl;
}

// Names of failing checks across all generations of a verified run directory.
std::set<std::string> failing_checks(const fs::path& run) {
  std::set<std::string> out;
  const json report = json::parse(read_file(run / "verification.json"));
  for (const auto& g : report.at("generations")) {
    for (const auto& c : g.at("checks")) {
      if (!c.at("pass").get<bool>()) out.insert(c.at("name").get<std::string>());
    }
  }
  return out;
}

// One-generation run directory with unit parent and hand-placed children of side eps.
fs::path hand_fixture(const std::string& name, std::int64_t m, double eps, const std::vector<Point>& centres) {
  const fs::path run = kRoot / name / "run";
  fs::create_directories(run);
  std::vector<Cube> cubes;
  for (const Point& c : centres) cubes.push_back(Cube{c, eps});
  write_atomic(run / "cubes_gen_1.csv", cubes_csv(1, cubes, std::vector<std::size_t>(cubes.size(), 0)));
  json man;
  man["tool_version"] = kToolVersion;
  man["config"] = {{"d", 2}, {"s", 0.5}, {"generations", 1}, {"m", {m}}, {"A", 4}, {"seed", 1}};
  man["k"] = 5;
  man["generations"] = json::array({{{"generation", 1}, {"m", m}, {"seed", 1}, {"side", eps}, {"tube_removed", 0}, {"tube_budget", 10}}});
  write_atomic(run / "manifest.json", man.dump(2));
  return run;
}

std::vector<std::string> lines(const fs::path& f) {
  std::vector<std::string> out;
  std::istringstream is(read_file(f));
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

void write_lines(const fs::path& f, const std::vector<std::string>& rows) {
  std::string s;
  for (const auto& r : rows) s += r + "\n";
  write_atomic(f, s);
}

}  // namespace

int main() {
  fs::remove_all(kRoot);
  fs::create_directories(kRoot);

  fs::path reference;
  std::vector<VerificationReport> ref_reports;
  try {
    reference = construct("seed1", config_text(1));
    ref_reports = reports_of(reference);
  } catch (const std::exception& e) {
    std::cout << "reference construction failed: " << e.what() << std::endl;
  }
  const json ref_manifest = reference.empty() ? json() : manifest_of(reference);

  report(1, "exact counts", [&] {
    const CantorSet cs = load_cantor(reference, ref_manifest);
    Line l;
    for (std::size_t n = 1; n <= 2; ++n) {
      const double expected = std::pow(cs.side_lengths[n], -0.5);
      const bool integral = expected == std::round(expected);
      const std::size_t N = ref_manifest.at("generations")[n - 1].at("N").get<std::size_t>();
      std::map<std::size_t, std::size_t> per_parent;
      for (std::size_t p : cs.parents(n)) ++per_parent[p];
      bool each = per_parent.size() == cs.cubes(n - 1).size();
      for (const auto& [p, c] : per_parent) each = each && c == N;
      l.pass = l.pass && integral && static_cast<double>(cs.cubes(n).size()) == expected && each;
      l.detail += "gen " + std::to_string(n) + ": " + std::to_string(cs.cubes(n).size()) + " cubes, l^-1/2 = " + num(expected) +
                  ", N = " + std::to_string(N) + (each ? " in every parent; " : " NOT in every parent; ");
    }
    return l;
  });

  report(2, "eta separation", [&] {
    Line l;
    for (const auto& r : ref_reports) {
      const bool ok = r.eta_separation.pass && r.eta_separation.measured >= 5 * r.d * r.eta - 1e-12;
      l.pass = l.pass && ok;
      l.detail += "gen " + std::to_string(r.generation) + ": min distance " + num(r.eta_separation.measured) + " vs 5d*eta " +
                  num(5 * r.d * r.eta) + ", grid audit " + (r.eta_separation.pass ? "clean" : "FAILED") + "; ";
    }
    return l;
  });

  report(3, "thin tubes", [&] {
    Line l;
    for (const auto& r : ref_reports) {
      l.pass = l.pass && r.thin_tube_max.pass && r.thin_tube_max.measured <= 5;
      l.detail += "gen " + std::to_string(r.generation) + ": max " + num(r.thin_tube_max.measured) + " <= k = 5 over pair tubes + 10^4 random; ";
    }
    return l;
  });

  report(4, "intermediate law", [&] {
    std::vector<std::vector<double>> constants(2);
    Line l;
    for (std::uint64_t seed : {1, 2, 3}) {
      const auto reps = seed == 1 ? ref_reports : reports_of(construct("seed" + std::to_string(seed), config_text(seed)));
      for (const auto& r : reps) {
        constants[r.generation - 1].push_back(r.intermediate_law.measured);
        l.pass = l.pass && r.intermediate_law.measured <= 8.0;
      }
    }
    for (std::size_t g = 0; g < 2; ++g) {
      const auto [lo, hi] = std::minmax_element(constants[g].begin(), constants[g].end());
      const bool stable = constants[g].size() == 3 && *hi <= 2.0 * *lo;
      l.pass = l.pass && stable;
      l.detail += "gen " + std::to_string(g + 1) + " constants";
      for (double c : constants[g]) l.detail += " " + num(c);
      l.detail += " (spread " + num(*hi / *lo) + "); ";
    }
    return l;
  });

  report(5, "mass identity", [&] {
    const CantorSet cs = load_cantor(reference, ref_manifest);
    double worst = 0.0;
    for (std::size_t n = 0; n < cs.depth(); ++n) worst = std::max(worst, mass_check(cs, n));
    return Line{worst <= 1e-9, "max relative error " + num(worst)};
  });

  report(6, "tube content", [&] {
    const fs::path run = kRoot / "sweep" / "run";
    fs::create_directories(run.parent_path());
    fs::copy(reference, run, fs::copy_options::recursive);
    if (tool("sweep '" + run.string() + "' --tubes 1000") != 0) return Line{false, "sweep failed"};
    const json c = manifest_of(run).at("constants");
    const double c_run = c.at("C_run").get<double>();
    const double c1 = c.at("C_run_by_generation")[0].get<double>(), c2 = c.at("C_run_by_generation")[1].get<double>();
    const bool ok = std::isfinite(c_run) && c1 > 0 && c2 <= 2.0 * c1;
    return Line{ok, "C_run = " + num(c_run) + ", generation-1 max " + num(c1) + ", generation-2 max " + num(c2) +
                        ", growth " + num(c2 / c1)};
  });

  const fs::path mc_dir = kRoot / "montecarlo";
  bool mc_ok = false;
  std::map<std::string, double> freq;
  try {
    fs::create_directories(mc_dir);
    std::ofstream(mc_dir / "run.cfg") << config_text(1);
    mc_ok = tool("montecarlo '" + (mc_dir / "run.cfg").string() + "' --trials 200 --generation 1 --out '" + mc_dir.string() + "'") == 0;
    if (mc_ok) {
      const auto rows = lines(mc_dir / "montecarlo.csv");
      for (std::size_t i = 1; i < rows.size(); ++i) freq[rows[i].substr(0, rows[i].find(','))] = std::stod(rows[i].substr(rows[i].rfind(',') + 1));
    }
  } catch (const std::exception&) {
    mc_ok = false;
  }

  report(7, "cluster Monte Carlo", [&] {
    if (!mc_ok || !freq.count("max_xr_ge_0.1")) return Line{false, "montecarlo run failed"};
    return Line{freq["max_xr_ge_0.1"] < 0.1, "P(max X_R >= 1/10) = " + num(freq["max_xr_ge_0.1"]) + " over 200 trials at A = 4, m = 1e5"};
  });

  report(8, "event frequencies", [&] {
    if (!mc_ok) return Line{false, "montecarlo run failed"};
    bool budget = true;
    std::string budgets;
    for (std::uint64_t seed : {1, 2, 3}) {
      const json m = manifest_of(kRoot / ("seed" + std::to_string(seed)) / "run");
      for (const auto& g : m.at("generations")) {
        budget = budget && g.at("tube_removed").get<double>() <= g.at("tube_budget").get<double>();
        budgets += " " + std::to_string(g.at("tube_removed").get<int>()) + "/" + std::to_string(g.at("tube_budget").get<int>());
      }
    }
    const bool ok = freq["form5"] >= 0.9 && freq["form4a"] >= 0.9 && budget;
    std::string detail = "form5 " + num(freq["form5"]) + ", form4a " + num(freq["form4a"]);
    if (freq.count("form4_proxy")) detail += ", form4 proxy " + num(freq["form4_proxy"]);
    return Line{ok, detail + "; PRP(ii) removed/budget:" + budgets};
  });

  report(9, "determinism", [&] {
    const fs::path a = construct("threads1", config_text(1), "TUBECANTOR_THREADS=1");
    const fs::path b = construct("threads4", config_text(1), "TUBECANTOR_THREADS=4");
    const int va = tool("verify '" + a.string() + "'", "TUBECANTOR_THREADS=1");
    const int vb = tool("verify '" + b.string() + "'", "TUBECANTOR_THREADS=4");
    std::vector<std::string> differ;
    for (const std::string f : {"cubes_gen_1.csv", "cubes_gen_2.csv", "points_gen_1.csv", "points_gen_2.csv", "manifest.json",
                                "verification.json"}) {
      if (read_file(a / f) != read_file(b / f)) differ.push_back(f);
    }
    for (const std::string f : {"cubes_gen_1.csv", "cubes_gen_2.csv"}) {
      if (read_file(a / f) != read_file(reference / f)) differ.push_back("reference " + f);
    }
    std::string detail = "verify exits " + std::to_string(va) + "/" + std::to_string(vb) + "; ";
    detail += differ.empty() ? "CSVs, manifest and report byte-identical across 1 and 4 threads" : "differing:";
    for (const auto& f : differ) detail += " " + f;
    return Line{differ.empty() && va == 0 && vb == 0, detail};
  });

  report(10, "oracle independence", [&] {
    const fs::path base1 = kRoot / "base1";
    construct("base1", config_text(1, 1));
    std::map<std::string, std::pair<fs::path, std::string>> fixtures;
    auto copy_base = [&](const std::string& name, const fs::path& from) {
      const fs::path run = kRoot / name / "run";
      fs::create_directories(run.parent_path());
      fs::copy(from, run, fs::copy_options::recursive);
      return run;
    };

    {
      const fs::path run = copy_base("duplicate", base1 / "run");
      auto rows = lines(run / "cubes_gen_1.csv");
      rows.push_back(rows[1]);
      write_lines(run / "cubes_gen_1.csv", rows);
      fixtures["duplicate cube"] = {run, "integrity"};
    }
    {
      std::vector<Point> centres;
      for (int i = 0; i < 6; ++i) centres.push_back({0.1 + 0.17 * i, 0.5});
      for (double x : {0.2, 0.5, 0.8}) centres.push_back({x, 0.15});
      fixtures["collinear overload"] = {hand_fixture("collinear", 20000000, 1.0 / 81, centres), "thin_tube_max"};
    }
    fixtures["spacing breach"] = {hand_fixture("spacing", 100000000, 1.0 / 16, {{0.3, 0.3}, {0.37, 0.3}, {0.7, 0.7}, {0.2, 0.8}}),
                                  "eta_separation"};
    {
      const fs::path run = copy_base("miscount", base1 / "run");
      auto rows = lines(run / "cubes_gen_1.csv");
      rows.pop_back();
      write_lines(run / "cubes_gen_1.csv", rows);
      fixtures["miscounted parent"] = {run, "children_per_parent"};
    }
    {
      const fs::path run = copy_base("occupancy", base1 / "run");
      json m = manifest_of(run);
      m["generations"][0]["tube_removed"] = m["generations"][0]["tube_budget"].get<int>() + 1;
      write_atomic(run / "manifest.json", m.dump(2));
      fixtures["inflated tube occupancy"] = {run, "tube_budget"};
    }
    {
      const fs::path run = copy_base("nesting", reference);
      auto rows = lines(run / "cubes_gen_2.csv");
      // swap the parent_id fields of the first rows belonging to two different parents
      auto field = [](const std::string& r, int i) {
        std::vector<std::string> f;
        std::istringstream is(r);
        for (std::string x; std::getline(is, x, ',');) f.push_back(x);
        return f[static_cast<std::size_t>(i)];
      };
      auto with_parent = [&](const std::string& r, const std::string& p) {
        std::vector<std::string> f;
        std::istringstream is(r);
        for (std::string x; std::getline(is, x, ',');) f.push_back(x);
        f[2] = p;
        std::string out;
        for (std::size_t i = 0; i < f.size(); ++i) out += (i ? "," : "") + f[i];
        return out;
      };
      std::size_t j = 2;
      while (j < rows.size() && field(rows[j], 2) == field(rows[1], 2)) ++j;
      const std::string p1 = field(rows[1], 2), pj = field(rows[j], 2);
      rows[1] = with_parent(rows[1], pj);
      rows[j] = with_parent(rows[j], p1);
      write_lines(run / "cubes_gen_2.csv", rows);
      fixtures["broken nesting"] = {run, "nesting"};
    }

    Line l;
    for (const auto& [name, fx] : fixtures) {
      const int code = tool("verify '" + fx.first.string() + "'");
      const std::set<std::string> failed = code == 2 ? std::set<std::string>{} : failing_checks(fx.first);
      const bool ok = code == 4 && failed == std::set<std::string>{fx.second};
      l.pass = l.pass && ok;
      l.detail += name + ": exit " + std::to_string(code) + ", failed {";
      for (const auto& f : failed) l.detail += (f == *failed.begin() ? "" : ",") + f;
      l.detail += "}" + std::string(ok ? "" : " expected " + fx.second) + "; ";
    }
    return l;
  });

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  fs::remove_all(kRoot);
  return failures;
}
