#include "tubecantor/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "tubecantor/analysis.hpp"
#include "tubecantor/cantor.hpp"
#include "tubecantor/errors.hpp"
#include "tubecantor/io.hpp"
#include "tubecantor/verify.hpp"

namespace tubecantor {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

ordered_json load_manifest(const fs::path& run) {
  const fs::path path = run / "manifest.json";
  if (!fs::exists(path)) throw ConfigError("no manifest.json in " + run.string());
  try {
    return ordered_json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed manifest: ") + e.what());
  }
}

void save_json(const fs::path& path, const ordered_json& j) { write_atomic(path, j.dump(2) + "\n"); }

int cmd_params(int d, double s, double C_abs, double delta, std::ostream& out) {
  const int k = select_k(d, s);
  BoundInputs in;
  in.d = d;
  in.s = s;
  in.k = k;
  in.delta = delta;
  in.C_abs = C_abs;
  const std::int64_t m = choose_m(in);
  in.m = static_cast<double>(m);
  const double eta = eta_for(delta, s, d, m);
  const double r_coeff = 2.0 * (1.0 + std::sqrt(static_cast<double>(d)));
  out << "d = " << d << "\n";
  out << "s = " << fmt(s) << "\n";
  out << "delta = " << fmt(delta) << "\n";
  out << "C_abs = " << fmt(C_abs) << "\n";
  out << "k = " << k << "\n";
  out << "D = e*C_abs*delta^(s-d+1) = " << fmt(in.D()) << "\n";
  out << "m = " << m << "\n";
  out << "eta = delta^((d-s)/d) * m^(-s/d) = " << fmt(eta) << "\n";
  out << "spacing = 5d*eta = " << fmt(5.0 * d * eta) << "\n";
  out << "cells per parent = (delta*m)^s = " << fmt(std::pow(delta * in.m, s)) << "\n";
  out << "cluster total = " << fmt(total_cluster_bound(in).direct) << " (limit " << fmt(std::pow(delta * in.m, s) / 100.0)
      << ")\n";
  out << "r = max(1, 2(1+sqrt(d))*eps*m), eps = delta*N^(-1/s)\n";
  for (int N = 1; N <= 4; ++N) {
    const double eps = derive_epsilon(static_cast<std::size_t>(N), delta, s);
    out << "  N = " << N << ": eps = " << fmt(eps) << ", r = " << fmt(std::max(1.0, r_coeff * eps * in.m)) << "\n";
  }
  return kExitOk;
}

int cmd_construct(const fs::path& config, const fs::path& run, std::ostream& out) {
  const RunConfig cfg = read_config(config);
  const CantorSchedule sc = to_schedule(cfg);
  const CantorSet cs = build_cantor(sc);
  fs::create_directories(run);
  for (std::size_t n = 1; n <= cs.depth(); ++n) {
    const GenerationOutput& g = cs.generations[n - 1];
    write_atomic(run / ("cubes_gen_" + std::to_string(n) + ".csv"), cubes_csv(static_cast<int>(n), g.children, g.child_parent));
    write_atomic(run / ("points_gen_" + std::to_string(n) + ".csv"), points_csv(static_cast<int>(n), g.points, g.child_parent));
    out << "generation " << n << ": m = " << g.params.m << ", N = " << g.N << ", cubes = " << g.children.size()
        << ", side = " << fmt(g.epsilon) << ", retries = " << g.retries << "\n";
  }
  save_json(run / "manifest.json", manifest_json(cfg, cs));
  return kExitOk;
}

int cmd_verify(const fs::path& run, const VerifyOptions& opt, std::ostream& out) {
  ordered_json manifest = load_manifest(run);
  const std::size_t depth = manifest.at("generations").size();
  ordered_json reports = ordered_json::array();
  bool all_pass = true;
  double law = 0.0;
  for (std::size_t n = 1; n <= depth; ++n) {
    const VerifyInput in = load_verify_input(run, manifest, static_cast<int>(n));
    const VerificationReport r = full_report(in, opt);
    all_pass = all_pass && r.all_pass();
    law = std::max(law, r.intermediate_law.measured);
    for (const CheckResult* c : r.checks()) {
      out << "generation " << n << " " << c->name << " " << (c->pass ? "PASS" : "FAIL") << " measured=" << fmt(c->measured)
          << " limit=" << fmt(c->limit);
      if (!c->detail.empty()) out << " (" << c->detail << ")";
      out << "\n";
    }
    reports.push_back(to_json(r));
  }
  ordered_json doc;
  doc["tool_version"] = kToolVersion;
  doc["seed"] = manifest.at("config").at("seed");
  doc["all_pass"] = all_pass;
  doc["generations"] = reports;
  save_json(run / "verification.json", doc);
  manifest["constants"]["law_constant"] = law;
  save_json(run / "manifest.json", manifest);
  out << (all_pass ? "verification passed" : "verification FAILED") << "\n";
  return all_pass ? kExitOk : kExitVerification;
}

int cmd_sweep(const fs::path& run, std::size_t count, std::optional<double> w_min, double w_max,
              std::optional<std::uint64_t> seed, std::ostream& out) {
  ordered_json manifest = load_manifest(run);
  const CantorSet cs = load_cantor(run, manifest);
  const double lo = w_min.value_or(cs.side_lengths.back());
  const std::uint64_t sd = seed.value_or(manifest.at("config").at("seed").get<std::uint64_t>());
  const std::vector<Tube> tubes = sweep_tubes(cs, count, lo, w_max, sd);
  std::vector<ContentEstimate> est(tubes.size());
  for (std::size_t i = 0; i < tubes.size(); ++i) est[i] = tube_content_estimate(cs, tubes[i]);

  const int d = cs.d;
  std::string csv = "tube_id,width";
  for (int a = 0; a < d; ++a) csv += ",a" + std::to_string(a);
  for (int a = 0; a < d; ++a) csv += ",u" + std::to_string(a);
  csv += ",generation,count,estimate,ratio,trivial,extrapolated\n";
  double c_run = 0.0;
  std::vector<double> per_gen(cs.depth() + 1, 0.0);
  for (std::size_t i = 0; i < tubes.size(); ++i) {
    const double ratio = est[i].value / std::pow(tubes[i].width, cs.s);
    c_run = std::max(c_run, ratio);
    per_gen[est[i].generation] = std::max(per_gen[est[i].generation], ratio);
    csv += std::to_string(i) + "," + format_double(tubes[i].width);
    for (double x : tubes[i].anchor) csv += "," + format_double(x);
    for (double x : tubes[i].direction) csv += "," + format_double(x);
    csv += "," + std::to_string(est[i].generation) + "," + std::to_string(est[i].count) + "," + format_double(est[i].value) +
           "," + format_double(ratio) + "," + (est[i].trivial ? "1" : "0") + "," + (est[i].extrapolated ? "1" : "0") + "\n";
  }
  write_atomic(run / "content_profile.csv", csv);
  ordered_json by_gen = ordered_json::array();
  for (std::size_t n = 1; n <= cs.depth(); ++n) {
    by_gen.push_back(per_gen[n]);
    out << "max ratio generation " << n << " = " << fmt(per_gen[n]) << "\n";
  }
  manifest["constants"]["C_run"] = c_run;
  manifest["constants"]["C_run_by_generation"] = by_gen;
  save_json(run / "manifest.json", manifest);
  out << "C_run = " << fmt(c_run) << "\n";
  return kExitOk;
}

int cmd_montecarlo(const fs::path& config, std::size_t trials, std::size_t generation, bool proxy, const fs::path& dir,
                   std::ostream& out) {
  if (trials < 100) throw DomainError("Monte Carlo needs at least 100 trials");
  if (generation < 1) throw DomainError("generation must be at least 1");
  const RunConfig cfg = read_config(config);
  CantorSchedule sc = to_schedule(cfg);
  ParentFamily parents = root_family(sc.d);
  if (generation > 1) {
    CantorSchedule head = sc;
    head.n_generations = static_cast<int>(generation - 1);
    if (!head.m_schedule.empty()) {
      if (head.m_schedule.size() < generation) throw ConfigError("m schedule has no entry for the requested generation");
      head.m_schedule.resize(generation - 1);
    }
    const CantorSet cs = build_cantor(head);
    parents = ParentFamily{cs.cubes(cs.depth()), cs.side_lengths.back()};
  }
  if (!sc.m_schedule.empty() && sc.m_schedule.size() < generation) {
    throw ConfigError("m schedule has no entry for the requested generation");
  }
  const ConstructionParams p = generation_params(sc, generation - 1, parents.delta);
  const MainClaimReport mc = montecarlo_mainclaim(p, parents, trials);
  const EventsReport ev = montecarlo_events(p, parents, trials, proxy);

  auto row = [&](const std::string& name, std::size_t passes) {
    return name + "," + std::to_string(trials) + "," + std::to_string(passes) + "," +
           format_double(static_cast<double>(passes) / static_cast<double>(trials)) + "\n";
  };
  std::string csv = "event,trials,passes,frequency\n";
  csv += row("max_xr_ge_0.1", mc.exceed);
  csv += row("form5", ev.form5_passes);
  csv += row("form4a", ev.form4a_passes);
  if (ev.form4_evaluated) csv += row("form4_proxy", ev.form4_passes);
  std::string hist = "bin_lo,bin_hi,count\n";
  for (std::size_t b = 0; b < mc.histogram.size(); ++b) {
    const std::string hi = b + 1 < mc.bin_edges.size() ? format_double(mc.bin_edges[b + 1]) : "inf";
    hist += format_double(mc.bin_edges[b]) + "," + hi + "," + std::to_string(mc.histogram[b]) + "\n";
  }
  fs::create_directories(dir);
  write_atomic(dir / "montecarlo.csv", csv);
  write_atomic(dir / "xr_histogram.csv", hist);
  out << "generation " << generation << ", m = " << p.m << ", delta = " << fmt(p.delta) << ", trials = " << trials << "\n";
  out << csv;
  return kExitOk;
}

int cmd_export_svg(const fs::path& run, std::size_t generation, const std::optional<fs::path>& path, bool overlay,
                   std::ostream& out, std::ostream& err) {
  const ordered_json manifest = load_manifest(run);
  const int d = manifest.at("config").at("d").get<int>();
  if (d != 2) throw ConfigError("export-svg supports d = 2 only");
  const std::size_t depth = manifest.at("generations").size();
  if (generation < 1 || generation > depth) throw ConfigError("generation out of range");
  const CubeTable t = read_cubes_csv(run / ("cubes_gen_" + std::to_string(generation) + ".csv"), d);
  std::optional<Tube> tube;
  if (overlay) {
    const fs::path report = run / "verification.json";
    if (!fs::exists(report)) {
      err << "no verification.json; drawing without overlay\n";
    } else {
      try {
        const auto j = nlohmann::json::parse(read_file(report));
        const auto& g = j.at("generations").at(generation - 1);
        for (const auto& c : g.at("checks")) {
          if (c.at("name") == "thin_tube_max" && !c.at("witness").is_null()) tube = tube_from_json(c.at("witness"));
        }
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed verification.json: ") + e.what());
      }
    }
  }
  const fs::path target = path.value_or(run / ("gen_" + std::to_string(generation) + ".svg"));
  write_atomic(target, render_svg(t.cubes, tube));
  out << "wrote " << target.string() << " (" << t.cubes.size() << " cubes)\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Random Cantor sets with controlled tube intersections"};
  app.name("tubecantor");
  app.require_subcommand(1);

  int p_d = 2;
  double p_s = 0.5, p_C = 1.0, p_delta = 1.0;
  auto* params = app.add_subcommand("params", "Print k, m, eta and r for (d, s)");
  params->add_option("--d", p_d, "ambient dimension")->required();
  params->add_option("--s", p_s, "target dimension, 0 < s < d-1")->required();
  params->add_option("--C_abs,--C-abs", p_C, "absolute constant of the single-point bound");
  params->add_option("--delta", p_delta, "parent side length");

  std::string c_config, c_out = "run";
  auto* construct = app.add_subcommand("construct", "Build the generations of a config");
  construct->add_option("config", c_config, "key=value config file")->required();
  construct->add_option("--out,-o", c_out, "run directory");

  std::string v_run;
  VerifyOptions v_opt;
  auto* verify = app.add_subcommand("verify", "Check a run directory");
  verify->add_option("run", v_run, "run directory")->required();
  verify->add_option("--thin-samples", v_opt.thin_samples, "random width-2eps tubes");
  verify->add_option("--law-samples", v_opt.law_samples, "random tubes per law width");
  verify->add_option("--hypothesis-samples", v_opt.hypothesis_samples, "random width-2delta tubes");
  verify->add_option("--C-law", v_opt.C_law, "law constant limit");

  std::string s_run;
  std::size_t s_count = 1000;
  std::optional<double> s_wmin;
  double s_wmax = 1.0;
  std::optional<std::uint64_t> s_seed;
  auto* sweep = app.add_subcommand("sweep", "Tube content profile of a run");
  sweep->add_option("run", s_run, "run directory")->required();
  sweep->add_option("--tubes", s_count, "number of random tubes");
  sweep->add_option("--w-min", s_wmin, "smallest width (default: deepest side length)");
  sweep->add_option("--w-max", s_wmax, "largest width");
  sweep->add_option("--seed", s_seed, "sweep seed (default: manifest seed)");

  std::string m_config, m_out = ".";
  std::size_t m_trials = 200, m_gen = 1;
  bool m_no_proxy = false;
  auto* mc = app.add_subcommand("montecarlo", "Event frequencies at one generation");
  mc->add_option("config", m_config, "key=value config file")->required();
  mc->add_option("--trials", m_trials, "number of trials (>= 100)");
  mc->add_option("--generation", m_gen, "generation whose sampling is simulated");
  mc->add_flag("--no-form4-proxy", m_no_proxy, "skip the representative-tube proxy");
  mc->add_option("--out,-o", m_out, "output directory");

  std::string e_run;
  std::size_t e_gen = 1;
  std::optional<std::string> e_path;
  bool e_overlay = false;
  auto* svg = app.add_subcommand("export-svg", "Draw one generation (d = 2)");
  svg->add_option("run", e_run, "run directory")->required();
  svg->add_option("--generation", e_gen, "generation to draw");
  svg->add_option("--out,-o", e_path, "output file");
  svg->add_flag("--overlay", e_overlay, "draw the worst thin tube from verification.json");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*params) return cmd_params(p_d, p_s, p_C, p_delta, out);
    if (*construct) return cmd_construct(c_config, c_out, out);
    if (*verify) return cmd_verify(v_run, v_opt, out);
    if (*sweep) return cmd_sweep(s_run, s_count, s_wmin, s_wmax, s_seed, out);
    if (*mc) return cmd_montecarlo(m_config, m_trials, m_gen, !m_no_proxy, m_out, out);
    if (*svg) {
      std::optional<fs::path> path;
      if (e_path) path = fs::path(*e_path);
      return cmd_export_svg(e_run, e_gen, path, e_overlay, out, err);
    }
  } catch (const ConstructionFailed& e) {
    err << "construction failed: " << e.what() << "\n";
    if (e.generation() > 0) err << "generation: " << e.generation() << "\n";
    for (const auto& [reason, count] : e.failures()) err << "  " << reason << ": " << count << "\n";
    err << "dominant failure: " << e.dominant_failure() << "\n";
    return kExitConstruction;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace tubecantor
