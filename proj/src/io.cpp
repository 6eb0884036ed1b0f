#include "tubecantor/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "tubecantor/errors.hpp"

namespace tubecantor {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  std::istringstream is(value);
  is >> out;
  if (!is || !is.eof()) throw ConfigError("config key '" + key + "': cannot parse '" + value + "'");
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (value.empty()) throw ConfigError("config key '" + key + "' has no value");
    if (key == "d") {
      cfg.d = parse_number<int>(key, value);
    } else if (key == "s") {
      cfg.s = parse_number<double>(key, value);
    } else if (key == "generations") {
      cfg.generations = parse_number<int>(key, value);
    } else if (key == "m") {
      cfg.m.clear();
      if (value != "auto") {
        for (const std::string& part : split(value, ',')) cfg.m.push_back(parse_number<std::int64_t>(key, trim(part)));
      }
    } else if (key == "A") {
      cfg.A = parse_number<int>(key, value);
    } else if (key == "C_abs") {
      cfg.C_abs = parse_number<double>(key, value);
    } else if (key == "seed") {
      cfg.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "max_retries") {
      cfg.max_retries = parse_number<int>(key, value);
    } else if (key == "margin") {
      cfg.margin = parse_number<double>(key, value);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  return cfg;
}

RunConfig read_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

CantorSchedule to_schedule(const RunConfig& cfg) {
  CantorSchedule sc;
  sc.d = cfg.d;
  sc.s = cfg.s;
  sc.seed = cfg.seed;
  sc.n_generations = cfg.generations;
  if (cfg.m.size() == 1) {
    sc.m_schedule.assign(static_cast<std::size_t>(std::max(cfg.generations, 1)), cfg.m.front());
  } else {
    sc.m_schedule = cfg.m;
  }
  sc.A = cfg.A;
  sc.C_abs = cfg.C_abs;
  sc.max_retries = cfg.max_retries;
  sc.margin = cfg.margin;
  validate(sc);
  return sc;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw ConfigError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw ConfigError("cannot rename " + tmp.string() + ": " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::string coord_header(int d) {
  std::string h;
  for (int i = 0; i < d; ++i) h += ",c" + std::to_string(i);
  return h;
}

}  // namespace

std::string cubes_csv(int generation, const std::vector<Cube>& cubes, const std::vector<std::size_t>& parents) {
  const int d = cubes.empty() ? 0 : cubes.front().dim();
  std::string out = "generation,cube_id,parent_id" + coord_header(d) + ",side\n";
  for (std::size_t i = 0; i < cubes.size(); ++i) {
    out += std::to_string(generation) + "," + std::to_string(i) + "," + std::to_string(parents[i]);
    for (double c : cubes[i].center) out += "," + format_double(c);
    out += "," + format_double(cubes[i].side) + "\n";
  }
  return out;
}

std::string points_csv(int generation, const std::vector<Point>& points, const std::vector<std::size_t>& parents) {
  const int d = points.empty() ? 0 : static_cast<int>(points.front().size());
  std::string out = "generation,point_id,parent_id";
  for (int i = 0; i < d; ++i) out += ",x" + std::to_string(i);
  out += "\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    out += std::to_string(generation) + "," + std::to_string(i) + "," + std::to_string(parents[i]);
    for (double c : points[i]) out += "," + format_double(c);
    out += "\n";
  }
  return out;
}

CubeTable read_cubes_csv(const std::filesystem::path& path, int d) {
  std::istringstream is(read_file(path));
  std::string line;
  if (!std::getline(is, line)) throw ConfigError(path.string() + ": empty cube file");
  if (trim(line) != "generation,cube_id,parent_id" + coord_header(d) + ",side") {
    throw ConfigError(path.string() + ": unexpected header");
  }
  CubeTable t;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (static_cast<int>(fields.size()) != d + 4) {
      throw ConfigError(path.string() + " line " + std::to_string(lineno) + ": expected " + std::to_string(d + 4) + " fields");
    }
    try {
      std::size_t used = 0;
      const long long parent = std::stoll(fields[2], &used);
      if (used != fields[2].size() || parent < 0) throw std::invalid_argument("parent");
      Cube c;
      for (int a = 0; a < d; ++a) {
        c.center.push_back(std::stod(fields[3 + a], &used));
        if (used != fields[3 + a].size()) throw std::invalid_argument("coord");
      }
      c.side = std::stod(fields[3 + d], &used);
      if (used != fields[3 + d].size()) throw std::invalid_argument("side");
      t.cubes.push_back(std::move(c));
      t.parents.push_back(static_cast<std::size_t>(parent));
    } catch (const std::exception&) {
      throw ConfigError(path.string() + " line " + std::to_string(lineno) + ": malformed number");
    }
  }
  return t;
}

nlohmann::ordered_json manifest_json(const RunConfig& cfg, const CantorSet& cs) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["tool_version"] = kToolVersion;
  ordered_json c;
  c["d"] = cfg.d;
  c["s"] = cfg.s;
  c["generations"] = cfg.generations;
  c["m"] = cfg.m.empty() ? ordered_json("auto") : ordered_json(cfg.m);
  c["A"] = cfg.A;
  c["C_abs"] = cfg.C_abs;
  c["seed"] = cfg.seed;
  c["max_retries"] = cfg.max_retries;
  c["margin"] = cfg.margin;
  j["config"] = c;
  CantorSchedule sc = to_schedule(cfg);
  j["k"] = effective_k(sc);

  ordered_json gens = ordered_json::array();
  for (std::size_t n = 0; n < cs.depth(); ++n) {
    const GenerationOutput& g = cs.generations[n];
    ordered_json e;
    e["generation"] = n + 1;
    e["delta"] = g.params.delta;
    e["side"] = cs.side_lengths[n + 1];
    e["N"] = g.N;
    e["cube_count"] = g.children.size();
    e["m"] = g.params.m;
    e["seed"] = g.params.seed;
    e["seed_used"] = g.seed_used;
    e["retries"] = g.retries;
    e["epsilon"] = g.epsilon;
    e["eta"] = g.eta;
    e["eta_realized"] = g.eta_realized;
    e["grid_per_axis"] = g.grid_per_axis;
    e["r"] = g.r;
    e["sample_count"] = g.sample_count;
    e["fixed_point_rounds"] = g.fixed_point_rounds;
    e["tube_budget"] = g.tube_budget;
    e["tube_removed"] = g.prp_log.tube_removed_total;
    e["tube_removed_per_beta"] = g.prp_log.tube_removed_per_beta;
    auto total = [](const std::vector<std::size_t>& v) {
      std::size_t t = 0;
      for (auto x : v) t += x;
      return t;
    };
    e["grid_removed"] = total(g.prp_log.grid_removed);
    e["margin_removed"] = total(g.prp_log.margin_removed);
    e["spacing_removed"] = total(g.prp_log.spacing_removed);
    e["boundary_removed"] = total(g.prp_log.boundary_removed);
    e["equalize_removed"] = total(g.prp_log.equalize_removed);
    ordered_json rej = ordered_json::object();
    for (const auto& [reason, count] : g.rejections) rej[reason] = count;
    e["rejections"] = rej;
    gens.push_back(e);
  }
  j["generations"] = gens;

  // Size constant of the width-2τ representatives at τ = 1/8.
  ordered_json constants;
  constants["C_rep"] = RepresentativeFamily(0.125, cfg.d).size_constant();
  constants["C_run"] = nullptr;
  constants["law_constant"] = nullptr;
  j["constants"] = constants;
  return j;
}

nlohmann::ordered_json to_json(const Tube& t) {
  nlohmann::ordered_json j;
  j["anchor"] = t.anchor;
  j["direction"] = t.direction;
  j["width"] = t.width;
  return j;
}

Tube tube_from_json(const nlohmann::json& j) {
  Tube t;
  t.anchor = j.at("anchor").get<Point>();
  t.direction = j.at("direction").get<Point>();
  t.width = j.at("width").get<double>();
  return t;
}

nlohmann::ordered_json to_json(const CheckResult& c) {
  nlohmann::ordered_json j;
  j["name"] = c.name;
  j["pass"] = c.pass;
  j["measured"] = c.measured;
  j["limit"] = c.limit;
  j["detail"] = c.detail;
  j["witness"] = c.witness ? to_json(*c.witness) : nlohmann::ordered_json(nullptr);
  return j;
}

CheckResult check_from_json(const nlohmann::json& j) {
  CheckResult c;
  c.name = j.at("name").get<std::string>();
  c.pass = j.at("pass").get<bool>();
  c.measured = j.at("measured").get<double>();
  c.limit = j.at("limit").get<double>();
  c.detail = j.at("detail").get<std::string>();
  if (!j.at("witness").is_null()) c.witness = tube_from_json(j.at("witness"));
  return c;
}

nlohmann::ordered_json to_json(const VerificationReport& r) {
  nlohmann::ordered_json j;
  j["generation"] = r.generation;
  j["d"] = r.d;
  j["s"] = r.s;
  j["k"] = r.k;
  j["delta"] = r.delta;
  j["m"] = r.m;
  j["seed"] = r.seed;
  j["epsilon"] = r.epsilon;
  j["eta"] = r.eta;
  j["N"] = r.N;
  j["all_pass"] = r.all_pass();
  nlohmann::ordered_json checks = nlohmann::ordered_json::array();
  for (const CheckResult* c : r.checks()) checks.push_back(to_json(*c));
  j["checks"] = checks;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const LawRow& row : r.law_rows) {
    rows.push_back({{"width", row.width}, {"max_count", row.max_count}, {"constant", row.constant}});
  }
  j["law_rows"] = rows;
  j["caveat"] = r.caveat;
  return j;
}

VerificationReport report_from_json(const nlohmann::json& j) {
  VerificationReport r;
  r.generation = j.at("generation").get<int>();
  r.d = j.at("d").get<int>();
  r.s = j.at("s").get<double>();
  r.k = j.at("k").get<int>();
  r.delta = j.at("delta").get<double>();
  r.m = j.at("m").get<std::int64_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.epsilon = j.at("epsilon").get<double>();
  r.eta = j.at("eta").get<double>();
  r.N = j.at("N").get<std::size_t>();
  for (const auto& cj : j.at("checks")) {
    CheckResult c = check_from_json(cj);
    CheckResult* slot = nullptr;
    if (c.name == "integrity") slot = &r.integrity;
    else if (c.name == "children_per_parent") slot = &r.children_per_parent;
    else if (c.name == "nesting") slot = &r.nesting;
    else if (c.name == "eta_separation") slot = &r.eta_separation;
    else if (c.name == "thin_tube_max") slot = &r.thin_tube_max;
    else if (c.name == "intermediate_law") slot = &r.intermediate_law;
    else if (c.name == "hypothesis_max") slot = &r.hypothesis_max;
    else if (c.name == "tube_budget") slot = &r.tube_budget;
    else throw ConfigError("unknown check '" + c.name + "' in report");
    *slot = std::move(c);
  }
  for (const auto& row : j.at("law_rows")) {
    r.law_rows.push_back(LawRow{row.at("width").get<double>(), row.at("max_count").get<std::size_t>(),
                                row.at("constant").get<double>()});
  }
  r.caveat = j.at("caveat").get<std::string>();
  return r;
}

VerifyInput load_verify_input(const std::filesystem::path& run_dir, const nlohmann::json& manifest, int n) {
  try {
    const auto& cfg = manifest.at("config");
    const auto& gens = manifest.at("generations");
    if (n < 1 || n > static_cast<int>(gens.size())) throw ConfigError("generation out of range");
    const auto& g = gens.at(static_cast<std::size_t>(n - 1));
    VerifyInput in;
    in.generation = n;
    in.d = cfg.at("d").get<int>();
    in.s = cfg.at("s").get<double>();
    in.k = manifest.at("k").get<int>();
    in.m = g.at("m").get<std::int64_t>();
    in.seed = g.contains("seed") ? g.at("seed").get<std::uint64_t>() : cfg.at("seed").get<std::uint64_t>();
    if (n == 1) {
      in.parents = {unit_cube(in.d)};
    } else {
      in.parents = read_cubes_csv(run_dir / ("cubes_gen_" + std::to_string(n - 1) + ".csv"), in.d).cubes;
    }
    // δ comes from the parent cubes themselves, not from the manifest.
    in.delta = in.parents.empty() ? 1.0 : in.parents.front().side;
    CubeTable t = read_cubes_csv(run_dir / ("cubes_gen_" + std::to_string(n) + ".csv"), in.d);
    in.children = std::move(t.cubes);
    in.child_parent = std::move(t.parents);
    if (g.contains("tube_removed")) in.tube_removed = g.at("tube_removed").get<double>();
    if (g.contains("tube_budget")) in.tube_budget = g.at("tube_budget").get<double>();
    return in;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed manifest: ") + e.what());
  }
}

CantorSet load_cantor(const std::filesystem::path& run_dir, const nlohmann::json& manifest) {
  try {
    CantorSet cs;
    cs.d = manifest.at("config").at("d").get<int>();
    cs.s = manifest.at("config").at("s").get<double>();
    cs.root = {unit_cube(cs.d)};
    cs.side_lengths = {1.0};
    const auto& gens = manifest.at("generations");
    for (std::size_t n = 1; n <= gens.size(); ++n) {
      CubeTable t = read_cubes_csv(run_dir / ("cubes_gen_" + std::to_string(n) + ".csv"), cs.d);
      if (t.cubes.empty()) throw ConfigError("generation " + std::to_string(n) + " has no cubes");
      GenerationOutput g;
      g.params.d = cs.d;
      g.params.s = cs.s;
      g.params.m = gens.at(n - 1).at("m").get<std::int64_t>();
      g.epsilon = t.cubes.front().side;
      g.children = std::move(t.cubes);
      g.child_parent = std::move(t.parents);
      cs.side_lengths.push_back(g.epsilon);
      cs.generations.push_back(std::move(g));
    }
    if (cs.generations.empty()) throw ConfigError("run has no generations");
    return cs;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed manifest: ") + e.what());
  }
}

std::string render_svg(const std::vector<Cube>& cubes, const std::optional<Tube>& overlay) {
  constexpr double kSize = 1000.0;
  char buf[256];
  std::string out =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"1000\" height=\"1000\" viewBox=\"0 0 1000 1000\">\n"
      "<path d=\"M0 0H1000V1000H0Z\" fill=\"white\" stroke=\"black\" stroke-width=\"1\"/>\n";
  for (const Cube& c : cubes) {
    if (c.dim() != 2) throw DomainError("SVG export needs d = 2");
    const double x = c.lower(0) * kSize;
    const double y = (1.0 - c.upper(1)) * kSize;
    std::snprintf(buf, sizeof buf, "<rect x=\"%.6f\" y=\"%.6f\" width=\"%.6f\" height=\"%.6f\" fill=\"black\"/>\n", x, y,
                  c.side * kSize, c.side * kSize);
    out += buf;
  }
  if (overlay) {
    const Tube& t = *overlay;
    // Long enough to cross the unit square from any anchor inside it.
    const double L = 4.0;
    const double nx = -t.direction[1], ny = t.direction[0];
    const double h = 0.5 * t.width;
    const double px[4] = {t.anchor[0] - L * t.direction[0] + h * nx, t.anchor[0] + L * t.direction[0] + h * nx,
                          t.anchor[0] + L * t.direction[0] - h * nx, t.anchor[0] - L * t.direction[0] - h * nx};
    const double py[4] = {t.anchor[1] - L * t.direction[1] + h * ny, t.anchor[1] + L * t.direction[1] + h * ny,
                          t.anchor[1] + L * t.direction[1] - h * ny, t.anchor[1] - L * t.direction[1] - h * ny};
    out += "<polygon points=\"";
    for (int i = 0; i < 4; ++i) {
      std::snprintf(buf, sizeof buf, "%s%.6f,%.6f", i ? " " : "", px[i] * kSize, (1.0 - py[i]) * kSize);
      out += buf;
    }
    out += "\" fill=\"red\" fill-opacity=\"0.3\" stroke=\"red\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace tubecantor
