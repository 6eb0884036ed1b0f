#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tubecantor/cantor.hpp"
#include "tubecantor/verify.hpp"

namespace tubecantor {

inline constexpr const char* kToolVersion = "0.1.0";

/// Flat key=value run configuration. Keys: d, s, generations, m, A, C_abs, seed, max_retries,
/// margin. `m` is one integer (used for every generation), a comma list, or "auto".
struct RunConfig {
  int d = 2;
  double s = 0.5;
  int generations = 1;
  std::vector<std::int64_t> m;  ///< empty means auto
  int A = 4;
  double C_abs = 1.0;
  std::uint64_t seed = 1;
  int max_retries = 50;
  double margin = 1.0 / 16.0;
};

/// Throws ConfigError on unreadable files, unknown keys or malformed values.
RunConfig parse_config(const std::string& text);
RunConfig read_config(const std::filesystem::path& path);

/// Throws DomainError for out-of-range values.
CantorSchedule to_schedule(const RunConfig& cfg);

/// Writes through a temporary file in the same directory, then renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

/// %.17g, enough for a lossless binary64 round trip.
std::string format_double(double x);

std::string cubes_csv(int generation, const std::vector<Cube>& cubes, const std::vector<std::size_t>& parents);
std::string points_csv(int generation, const std::vector<Point>& points, const std::vector<std::size_t>& parents);

struct CubeTable {
  std::vector<Cube> cubes;
  std::vector<std::size_t> parents;
};

/// Throws ConfigError when the file is missing or a row is malformed.
CubeTable read_cubes_csv(const std::filesystem::path& path, int d);

nlohmann::ordered_json manifest_json(const RunConfig& cfg, const CantorSet& cs);

nlohmann::ordered_json to_json(const Tube& t);
Tube tube_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const CheckResult& c);
CheckResult check_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const VerificationReport& r);
VerificationReport report_from_json(const nlohmann::json& j);

/// Everything verify needs for generation n (1-based) of a run directory.
VerifyInput load_verify_input(const std::filesystem::path& run_dir, const nlohmann::json& manifest, int n);

/// Rebuilds the cube families of a run directory (params echo and cubes only).
CantorSet load_cantor(const std::filesystem::path& run_dir, const nlohmann::json& manifest);

/// One rect per cube of the unit square, plus an optional tube overlay polygon.
std::string render_svg(const std::vector<Cube>& cubes, const std::optional<Tube>& overlay);

}  // namespace tubecantor
