#pragma once

// Scene-file front end: one command per invocation, JSON report plus CSV
// written to an output directory.
//
// Exit status: 0 when every check passes, 2 for malformed input (scene
// schema, unknown tolerance, bad flags), 3 when a check fails or a
// numerical error stops it.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "einhyp/report.hpp"
#include "einhyp/sampling.hpp"

namespace einhyp::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitSchema = 2;
inline constexpr int kExitFailure = 3;

struct Options {
  std::string command;  // curvature, check-structure, check-einstein, build-example, spread, lcf, cylinder, solve-f
  std::string scene;
  std::string out = ".";
  std::optional<int> grid;            // points per axis
  std::vector<std::string> tol;       // name=value
  std::uint64_t seed = 0;
};

const std::vector<std::string>& commands();

// {kind, payload, grid: {points_per_axis, margin}, tolerances: {name: value},
//  rho?, samples?, random_planes?}
struct Scene {
  std::string kind;  // mwp-metric, structure-data, example-theorem3, cylinder-query
  nlohmann::json payload;
  GridConfig grid;
  nlohmann::json tolerances = nlohmann::json::object();
  std::optional<double> rho;
  std::optional<int> samples;  // solve-f
  int random_planes = 10;      // spread, build-example
};

// Throws SchemaError.
Scene parse_scene(const nlohmann::json& j);
Scene load_scene(const std::string& path);

// Runs one command and writes report.json / report.csv (plus command
// specific CSV files) under options.out. Diagnostics go to `err`, a one
// line summary to `out`.
int run(const Options& options, std::ostream& out, std::ostream& err);

// Parses argv with subcommands and global flags, then calls run().
int main(int argc, const char* const* argv);

}  // namespace einhyp::cli
