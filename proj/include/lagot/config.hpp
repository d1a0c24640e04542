#pragma once

// Run configuration for the command-line pipelines, read from an INI file:
//
//   [spec]     kinetic, potential, amplitude, wavevector, speed, amplitude2,
//              wavevector2, time_period, dim
//   [problem]  instance, T, grid, mu0, mu1, winding_range, times, epsilons,
//              T_values
//   [solver]   tolerance, knots_per_unit_time, steps_per_unit_time,
//              max_newton_iterations, max_descent_iterations, cost_accuracy,
//              mask_slack, random_triples, cache_dir, seed
//   [output]   directory, formats
//
// See docs/config.md for the meaning and default of every key.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lagot/action.hpp"
#include "lagot/dynamics.hpp"
#include "lagot/kantorovich.hpp"

namespace lagot {

struct RunConfig {
  std::filesystem::path base_dir;  // relative paths are resolved against it

  LagrangianSpec spec = free_particle();
  std::string instance;  // built-in transport instance, if any
  double T = 1.0;
  int grid_n = 64;
  std::optional<DiscreteMeasure> mu0;
  std::optional<DiscreteMeasure> mu1;
  std::vector<double> times;     // interior slice times; empty = k T / 8
  std::vector<double> epsilons;  // empty = T/8, T/4, 3T/8
  std::vector<int> T_values{1, 2};

  ActionOptions action;
  int steps_per_unit_time = 1000;
  double cost_accuracy = 1e-9;
  double mask_slack = 1.0;
  int random_triples = 3;
  std::optional<std::filesystem::path> cache_dir;  // empty = <out>/cache
  std::uint64_t seed = 0;

  std::filesystem::path out_dir = "out";
  std::vector<std::string> formats{"csv", "json", "dat"};

  std::vector<double> slice_times() const;
  std::vector<double> lipschitz_epsilons() const;
  std::filesystem::path cache_path() const;
  bool wants(std::string_view format) const;
};

// Throws ConfigError on a syntax error, unknown section or key, bad value or
// missing referenced file.
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = ".");
RunConfig load_config(const std::filesystem::path& path);

// "dirac:x[:y]", "uniform:n[:dim]" or a CSV file (x1[,x2],weight).
DiscreteMeasure resolve_measure(std::string_view value, const std::filesystem::path& base_dir);

}  // namespace lagot
