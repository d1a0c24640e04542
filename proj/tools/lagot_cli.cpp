// lagot cost|transport|mather|plot --config <path> [--out <dir>] [--seed <u64>]

#include <cstdint>
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "lagot/lagot.h"

namespace {

int report(lagot_status s) {
  if (s != LAGOT_OK) std::fprintf(stderr, "lagot: %s: %s\n", lagot_status_name(s), lagot_last_error());
  return lagot_exit_code(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lagrangian optimal transport on flat tori"};
  app.set_version_flag("--version", std::string(lagot_version()));
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  for (const char* name : {"cost", "transport", "mather", "plot"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "INI run configuration")->required();
    sub->add_option("--out", out_dir, "output directory (overrides [output] directory)");
    sub->add_option("--seed", seed, "seed for every random choice (overrides [solver] seed)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  const CLI::App* sub = app.get_subcommands().front();

  lagot_config* config = nullptr;
  if (lagot_status s = lagot_config_load(config_path.c_str(), &config); s != LAGOT_OK) return report(s);
  lagot_status s = LAGOT_OK;
  if (sub->count("--out")) s = lagot_config_set_out_dir(config, out_dir.c_str());
  if (s == LAGOT_OK && sub->count("--seed")) s = lagot_config_set_seed(config, seed);
  if (s == LAGOT_OK) s = lagot_run(config, command.c_str());
  lagot_config_destroy(config);
  return report(s);
}
