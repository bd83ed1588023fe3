// Command-line entry point: parses a subcommand plus flags, merges them over
// an optional JSON config file, runs the experiment, writes the report and
// CSV artifacts, and prints the report to stdout.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "multibump/cli.hpp"

namespace {

struct Flags {
  std::string config_path;
  std::string out_dir;
  int dim = 0;
  int n = 0;
  std::vector<int> k;
  double tol = 0;
  std::int64_t seed = 0;
  bool no_timestamp = false;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-bump configuration experiments"};
  app.require_subcommand(1);

  Flags flags;
  struct Bound {
    CLI::App* sub;
    CLI::Option *config, *dim, *n, *k, *tol, *seed, *out, *no_timestamp;
  };
  std::vector<Bound> bound;
  for (const auto& [name, description] : multibump::experiment_commands()) {
    CLI::App* sub = app.add_subcommand(name, description);
    Bound b{sub, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr};
    b.config = sub->add_option("--config", flags.config_path, "JSON config file");
    b.dim = sub->add_option("--dim", flags.dim, "ambient dimension N");
    b.n = sub->add_option("--n", flags.n, "inner ring count");
    b.k = sub->add_option("--k", flags.k, "ring count(s), comma separated")
              ->delimiter(',');
    b.tol = sub->add_option("--tol", flags.tol, "override the command's tolerance");
    b.seed = sub->add_option("--seed", flags.seed, "seed for randomized searches");
    b.out = sub->add_option("--out", flags.out_dir, "output directory for artifacts");
    b.no_timestamp = sub->add_flag("--no-timestamp", flags.no_timestamp,
                                   "omit the timestamp for byte-identical reports");
    bound.push_back(b);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    const CLI::App* active = app.get_subcommands().front();
    const std::string command = active->get_name();
    const Bound* opts = nullptr;
    for (const Bound& b : bound)
      if (b.sub == active) opts = &b;

    multibump::Json config = multibump::Json::object();
    if (opts->config->count() > 0) config = multibump::load_config_file(flags.config_path);
    if (config.contains("command") && config["command"] != command)
      throw multibump::UsageError("config file names command '" +
                                  config["command"].dump() + "' but the subcommand is '" +
                                  command + "'");
    config["command"] = command;
    if (opts->dim->count() > 0) config["dim"] = flags.dim;
    if (opts->n->count() > 0) config["n"] = flags.n;
    if (opts->k->count() > 0) {
      if (flags.k.size() == 1)
        config["k"] = flags.k.front();
      else
        config["k"] = flags.k;
    }
    if (opts->tol->count() > 0) config["tol"] = flags.tol;
    if (opts->seed->count() > 0) config["seed"] = flags.seed;
    if (opts->out->count() > 0) config["out"] = flags.out_dir;
    if (flags.no_timestamp) config["timestamp"] = false;

    const multibump::ExperimentResult result = multibump::run_experiment(config);
    const std::string out_dir =
        config.contains("out") ? config["out"].get<std::string>() : std::string(".");
    multibump::write_artifacts(result, out_dir);
    std::cout << result.report.dump(2) << "\n";
    return result.exit_code;
  } catch (const multibump::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
