// gsdefend — synthetic scene generation, poisoning, training, evaluation,
// spectral diagnostics, and the cross-mode comparison report.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "gsdefend/common.hpp"
#include "gsdefend/harness.hpp"

namespace {

struct Command {
  const char* name;
  const char* help;
  int (*run)(const gsd::HarnessArgs&);
};

constexpr Command kCommands[] = {
    {"gen", "sample a synthetic scene and write the dataset bundle", gsd::cmd_gen},
    {"poison", "run the frequency attack on the train views", gsd::cmd_poison},
    {"train", "optimize a cloud against the bundle for one mode", gsd::cmd_train},
    {"eval", "score a trained cloud against the clean test views", gsd::cmd_eval},
    {"spectrum", "spectral diagnostics for a directory of images", gsd::cmd_spectrum},
    {"report", "aggregate per-mode results into csv + markdown", gsd::cmd_report},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"resource-aware gaussian splatting trainer with a spectral defense"};
  app.set_version_flag("--version", std::string("gsdefend ") + gsd::kToolVersion);
  app.require_subcommand(1);

  gsd::HarnessArgs args;
  const Command* selected = nullptr;
  for (const Command& cmd : kCommands) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->add_option("--config", args.config_path, "key = value settings file");
    sub->add_option("--seed", args.seed, "master seed recorded in every artifact");
    sub->add_option("--out", args.out_dir, "experiment directory (default: .)");
    sub->add_option("--mode", args.mode,
                    "clean|poisoned|defended|baseline_ut|baseline_score")
        ->check(CLI::IsMember({"clean", "poisoned", "defended", "baseline_ut",
                               "baseline_score"}));
    sub->callback([&selected, &cmd] { selected = &cmd; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the usage message
    return 4;
  }

  try {
    return selected->run(args);
  } catch (const gsd::IoError& e) {
    std::fprintf(stderr, "gsdefend %s: error: %s\n", selected->name, e.what());
    return 2;
  } catch (const gsd::ParseError& e) {
    std::fprintf(stderr, "gsdefend %s: error: %s\n", selected->name, e.what());
    return 3;
  } catch (const gsd::UnsupportedVersion& e) {
    std::fprintf(stderr, "gsdefend %s: error: %s\n", selected->name, e.what());
    return 3;
  } catch (const gsd::ConfigError& e) {
    std::fprintf(stderr, "gsdefend %s: error: %s\n", selected->name, e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "gsdefend %s: error: %s\n", selected->name, e.what());
    return 1;
  }
}
