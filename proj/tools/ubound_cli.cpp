#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ubound/errors.hpp"
#include "ubound/experiment.hpp"

namespace {

struct Options {
  std::string config;
  std::vector<std::string> overrides;
  std::string out;
};

void add_common(CLI::App* cmd, Options& opts) {
  cmd->add_option("--config,-c", opts.config, "JSON experiment config")->check(CLI::ExistingFile);
  cmd->add_option("--set,-s", opts.overrides, "override a config field, e.g. --set damping.alpha=3")
      ->take_all()
      ->allow_extra_args(false);
  cmd->add_option("--out,-o", opts.out, "output directory (overrides output_dir)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ultimate-bound experiments for damped second-order evolution equations"};
  app.require_subcommand(1);
  Options opts;
  const char* names[] = {"simulate", "sweep", "antiperiodic", "verify"};
  const char* help[] = {"integrate one trajectory and write its energy ledger",
                        "estimate the ultimate bound over a forcing amplitude sweep",
                        "solve for anti-periodic solutions over an amplitude sweep",
                        "run the property suite and print a pass/fail table"};
  for (int i = 0; i < 4; ++i) add_common(app.add_subcommand(names[i], help[i]), opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ubound::kExitOk : ubound::kExitValidation;
  }
  const std::string experiment = app.get_subcommands().front()->get_name();

  try {
    nlohmann::json j = opts.config.empty() ? nlohmann::json::object() : ubound::load_config_file(opts.config);
    if (j.contains("experiment") && j["experiment"] != experiment)
      std::cerr << "note: config experiment " << j["experiment"] << " replaced by subcommand '" << experiment << "'\n";
    j["experiment"] = experiment;
    for (const auto& assignment : opts.overrides) ubound::apply_override(j, assignment);
    if (!opts.out.empty()) j["output_dir"] = opts.out;
    const ubound::ExperimentConfig cfg = ubound::parse_config(j);
    return ubound::run_experiment(cfg, std::cout);
  } catch (const ubound::ValidationError& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return ubound::kExitValidation;
  } catch (const ubound::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return ubound::kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ubound::kExitNumerical;
  }
}
