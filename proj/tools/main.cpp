#include <iostream>

#include "cli_common.hpp"

int main(int argc, char** argv) {
  using namespace ember::cli;
  CLI::App app{"EMBER feature v3 extraction and EMBER2024 dataset pipeline"};
  app.require_subcommand(1);
  CommonOptions opts;
  Runner run;

  add_feature_commands(app, opts, run);
  add_dataset_commands(app, opts, run);
  add_vt_commands(app, opts, run);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    return run ? run() : 2;
  } catch (const std::exception& e) {
    return fail(app.get_subcommands().empty() ? "ember" : app.get_subcommands().front()->get_name(), e.what());
  }
}
