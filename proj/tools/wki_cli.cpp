// Command-line driver: `wki <pipeline> [--config file] [key=value ...]`.

#include <CLI11.hpp>
#include <iostream>

#include "wki/pipelines.hpp"

namespace {

int run(const std::string& pipeline, const std::string& config_path, const std::vector<std::string>& overrides,
        bool quiet) {
  using namespace wki;
  json j = json::object();
  if (!config_path.empty()) j = read_json(config_path);
  j["pipeline"] = pipeline;
  for (const auto& o : overrides) apply_override(j, o);
  const RunConfig cfg = config_from_json(j);
  const json manifest = run_pipeline(cfg);
  if (!quiet) std::cout << manifest["diagnostics"].dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inverse scattering solver for the WKI equation"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  bool quiet = false;
  std::string selected;

  for (const char* name : {"forward", "evolve", "inverse", "roundtrip", "compare-pde", "soliton"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config,-c", config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("overrides", overrides, "key=value overrides, e.g. grid.N=1024 potential.params.amplitude=0.1");
    sub->add_option("--set,-s", overrides, "key=value override (repeatable)");
    sub->add_flag("--quiet,-q", quiet, "do not print diagnostics");
    sub->callback([&selected, name] { selected = name; });
  }
  auto* defaults = app.add_subcommand("print-config", "print the default configuration");
  defaults->callback([&selected] { selected = "print-config"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (selected == "print-config") {
    std::cout << wki::to_json(wki::config_from_json(wki::json::object())).dump(2) << '\n';
    return 0;
  }
  try {
    return run(selected, config_path, overrides, quiet);
  } catch (const wki::Error& e) {
    std::cerr << "error [" << wki::to_string(e.kind()) << "]: " << e.what() << '\n';
    return wki::exit_status(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error [internal-error]: " << e.what() << '\n';
    return 4;
  }
}
