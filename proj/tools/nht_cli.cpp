// Batch front-end: nht <subcommand> --config job.json [--workers N] [--out DIR] [--seed-override S]
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "nht/io.hpp"
#include "nht/job.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Localization numerics for disordered non-Hermitian lattices"};
  app.require_subcommand(1);

  std::string config;
  int workers = 0;
  std::string out;
  std::optional<std::uint64_t> seed_override;

  for (const char* name : {"lyapunov", "conductance", "histogram", "fss", "collapse", "verify"}) {
    CLI::App* sub = app.add_subcommand(name, std::string("run a ") + name + " job");
    sub->add_option("--config", config, "JSON job file")->required()->check(CLI::ExistingFile);
    sub->add_option("--workers", workers, "worker threads (default: NHT_WORKERS or all cores)");
    sub->add_option("--out", out, "output directory (overrides the config)");
    sub->add_option("--seed-override", seed_override, "replace the config seed");
  }
  CLI11_PARSE(app, argc, argv);

  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    const std::uint64_t* ov = seed_override ? &*seed_override : nullptr;
    nht::JobConfig c = nht::JobConfig::from_json_text(nht::read_file(config), ov);
    if (nht::to_string(c.kind) != sub) {
      std::cerr << "config describes a " << nht::to_string(c.kind) << " job, not " << sub << "\n";
      return 2;
    }
    if (workers > 0) c.workers = workers;
    if (!out.empty()) c.output = out;
    return nht::run_job(c);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
