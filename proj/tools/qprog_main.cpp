// Copyright 2026 The qprog Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdint>
#include <functional>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "qprog/cli.hpp"

namespace {

int run(const std::function<int()>& fn) {
  try {
    return fn();
  } catch (const qprog::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return qprog::cli::kExitValidation;
  } catch (const qprog::DimensionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return qprog::cli::kExitValidation;
  } catch (const qprog::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return qprog::cli::kExitValidation;
  } catch (const qprog::CapacityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return qprog::cli::kExitValidation;
  } catch (const qprog::Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return qprog::cli::kExitNumerical;
  }
}

}  // namespace

int main(int argc, char** argv) {
  namespace qc = qprog::cli;
  CLI::App app{"qprog: programmable quantum processor simulation"};
  app.require_subcommand(1);

  qc::CommandOptions opts;
  std::uint64_t seed = 0;
  double tol = 0.0;
  std::string level = "fast";

  auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "JSON run configuration")->required();
    sub->add_option("--out", opts.out_path, "CSV output path (stdout if omitted)");
    sub->add_option("--seed", seed, "override the configured seed");
    sub->add_option("--tol", tol, "override SDP and optimizer tolerance");
  };

  CLI::App* optimize = app.add_subcommand("optimize", "optimize the program for one configuration");
  add_run_flags(optimize);
  optimize->add_option("--program", opts.program_path, "path for the saved program state");

  CLI::App* benchmark = app.add_subcommand("benchmark", "sweep a grid of channel parameters and N");
  add_run_flags(benchmark);
  benchmark->add_option("--jobs", opts.jobs, "worker threads")->check(CLI::PositiveNumber);
  benchmark->add_option("--gnuplot", opts.gnuplot_path, "two-column export for gnuplot");

  CLI::App* verify = app.add_subcommand("verify", "run the invariant suite");
  verify->add_option("--level", level, "fast or full");

  CLI::App* channels = app.add_subcommand("channels", "list the channel zoo");
  CLI::App* processors = app.add_subcommand("processors", "list processors and capacity caps");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : qc::kExitValidation;
  }

  for (CLI::App* sub : {optimize, benchmark}) {
    if (sub->parsed()) {
      if (sub->count("--seed")) opts.seed = seed;
      if (sub->count("--tol")) opts.tol = tol;
    }
  }
  if (optimize->parsed()) {
    return run([&] { return qc::cmd_optimize(qc::load_config(opts.config_path), opts); });
  }
  if (benchmark->parsed()) {
    return run([&] { return qc::cmd_benchmark(qc::load_config(opts.config_path), opts); });
  }
  if (verify->parsed()) {
    return run([&] { return qc::cmd_verify(level, std::cout); });
  }
  if (channels->parsed()) {
    qc::cmd_channels(std::cout);
  } else if (processors->parsed()) {
    qc::cmd_processors(std::cout);
  }
  return 0;
}
