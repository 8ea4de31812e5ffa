#include <chrono>
#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "lpl/errors.hpp"
#include "lpl/parallel.hpp"
#include "lpl/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Levy perpetuity and branching Levy process toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  bool threads_set = false;

  CLI::App* run_cmd = app.add_subcommand("run", "Execute one experiment");
  run_cmd->add_option("config", config_path, "JSON config file")->required();
  run_cmd->add_option("--output-dir", output_dir,
                      "Override the config output directory");
  run_cmd->add_option("--seed", seed, "Override the config seed")
      ->each([&](const std::string&) { seed_set = true; });
  run_cmd->add_option("--threads", threads, "Worker thread count")
      ->each([&](const std::string&) { threads_set = true; });

  CLI11_PARSE(app, argc, argv);

  if (!threads_set) {
    if (const char* env = std::getenv("LPL_THREADS")) {
      threads = std::atoi(env);
      threads_set = threads > 0;
    }
  }

  try {
    lpl::RunConfig config = lpl::load_config(config_path);
    if (seed_set) {
      config.seed = seed;
      config.seed_given = true;
    }
    if (!output_dir.empty()) config.output_dir = output_dir;

    lpl::ExecPolicy exec = lpl::ExecPolicy::openmp;
    if (threads_set) {
      if (threads <= 1) exec = lpl::ExecPolicy::serial;
      lpl::set_thread_count(threads);
    }

    const auto t0 = std::chrono::steady_clock::now();
    const lpl::RunReport report = lpl::run(config, exec);
    const auto paths = lpl::emit_report(report, config.output_dir);
    const auto t1 = std::chrono::steady_clock::now();
    const double secs =
        std::chrono::duration<double>(t1 - t0).count();

    std::cout << "seed: " << report.seed << "\n";
    for (const std::string& p : paths) std::cout << "wrote: " << p << "\n";
    std::cout << "wall_clock_s: " << secs << "\n";
    return 0;
  } catch (const lpl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const lpl::ValidationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const lpl::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
