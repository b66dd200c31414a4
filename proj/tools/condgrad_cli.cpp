#include "condgrad/bench.hpp"
#include "condgrad/selftest.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericFailure = 3;

}  // namespace

int main(int argc, char** argv) {
  using namespace condgrad;
  CLI::App app{"condgrad: conditional gradient experiments"};
  app.require_subcommand(0, 1);
  bool timing = false;
  app.add_flag("--timing", timing, "record wall-clock times (output is then no longer byte-stable)");

  auto* run = app.add_subcommand("run", "run a built-in experiment or a key=value config file");
  std::string target;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> max_iters;
  std::optional<double> tol;
  std::optional<std::string> out;
  std::vector<std::string> sets;
  run->add_option("target", target, "experiment name or config path")->required();
  run->add_option("--seed", seed, "base seed");
  run->add_option("--max-iters", max_iters, "iteration budget");
  run->add_option("--tol", tol, "stopping tolerance");
  run->add_option("--out", out, "output directory (default: results)");
  run->add_option("--set", sets, "extra key=value entries, applied last");

  auto* list = app.add_subcommand("list", "list built-in experiments");
  bool names_only = false;
  list->add_flag("--names", names_only, "one name per line");

  auto* selftest = app.add_subcommand("selftest", "run the acceptance suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfigError;
  }

  if (app.got_subcommand(selftest)) {
    const auto results = run_acceptance([timing](const CriterionResult& r) {
      std::cout << format_criterion(r, timing) << std::flush;
    });
    std::size_t failed = 0;
    for (const auto& r : results) failed += !r.passed;
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << '\n';
    return failed == 0 ? 0 : 1;
  }
  if (app.got_subcommand(run)) {
    try {
      bench::Config config = bench::load_config(target);
      for (const auto& kv : sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw bench::ConfigError("--set: expected key=value, got '" + kv + "'");
        config.set(kv.substr(0, eq), kv.substr(eq + 1));
      }
      bench::ExperimentOverrides ov;
      ov.seed = seed;
      ov.max_iters = max_iters;
      ov.tol = tol;
      ov.out = out;
      ov.record_time = timing;
      const auto report = bench::run_experiment(std::move(config), ov);
      std::cout << report.summary;
      return 0;
    } catch (const bench::ConfigError& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return kConfigError;
    } catch (const ContractViolation& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return kConfigError;
    } catch (const CapabilityError& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return kConfigError;
    } catch (const NumericFailure& e) {
      std::cerr << "numeric failure: " << e.what() << '\n';
      return kNumericFailure;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
    }
  }
  std::cout << bench::list_experiments(app.got_subcommand(list) && names_only);
  return 0;
}
