// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. One subcommand per report family; every run emits
// the shared row schema as CSV (default) or JSON, to stdout or --out.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fdx/config.hpp"
#include "fdx/errors.hpp"
#include "fdx/sweep.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitValidation = 3;
constexpr int kExitIo = 4;
constexpr int kExitSingular = 5;

struct Options {
  std::string config_path;
  std::string sweep_ref;
  std::uint64_t seed = 1;
  long trials = 2000;
  std::string out_path;
  std::string format = "csv";
};

// "fig<digits>" selects a preset; anything else is a sweep-spec file path.
bool looks_like_recipe(const std::string& s) {
  if (s.rfind("fig", 0) != 0 || s.size() == 3) return false;
  return std::all_of(s.begin() + 3, s.end(),
                     [](unsigned char c) { return std::isdigit(c) != 0; });
}

void write_rows(const Options& opt, const std::vector<fdx::SweepRow>& rows) {
  auto emit = [&](std::ostream& os) {
    if (opt.format == "json")
      fdx::write_json(os, rows);
    else
      fdx::write_csv(os, rows);
  };
  if (opt.out_path.empty()) {
    emit(std::cout);
    return;
  }
  std::ofstream out(opt.out_path);
  if (!out) throw fdx::IoError("cannot open output file: " + opt.out_path);
  emit(out);
  out.flush();
  if (!out) throw fdx::IoError("failed writing output file: " + opt.out_path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Link-level Monte Carlo simulator and closed-form rate engine for "
               "full-duplex multicell MIMO"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* cmd, bool config_required) {
    auto* c = cmd->add_option("--config", opt.config_path,
                              "System configuration (JSON)");
    if (config_required) c->required();
    cmd->add_option("--seed", opt.seed, "Root seed for placements and channel draws");
    cmd->add_option("--out", opt.out_path, "Output file (default: stdout)");
    cmd->add_option("--format", opt.format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}));
  };

  CLI::App* simulate = app.add_subcommand(
      "simulate", "Monte Carlo sum rates for every scenario/filter/link slice");
  add_common(simulate, true);
  simulate->add_option("--trials", opt.trials, "Monte Carlo trials");

  CLI::App* analytic = app.add_subcommand(
      "analytic", "Closed-form sum rates for every scenario/filter/link slice");
  add_common(analytic, true);

  CLI::App* nmse = app.add_subcommand(
      "nmse", "Aggregate self-interference estimation error of both pilot schemes");
  add_common(nmse, true);

  CLI::App* region = app.add_subcommand(
      "region", "Slot-discounted margins of full duplex over the half-duplex baseline");
  add_common(region, true);

  CLI::App* compare = app.add_subcommand(
      "compare", "Full-duplex over half-duplex throughput ratio (--trials 0 for closed forms)");
  add_common(compare, true);
  CLI::Option* compare_trials = compare->add_option("--trials", opt.trials, "Monte Carlo trials");

  CLI::App* sweep = app.add_subcommand(
      "sweep", "Axis sweep from a spec file or a preset name (fig3..fig7)");
  add_common(sweep, false);
  sweep->add_option("--sweep", opt.sweep_ref, "Sweep spec file or preset name")->required();
  CLI::Option* sweep_trials =
      sweep->add_option("--trials", opt.trials, "Override the sweep's trial count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    std::vector<fdx::SweepRow> rows;
    if (simulate->parsed()) {
      rows = fdx::simulate_rows(fdx::load_config_file(opt.config_path), opt.trials, opt.seed);
    } else if (analytic->parsed()) {
      rows = fdx::analytic_rows(fdx::load_config_file(opt.config_path), opt.seed);
    } else if (nmse->parsed()) {
      rows = fdx::nmse_rows(fdx::load_config_file(opt.config_path), opt.seed);
    } else if (region->parsed()) {
      rows = fdx::region_rows(fdx::load_config_file(opt.config_path), opt.seed);
    } else if (compare->parsed()) {
      const long trials = compare_trials->count() > 0 ? opt.trials : 2000;
      rows = fdx::compare_rows(fdx::load_config_file(opt.config_path), trials, opt.seed);
    } else if (sweep->parsed()) {
      fdx::SweepSpec spec;
      if (looks_like_recipe(opt.sweep_ref)) {
        const auto preset = fdx::recipe(opt.sweep_ref);
        if (!preset) {
          std::cerr << "error: unknown recipe \"" << opt.sweep_ref
                    << "\" (known: fig3..fig7)\n";
          return kExitUsage;
        }
        spec = *preset;
      } else {
        spec = fdx::load_sweep_file(opt.sweep_ref);
      }
      if (sweep_trials->count() > 0) spec.trials = opt.trials;
      nlohmann::json base = nlohmann::json::object();
      if (!opt.config_path.empty()) {
        std::ifstream in(opt.config_path);
        if (!in) throw fdx::IoError("cannot open config file: " + opt.config_path);
        base = nlohmann::json::parse(in, nullptr, false);
        if (base.is_discarded())
          throw fdx::ValidationError("config document is not valid JSON");
      }
      rows = fdx::run_sweep(spec, base, opt.seed);
    }
    write_rows(opt, rows);
    return 0;
  } catch (const fdx::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fdx::SingularityError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSingular;
  } catch (const fdx::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
}
