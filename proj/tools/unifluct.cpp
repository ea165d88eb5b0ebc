// unifluct: alpha-rescaled return fluctuations vs. the BHP distribution.
//
//   unifluct bhp-table [--L 10] [--table PATH]
//   unifluct analyze   --input prices.csv --alpha 0.55 [--sign both]
//   unifluct scan      --input prices.csv [--alpha-min 0.45 --alpha-max 0.65 --alpha-step 0.005]
//   unifluct simulate  --output synth.csv [--seed 1 --count 3000 --alpha0 0.55 --mu0 0.063 --sigma0 0.032]
//
// Errors go to stderr as a one-line JSON object and the exit status is
// nonzero.

#include <CLI11.hpp>

#include <iostream>
#include <string>

#include <nlohmann/json.hpp>

#include "unifluct/error.hpp"
#include "unifluct/pipeline.hpp"

namespace {

void print_error(std::string_view kind, std::string_view message) {
  nlohmann::ordered_json j;
  j["error"] = {{"kind", kind}, {"message", message}};
  std::cerr << j.dump() << '\n';
}

struct Flags {
  std::string input;
  std::string output;
  std::string sign = "both";
  std::string table;
  std::string tsv_dir;
  std::string p_value = "stephens";
};

}  // namespace

int main(int argc, char** argv) {
  using unifluct::RunConfig;

  CLI::App app{"Data collapse of alpha-rescaled daily returns onto the BHP "
               "distribution"};
  app.require_subcommand(1);
  app.set_version_flag("--version", unifluct::library_version());

  RunConfig config;
  Flags flags;
  double alpha = 0.0;
  double alpha_min = 0.0;
  double alpha_max = 0.0;
  double alpha_step = 0.0;

  auto add_table_flags = [&](CLI::App* cmd) {
    cmd->add_option("--table", flags.table,
                    "BHP table cache file (default: $UNIFLUCT_CACHE_DIR/bhp_L<L>.tsv)");
    cmd->add_option("--L", config.lattice_side, "Lattice side L (N = L^2)")
        ->check(CLI::Range(2, unifluct::kMaxLatticeSide));
    cmd->add_option("--workers", config.workers,
                    "Worker threads (0 = available parallelism)");
  };
  auto add_analysis_flags = [&](CLI::App* cmd) {
    cmd->add_option("--input", flags.input, "Price CSV with date,close columns")
        ->required();
    cmd->add_option("--output", flags.output, "Report path (default: stdout)");
    cmd->add_option("--sign", flags.sign, "positive | negative | both")
        ->check(CLI::IsMember({"positive", "negative", "both"}));
    cmd->add_option("--bins", config.bins, "Histogram bin count")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--p-value", flags.p_value,
                    "P-value convention: stephens | asymptotic")
        ->check(CLI::IsMember({"stephens", "asymptotic"}));
    cmd->add_option("--tsv-dir", flags.tsv_dir,
                    "Also write collapse tables as TSV files here");
    add_table_flags(cmd);
  };

  auto* bhp = app.add_subcommand("bhp-table", "Build or validate the cached BHP table");
  bhp->add_option("--output", flags.output, "Summary path (default: stdout)");
  add_table_flags(bhp);

  auto* analyze = app.add_subcommand("analyze", "Analyze at a fixed alpha");
  add_analysis_flags(analyze);
  analyze->add_option("--alpha", alpha, "Rescaling exponent")->required();

  auto* scan = app.add_subcommand("scan", "Scan alpha for the maximal KS P value");
  add_analysis_flags(scan);
  auto* alpha_opt = scan->add_option("--alpha", alpha,
                                     "Rejected: scan takes a range instead");
  auto* min_opt = scan->add_option("--alpha-min", alpha_min, "Range start (0.45)");
  auto* max_opt = scan->add_option("--alpha-max", alpha_max, "Range end (0.65)");
  auto* step_opt = scan->add_option("--alpha-step", alpha_step, "Grid step (0.005)");
  scan->add_option("--refine-width", config.refine_width,
                   "Bisect around the best alpha down to this spacing (0.001)");

  auto* simulate = app.add_subcommand("simulate", "Write a synthetic price CSV");
  simulate->add_option("--output", flags.output, "CSV path (default: stdout)");
  simulate->add_option("--seed", config.seed, "RNG seed");
  simulate->add_option("--count", config.count, "Number of daily returns")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--alpha0", config.alpha0, "True rescaling exponent");
  simulate->add_option("--mu0", config.mu0, "Mean of the rescaled magnitudes");
  simulate->add_option("--sigma0", config.sigma0, "Sd of the rescaled magnitudes");
  add_table_flags(simulate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return e.get_exit_code() == 0 ? 2 : e.get_exit_code();
  }

  try {
    config.input = flags.input;
    config.output = flags.output;
    config.table_path = flags.table;
    config.tsv_dir = flags.tsv_dir;
    config.sign = unifluct::parse_sign_selection(flags.sign);
    config.convention = flags.p_value == "asymptotic"
                            ? unifluct::PValueConvention::kAsymptotic
                            : unifluct::PValueConvention::kStephens;

    if (*bhp) {
      const auto doc = unifluct::run_bhp_table(config);
      unifluct::write_output(config.output, unifluct::render(doc));
    } else if (*analyze) {
      config.alpha = alpha;
      unifluct::write_output(config.output,
                             unifluct::render(unifluct::run_analyze(config)));
    } else if (*scan) {
      if (alpha_opt->count() > 0) config.alpha = alpha;
      if (min_opt->count() > 0) config.alpha_min = alpha_min;
      if (max_opt->count() > 0) config.alpha_max = alpha_max;
      if (step_opt->count() > 0) config.alpha_step = alpha_step;
      unifluct::write_output(config.output,
                             unifluct::render(unifluct::run_scan(config)));
    } else if (*simulate) {
      const auto doc = unifluct::run_simulate(config);
      if (!config.output.empty() && config.output != "-") {
        std::cerr << doc.dump() << '\n';
      }
    }
  } catch (const unifluct::Error& e) {
    print_error(unifluct::to_string(e.kind()), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return 1;
  }
  return 0;
}
