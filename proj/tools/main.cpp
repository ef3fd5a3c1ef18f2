// voltsev: batch front end for volatility feature extraction and
// crash-severity estimation. Subcommands: features, describe, fit, compare,
// margins, shares, simulate. Every run writes <out>/manifest.json, success or
// not. Exit codes: 0 ok, 1 I/O, 2 validation, 3 non-convergence.
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "voltsev/csv.hpp"
#include "voltsev/errors.hpp"
#include "voltsev/estimation.hpp"
#include "voltsev/inference.hpp"
#include "voltsev/kinematics.hpp"
#include "voltsev/likelihood.hpp"
#include "voltsev/model.hpp"
#include "voltsev/synth.hpp"
#include "voltsev/volatility.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace voltsev;

namespace {

constexpr const char* kToolVersion = "0.1.0";

struct RunContext {
  std::string command;
  fs::path out_dir = ".";
  std::optional<std::uint64_t> seed;  ///< global --seed override
  int threads = 1;
  std::vector<std::string> inputs;
  std::string spec_path;
  json options = json::object();
  std::optional<std::uint64_t> effective_seed;
  std::vector<std::string> outputs;
};

std::ofstream open_output(RunContext& ctx, const std::string& name) {
  std::error_code ec;
  fs::create_directories(ctx.out_dir, ec);
  if (ec) throw io_error("cannot create output directory " + ctx.out_dir.string());
  const fs::path path = ctx.out_dir / name;
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path.string());
  ctx.outputs.push_back(path.string());
  return out;
}

void finish_output(const std::ofstream& out, const RunContext& ctx) {
  if (!out.good()) throw io_error("write failed in " + ctx.out_dir.string());
}

void write_manifest(const RunContext& ctx, double wall_s, int exit_code,
                    const std::string& error) {
  json m;
  m["command"] = ctx.command;
  m["tool_version"] = kToolVersion;
  m["inputs"] = ctx.inputs;
  m["spec"] = ctx.spec_path.empty() ? json() : json(ctx.spec_path);
  json opts = ctx.options;
  opts["threads"] = ctx.threads;
  m["options"] = opts;
  m["seed"] = ctx.effective_seed ? json(*ctx.effective_seed) : json();
  m["outputs"] = ctx.outputs;
  m["wall_time_s"] = wall_s;
  m["exit_code"] = exit_code;
  m["error"] = error.empty() ? json() : json(error);
  std::error_code ec;
  fs::create_directories(ctx.out_dir, ec);
  std::ofstream out(ctx.out_dir / "manifest.json");
  out << m.dump(2) << "\n";
}

EventDataset load_events(RunContext& ctx, const std::string& events_path,
                         const std::string& features_path, const std::string& outcome_column) {
  ctx.inputs.push_back(events_path);
  EventDataset data = read_events_csv_file(events_path, outcome_column);
  if (!features_path.empty()) {
    ctx.inputs.push_back(features_path);
    const DataTable features = read_table_csv_file(features_path);
    const std::size_t before = data.n_events();
    data = join_features(data, features);
    std::cout << "joined events: " << data.n_events() << " of " << before << " ("
              << (before - data.n_events()) << " unmatched)\n";
    if (data.n_events() == 0) {
      throw validation_error("feature join produced 0 rows (no shared event_id)");
    }
  }
  return data;
}

struct FeaturesArgs {
  std::string traces_path;
  double bin_length = kBinLengthSeconds;
  std::size_t min_bin_samples = kMinBinSamples;
  std::size_t min_side_samples = kMinSideSamples;
};

int cmd_features(RunContext& ctx, const FeaturesArgs& args) {
  ctx.inputs.push_back(args.traces_path);
  ctx.options = {{"bin_length", args.bin_length},
                 {"min_bin_samples", args.min_bin_samples},
                 {"min_side_samples", args.min_side_samples}};
  ParseResult parsed = parse_traces_file(args.traces_path);
  for (const ParseIssue& issue : parsed.issues) {
    std::cerr << args.traces_path << ":" << issue.line << ": " << issue.message << "\n";
  }
  if (!parsed.rejected_events.empty()) {
    std::cerr << "rejected events: " << parsed.rejected_events.size() << "\n";
  }
  if (parsed.traces.empty()) {
    throw validation_error("no parsable events in " + args.traces_path);
  }
  std::vector<VolatilityFeatures> features;
  features.reserve(parsed.traces.size());
  for (const KinematicsTrace& trace : parsed.traces) {
    features.push_back(extract_features(trace, args.bin_length, args.min_bin_samples,
                                        args.min_side_samples));
  }
  std::ofstream out = open_output(ctx, "features.csv");
  write_features_csv(out, features);
  finish_output(out, ctx);
  std::cout << "events: " << features.size() << "\nwrote " << ctx.outputs.back() << "\n";
  return 0;
}

struct DescribeArgs {
  std::string input_path;
  std::string join_path;
  std::vector<std::string> vif_variables;
};

int cmd_describe(RunContext& ctx, const DescribeArgs& args) {
  ctx.inputs.push_back(args.input_path);
  ctx.options = json::object();
  if (!args.vif_variables.empty()) ctx.options["vif"] = args.vif_variables;
  DataTable table = read_table_csv_file(args.input_path);
  if (!args.join_path.empty()) {
    ctx.inputs.push_back(args.join_path);
    table = inner_join(table, read_table_csv_file(args.join_path));
  }
  const DescriptiveStats stats = describe(table);
  std::ofstream out = open_output(ctx, "descriptive_stats.csv");
  write_descriptive_stats_csv(out, stats);
  finish_output(out, ctx);
  std::cout << "rows: " << stats.n_rows << ", variables: " << stats.columns.size() << "\nwrote "
            << ctx.outputs.back() << "\n";
  if (!args.vif_variables.empty()) {
    const std::vector<VifRow> rows = vif(table, args.vif_variables);
    std::ofstream vout = open_output(ctx, "vif.csv");
    csv::write_row(vout, {"variable", "vif"});
    for (const VifRow& row : rows) {
      csv::write_row(vout, {row.variable, row.infinite ? "inf" : csv::format_double(row.vif)});
    }
    finish_output(vout, ctx);
    std::cout << "wrote " << ctx.outputs.back() << "\n";
  }
  return 0;
}

struct FitArgs {
  std::string events_path;
  std::string features_path;
  std::string spec_path;
};

int cmd_fit(RunContext& ctx, const FitArgs& args) {
  ctx.spec_path = args.spec_path;
  ModelSpec spec = load_model_spec(args.spec_path);
  if (ctx.seed) spec.options.seed = *ctx.seed;
  ctx.effective_seed = spec.options.seed;
  ctx.options = {{"model", spec.name},
                 {"draws", spec.options.draws},
                 {"scramble", spec.options.scramble}};
  EventDataset data = load_events(ctx, args.events_path, args.features_path, spec.outcome_column);
  validate_spec_columns(spec, data.covariates);
  FitOptions opt = FitOptions::from_spec(spec);
  opt.threads = ctx.threads;
  const EstimationResult result = fit(data, spec, opt);

  std::ofstream jout = open_output(ctx, "result.json");
  jout << result_to_json(result) << "\n";
  finish_output(jout, ctx);
  const std::string table = coefficient_table(result);
  std::ofstream tout = open_output(ctx, "coefficients.txt");
  tout << table;
  finish_output(tout, ctx);
  std::cout << table;
  if (!result.converged) {
    std::cerr << "did not converge: " << result.message << "\n";
    return 3;
  }
  return 0;
}

int cmd_compare(RunContext& ctx, const std::vector<std::string>& result_paths) {
  ctx.options = json::object();
  std::vector<EstimationResult> results;
  results.reserve(result_paths.size());
  for (const std::string& path : result_paths) {
    ctx.inputs.push_back(path);
    results.push_back(load_result(path));
  }
  const std::string table = comparison_table(results);
  std::ofstream out = open_output(ctx, "comparison.txt");
  out << table;
  finish_output(out, ctx);
  std::cout << table;
  return 0;
}

struct MarginsArgs {
  std::string result_path;
  std::string events_path;
  std::string features_path;
  bool unit_difference = false;
};

int cmd_margins(RunContext& ctx, const MarginsArgs& args) {
  ctx.inputs.push_back(args.result_path);
  ctx.options = {{"unit_difference", args.unit_difference}};
  const EstimationResult result = load_result(args.result_path);
  ctx.effective_seed = result.spec.options.seed;
  const EventDataset data =
      load_events(ctx, args.events_path, args.features_path, result.spec.outcome_column);
  const MarginalEffectsTable table = marginal_effects(result, data, args.unit_difference);
  std::ofstream out = open_output(ctx, "marginal_effects.csv");
  write_marginal_effects_csv(out, table);
  finish_output(out, ctx);
  std::cout << "effects over " << table.n_events << " events\nwrote " << ctx.outputs.back()
            << "\n";
  return 0;
}

struct SharesArgs {
  std::string result_path;
  std::string events_path;
  std::string features_path;
  bool event_conditioned = false;
};

int cmd_shares(RunContext& ctx, const SharesArgs& args) {
  ctx.inputs.push_back(args.result_path);
  ctx.options = {{"event_conditioned", args.event_conditioned}};
  const EstimationResult result = load_result(args.result_path);
  std::vector<DirectionalShare> shares;
  if (args.event_conditioned) {
    if (args.events_path.empty()) {
      throw validation_error("--event-conditioned needs --events (and --features if joined)");
    }
    ctx.effective_seed = result.spec.options.seed;
    const EventDataset data =
        load_events(ctx, args.events_path, args.features_path, result.spec.outcome_column);
    const PreparedSample sample = prepare_sample(data, result.spec);
    const DrawTensor tensor = draws_for(result.spec, sample.n_events());
    const RealizedDraws draws = realize_draws(tensor, result.spec);
    shares = event_conditioned_shares(result, sample, draws);
  } else {
    shares = directional_shares(result);
  }
  if (shares.empty()) std::cerr << "note: no applicable random terms\n";
  std::ofstream out = open_output(ctx, "directional_shares.csv");
  write_directional_shares_csv(out, result.spec.name, shares);
  finish_output(out, ctx);
  std::cout << "wrote " << ctx.outputs.back() << "\n";
  return 0;
}

struct SimulateArgs {
  std::string truth_path;
  std::string profiles_path;
};

int cmd_simulate(RunContext& ctx, const SimulateArgs& args) {
  if (args.truth_path.empty() && args.profiles_path.empty()) {
    throw validation_error("simulate: provide --truth and/or --profiles");
  }
  ctx.options = json::object();
  if (!args.truth_path.empty()) {
    ctx.inputs.push_back(args.truth_path);
    GroundTruth truth = load_truth(args.truth_path);
    if (ctx.seed) truth.seed = *ctx.seed;
    ctx.effective_seed = truth.seed;
    const EventDataset data = simulate_events(truth);
    std::ofstream out = open_output(ctx, "events.csv");
    write_events_csv(out, data, truth.spec.outcome_column);
    finish_output(out, ctx);
    std::cout << "events: " << data.n_events() << "\nwrote " << ctx.outputs.back() << "\n";
  }
  if (!args.profiles_path.empty()) {
    ctx.inputs.push_back(args.profiles_path);
    const std::vector<TraceProfile> profiles = load_profiles(args.profiles_path);
    const std::uint64_t seed = ctx.seed.value_or(0);
    if (!ctx.effective_seed) ctx.effective_seed = seed;
    const std::vector<KinematicsTrace> traces = simulate_traces(profiles, seed);
    std::ofstream out = open_output(ctx, "traces.csv");
    write_traces_csv(out, traces);
    finish_output(out, ctx);
    std::cout << "traces: " << traces.size() << "\nwrote " << ctx.outputs.back() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"driving-volatility crash severity toolkit"};
  app.require_subcommand(1);

  RunContext ctx;
  std::string out_dir = ".";
  std::uint64_t seed_flag = 0;
  app.add_option("--out", out_dir, "output directory, created if absent")
      ->capture_default_str();
  CLI::Option* seed_opt =
      app.add_option("--seed", seed_flag, "override the seed carried by spec/truth inputs");
  app.add_option("--threads", ctx.threads, "worker threads for likelihood evaluation")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  FeaturesArgs fa;
  CLI::App* features = app.add_subcommand("features", "extract volatility features from traces");
  features->fallthrough();
  features->add_option("--traces", fa.traces_path, "10 Hz trace CSV")->required();
  features->add_option("--bin-length", fa.bin_length, "bin window length, seconds")
      ->capture_default_str();
  features->add_option("--min-bin-samples", fa.min_bin_samples, "samples needed to keep a bin")
      ->capture_default_str();
  features
      ->add_option("--min-side-samples", fa.min_side_samples,
                   "samples needed on an accel/decel side")
      ->capture_default_str();

  DescribeArgs da;
  CLI::App* describe_cmd = app.add_subcommand("describe", "descriptive statistics of a table");
  describe_cmd->fallthrough();
  describe_cmd->add_option("--input", da.input_path, "table CSV keyed by event_id")->required();
  describe_cmd->add_option("--join", da.join_path, "second table to inner-join before describing");
  describe_cmd->add_option("--vif", da.vif_variables,
                           "also compute variance inflation factors for these columns");

  FitArgs fta;
  CLI::App* fit_cmd = app.add_subcommand("fit", "estimate a severity model");
  fit_cmd->fallthrough();
  fit_cmd->add_option("--events", fta.events_path, "event CSV with the outcome column")
      ->required();
  fit_cmd->add_option("--features", fta.features_path, "feature CSV to inner-join on event_id");
  fit_cmd->add_option("--spec", fta.spec_path, "model spec JSON")->required();

  std::vector<std::string> compare_paths;
  CLI::App* compare_cmd = app.add_subcommand("compare", "goodness-of-fit table for 2+ results");
  compare_cmd->fallthrough();
  compare_cmd->add_option("results", compare_paths, "result JSON files")
      ->required()
      ->expected(2, -1);

  MarginsArgs ma;
  CLI::App* margins_cmd = app.add_subcommand("margins", "direct marginal effects of a fit");
  margins_cmd->fallthrough();
  margins_cmd->add_option("--result", ma.result_path, "result JSON from fit")->required();
  margins_cmd->add_option("--events", ma.events_path, "event CSV used for the fit")->required();
  margins_cmd->add_option("--features", ma.features_path, "feature CSV to inner-join");
  margins_cmd->add_flag("--unit-difference", ma.unit_difference,
                        "evaluate continuous effects as P(x+1) - P(x)");

  SharesArgs sa;
  CLI::App* shares_cmd =
      app.add_subcommand("shares", "directional heterogeneity of random coefficients");
  shares_cmd->fallthrough();
  shares_cmd->add_option("--result", sa.result_path, "result JSON from fit")->required();
  shares_cmd->add_flag("--event-conditioned", sa.event_conditioned,
                       "use per-event realized draws instead of the population normal");
  shares_cmd->add_option("--events", sa.events_path, "event CSV (event-conditioned only)");
  shares_cmd->add_option("--features", sa.features_path, "feature CSV to inner-join");

  SimulateArgs sia;
  CLI::App* simulate_cmd = app.add_subcommand("simulate", "generate synthetic events or traces");
  simulate_cmd->fallthrough();
  simulate_cmd->add_option("--truth", sia.truth_path, "ground-truth JSON for event simulation");
  simulate_cmd->add_option("--profiles", sia.profiles_path,
                           "trace profile JSON for kinematics simulation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  ctx.out_dir = out_dir;
  if (seed_opt->count() > 0) ctx.seed = seed_flag;
  ctx.effective_seed = ctx.seed;

  int exit_code = 0;
  std::string error;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    if (features->parsed()) {
      ctx.command = "features";
      exit_code = cmd_features(ctx, fa);
    } else if (describe_cmd->parsed()) {
      ctx.command = "describe";
      exit_code = cmd_describe(ctx, da);
    } else if (fit_cmd->parsed()) {
      ctx.command = "fit";
      exit_code = cmd_fit(ctx, fta);
    } else if (compare_cmd->parsed()) {
      ctx.command = "compare";
      exit_code = cmd_compare(ctx, compare_paths);
    } else if (margins_cmd->parsed()) {
      ctx.command = "margins";
      exit_code = cmd_margins(ctx, ma);
    } else if (shares_cmd->parsed()) {
      ctx.command = "shares";
      exit_code = cmd_shares(ctx, sa);
    } else if (simulate_cmd->parsed()) {
      ctx.command = "simulate";
      exit_code = cmd_simulate(ctx, sia);
    }
  } catch (const io_error& e) {
    error = e.what();
    exit_code = 1;
  } catch (const validation_error& e) {
    error = e.what();
    exit_code = 2;
  } catch (const convergence_error& e) {
    error = e.what();
    exit_code = 3;
  } catch (const std::exception& e) {
    error = e.what();
    exit_code = 1;
  }
  if (!error.empty()) std::cerr << "error: " << error << "\n";
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  try {
    write_manifest(ctx, wall, exit_code, error);
  } catch (...) {
    std::cerr << "warning: could not write manifest\n";
  }
  return exit_code;
}
