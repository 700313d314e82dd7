#include "cli.hpp"

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "metasim/metasim.hpp"

namespace metasim::cli {

namespace {

constexpr int kOk = 0;
constexpr int kSimFault = 2;
constexpr int kConfigError = 3;

void print_summary(std::ostream& out, const std::vector<ResultRow>& rows, unsigned reps) {
  out << "trace,variant,sweep_value,normalized_mean,normalized_min,normalized_max,mmc_hit_rate\n";
  for (std::size_t i = 0; i < rows.size(); i += reps) {
    const auto& r = rows[i];
    out << r.trace << ',' << r.variant << ',' << r.sweep_value << ',' << format_ratio(r.normalized_mean) << ','
        << format_ratio(r.normalized_min) << ',' << format_ratio(r.normalized_max) << ','
        << format_ratio(r.stats.mmc_hit_rate()) << '\n';
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"metasim: tagged-memory metadata system simulator"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "run a named experiment and write per-run stats as CSV");
  std::string experiment, config_path, trace_arg, out_path;
  std::uint64_t seed = 1;
  unsigned reps = 5, threads = 0;
  std::vector<std::string> sets;
  run->add_option("--experiment", experiment, "experiment name")->required();
  run->add_option("--config", config_path, "JSON config file");
  run->add_option("--trace", trace_arg, "trace file or generator spec (name:key=value,...)");
  run->add_option("--out", out_path, "output CSV path")->required();
  run->add_option("--seed", seed, "experiment seed");
  run->add_option("--reps", reps, "repetitions per cell");
  run->add_option("--threads", threads, "worker threads (0 = all cores)");
  run->add_option("--set", sets, "config override key=value (repeatable)");
  std::map<std::string, std::string> field_flags;
  for (const auto& f : config_fields()) {
    if (f.name == "seed") continue;
    run->add_option("--" + f.name, field_flags[f.name], f.help);
  }

  // gen
  auto* gen = app.add_subcommand("gen", "generate a trace file");
  std::string workload, params, gen_out;
  gen->add_option("--workload", workload, "workload name")->required();
  gen->add_option("--params", params, "key=value,... generator parameters");
  gen->add_option("--out", gen_out, "output trace path")->required();

  // validate
  auto* val = app.add_subcommand("validate", "check a trace file");
  std::string val_path;
  val->add_option("--trace", val_path, "trace file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kConfigError;
  }

  try {
    if (*run) {
      ExperimentOptions opt;
      if (!config_path.empty()) opt.base = load_config(config_path);
      for (const auto& f : config_fields()) {
        if (f.name == "seed") continue;
        if (run->count("--" + f.name)) set_field(opt.base, f.name, field_flags[f.name]);
      }
      for (const auto& s : sets) apply_override(opt.base, s);
      opt.base.validate();
      opt.seed = seed;
      opt.reps = reps;
      opt.threads = threads;
      if (!trace_arg.empty()) opt.trace = trace_arg;
      const auto rows = run_experiment(experiment, opt);
      emit_csv(rows, out_path);
      write_text(out_path + ".traps.csv", format_trap_log(rows));
      print_summary(out, rows, reps);
      return kOk;
    }
    if (*gen) {
      const auto spec = parse_trace_spec(params.empty() ? workload : workload + ":" + params);
      const auto trace = generate(spec);
      trace_write(trace, gen_out);
      out << "wrote " << trace.events.size() << " events to " << gen_out << '\n';
      return kOk;
    }
    if (*val) {
      const auto trace = trace_read(val_path);
      const auto problems = validate_trace(trace);
      for (const auto& p : problems) err << val_path << ": " << p << '\n';
      if (!problems.empty()) return kSimFault;
      out << val_path << ": ok, " << trace.events.size() << " events, " << trace.memory_events()
                << " memory events\n";
      return kOk;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const SimulationFault& e) {
    err << "simulation fault: " << e.what() << '\n';
    return kSimFault;
  } catch (const TraceParseError& e) {
    err << "invalid trace: " << e.what() << '\n';
    return kSimFault;
  } catch (const TraceIntegrityError& e) {
    err << "invalid trace: " << e.what() << '\n';
    return kSimFault;
  } catch (const MetadataError& e) {
    err << "simulation fault: " << e.what() << '\n';
    return kSimFault;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return kOk;
}

}  // namespace metasim::cli
