#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <optional>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qmini/errors.hpp"
#include "qmini/miniapps.hpp"
#include "qmini/report.hpp"

namespace qmini::cli {
namespace {

using nlohmann::json;

/// Bad command line; reported with the usage text.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json read_json_file(const std::string& path, const char* field) {
  std::ifstream in(path);
  if (!in) throw ConfigError(field, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(field, "'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError("output", "cannot write '" + path + "'");
  out << text;
}

/// Flag values are JSON literals when they parse as such ("3", "true",
/// "[1,3,5]"), plain strings otherwise.
json flag_value(const std::string& text) {
  json v = json::parse(text, nullptr, /*allow_exceptions=*/false);
  return v.is_discarded() ? json(text) : v;
}

json parse_param_flags(const std::vector<std::string>& extras) {
  json params = json::object();
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& arg = extras[i];
    if (arg.rfind("--", 0) != 0 || arg.size() <= 2) {
      throw UsageError("unexpected argument '" + arg + "'");
    }
    std::string key = arg.substr(2);
    std::string value;
    if (const auto eq = key.find('='); eq != std::string::npos) {
      value = key.substr(eq + 1);
      key = key.substr(0, eq);
    } else {
      if (i + 1 >= extras.size()) throw UsageError("flag '" + arg + "' needs a value");
      value = extras[++i];
    }
    std::replace(key.begin(), key.end(), '-', '_');
    params[key] = flag_value(value);
  }
  return params;
}

std::string fmt(double v, int precision = 6) {
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

void print_summary(const MetricsReport& r, std::ostream& out) {
  const json& res = r.results;
  out << "miniapp     " << r.config.value("miniapp", "?") << "\n"
      << "resources   " << r.resources.nodes << "x" << r.resources.pes_per_node << " "
      << to_string(r.resources.backend) << "\n"
      << "tasks       " << r.tasks.size() << "\n"
      << "makespan    " << fmt(r.makespan) << " s\n"
      << "throughput  " << fmt(r.throughput) << " tasks/s\n";
  if (r.speedup) out << "speedup     " << fmt(*r.speedup) << " (efficiency " << fmt(*r.efficiency) << ")\n";
  if (r.exchange) {
    out << "exchange    " << r.exchange->messages_sent << " messages, " << r.exchange->bytes_exchanged
        << " bytes\n";
  }
  out << "digest      " << r.circuit_digest << "\n";

  if (res.contains("per_scale")) {
    out << "\nscale  mean          stderr        trajectories\n";
    for (const auto& row : res.at("per_scale")) {
      out << std::left << std::setw(7) << row.at("scale").get<int>() << std::setw(14)
          << fmt(row.at("mean").get<double>()) << std::setw(14) << fmt(row.at("stderr").get<double>())
          << row.at("trajectories") << "\n";
    }
    out << "mitigated (" << res.value("extrapolation", "?") << ")  "
        << fmt(res.at("mitigated_value").get<double>()) << "\n";
    if (res.contains("ideal")) out << "ideal       " << fmt(res.at("ideal").get<double>()) << "\n";
  }
  if (res.contains("jobs") && res.contains("reconstructed")) {
    out << "\nterm  basis  prep     weight  upstream      downstream    contribution\n";
    for (const auto& row : res.at("jobs")) {
      out << std::left << std::setw(6) << row.at("term").get<int>() << std::setw(7)
          << row.at("basis").get<std::string>() << std::setw(9) << row.at("prep").get<std::string>()
          << std::setw(8) << fmt(row.at("weight").get<double>()) << std::setw(14)
          << fmt(row.at("upstream").get<double>()) << std::setw(14)
          << fmt(row.at("downstream").get<double>()) << fmt(row.at("contribution").get<double>())
          << "\n";
    }
    out << "reconstructed  " << fmt(res.at("reconstructed").get<double>(), 12) << "\n"
        << "uncut          " << fmt(res.at("uncut").get<double>(), 12) << "\n";
  }
  if (res.contains("trace")) {
    const json& t = res.at("trace");
    out << "\niterations  " << t.at("iterations").size() << (t.at("converged").get<bool>() ? " (converged)" : "")
        << "\nfinal cost  " << fmt(t.at("final_cost").get<double>(), 10) << "\n";
  }
  if (res.contains("optimal_probability")) {
    out << "P(optimal)  " << fmt(res.at("optimal_probability").get<double>()) << "\n"
        << "best cut    " << res.at("best_sampled_bitstring").get<std::string>() << " = "
        << fmt(res.at("best_sampled_cut").get<double>()) << " (optimum "
        << fmt(res.at("optimal_cut").get<double>()) << ")\n";
  }
  if (res.contains("mean_expectation")) {
    out << "mean <obs>  " << fmt(res.at("mean_expectation").get<double>(), 10) << "\n";
  }
  if (res.contains("expectation")) out << "<obs>       " << fmt(res.at("expectation").get<double>(), 10) << "\n";
  if (!r.stages.empty()) {
    out << "\nstage          start       end         tasks\n";
    for (const auto& s : r.stages) {
      out << std::left << std::setw(15) << s.name << std::setw(12) << fmt(s.start) << std::setw(12)
          << fmt(s.end) << s.task_count << "\n";
    }
  }
}

struct RunArgs {
  std::string config;
  std::string out;
  std::string baseline;
  std::optional<std::size_t> nodes;
  std::optional<std::size_t> pes_per_node;
  std::string backend;
};

int do_run(const RunArgs& a, std::vector<std::string> extras, std::ostream& out) {
  json cfg = a.config.empty() ? json::object() : read_json_file(a.config, "config");
  if (!cfg.is_object()) throw ConfigError("config", "configuration must be a JSON object");
  // The mini-app name is taken from the leftover arguments rather than
  // declared as a positional, so a parameter value such as "--qubits 4" can
  // never be mistaken for it when the name comes from --config.
  if (!extras.empty() && extras.front().rfind("-", 0) != 0) {
    cfg["miniapp"] = extras.front();
    extras.erase(extras.begin());
  }
  if (!cfg.contains("miniapp")) throw UsageError("run needs a mini-app name or a --config naming one");

  json params = cfg.value("parameters", json::object());
  if (!params.is_object()) throw ConfigError("parameters", "'parameters' must be an object");
  params.update(parse_param_flags(extras));
  cfg["parameters"] = params;

  json resources = cfg.value("resources", json::object());
  if (a.nodes) resources["nodes"] = *a.nodes;
  if (a.pes_per_node) resources["pes_per_node"] = *a.pes_per_node;
  if (!a.backend.empty()) resources["backend"] = a.backend;
  if (!resources.empty()) cfg["resources"] = resources;
  if (!a.out.empty()) cfg["output"] = a.out;

  const MiniAppConfig config = config_from_json(cfg);
  MetricsReport report = run_miniapp(config);
  if (!a.baseline.empty()) {
    attach_baseline(report, report_from_json(read_json_file(a.baseline, "baseline")));
  }
  const std::string text = to_json(report).dump(2) + "\n";
  if (config.output) {
    write_file(*config.output, text);
    print_summary(report, out);
    out << "report      " << *config.output << "\n";
  } else {
    out << text;
  }
  return kExitOk;
}

MetricsReport load_report(const std::string& path) {
  const json j = read_json_file(path, "in");
  const auto problems = validate_report(j);
  if (!problems.empty()) throw ConfigError("in", "'" + path + "' is not a valid report: " + problems.front());
  return report_from_json(j);
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"qmini: quantum-HPC execution-motif mini-apps", "qmini"};
  app.require_subcommand(1, 1);

  RunArgs run_args;
  auto* run = app.add_subcommand(
      "run", "Run a mini-app: qmini run [MINIAPP] [--config FILE] [--<param> <value>]...");
  run->add_option("--config", run_args.config, "JSON config {miniapp, parameters, resources, output}");
  run->add_option("--out", run_args.out, "Write the JSON report here instead of stdout");
  run->add_option("--baseline", run_args.baseline, "Baseline report for speedup and efficiency");
  run->add_option("--nodes", run_args.nodes, "resources.nodes");
  run->add_option("--pes-per-node", run_args.pes_per_node, "resources.pes_per_node");
  run->add_option("--backend", run_args.backend, "resources.backend: serial, pool or sharded_cluster");
  run->allow_extras();

  std::string report_in;
  std::string report_format = "summary";
  auto* report = app.add_subcommand("report", "Render a saved report");
  report->add_option("--in", report_in, "Report JSON file")->required();
  report->add_option("--format", report_format, "summary, csv (one row per task) or trace-csv")
      ->check(CLI::IsMember({"summary", "csv", "trace-csv"}));

  std::string validate_config;
  std::string validate_report_path;
  auto* validate = app.add_subcommand("validate", "Check a config or a report without running anything");
  auto* vc = validate->add_option("--config", validate_config, "Config file to check");
  auto* vr = validate->add_option("--report", validate_report_path, "Report file to check against the schema");
  vc->excludes(vr);
  validate->require_option(1);

  auto* list = app.add_subcommand("list", "List the mini-app catalog");

  std::vector<std::string> args;
  for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitConfig;
  }

  try {
    if (*run) return do_run(run_args, run->remaining(), out);
    if (*report) {
      const MetricsReport r = load_report(report_in);
      if (report_format == "csv") {
        out << report_to_csv(r);
      } else if (report_format == "trace-csv") {
        if (!r.results.contains("trace")) throw ConfigError("format", "report has no optimizer trace");
        out << trace_to_csv(r);
      } else {
        print_summary(r, out);
      }
      return kExitOk;
    }
    if (*validate) {
      if (!validate_config.empty()) {
        const MiniAppConfig c = config_from_json(read_json_file(validate_config, "config"));
        out << "valid config for " << c.name << "\n";
      } else {
        load_report(validate_report_path);
        out << "valid report (schema version " << kReportSchemaVersion << ")\n";
      }
      return kExitOk;
    }
    if (*list) {
      for (const auto& e : catalog()) {
        out << std::left << std::setw(19) << e.name << std::setw(19) << e.integration << e.motif << "\n"
            << std::string(19, ' ') << "interaction: " << e.interaction << "\n"
            << std::string(19, ' ') << "coupling:    " << e.coupling << "\n"
            << std::string(19, ' ') << "middleware:  " << e.middleware << "\n";
      }
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n" << run->help();
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "config error [" << e.field() << "]: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "execution error: " << e.what() << "\n";
    return kExitExecution;
  }
  return kExitConfig;
}

}  // namespace qmini::cli
