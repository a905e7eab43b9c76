#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bottlemod/bottlemod.hpp"

namespace fs = std::filesystem;
using namespace bottlemod;

namespace {

enum Exit : int {
  ok = 0,
  invalid = 2,
  cyclic = 3,
  solver_error = 4,
  unknown_parameter = 5,
};

struct Failure {
  int code;
};

void print_violations(const std::vector<Violation>& vs) {
  for (const auto& v : vs) {
    std::cerr << to_string(v.kind) << ": " << v.message;
    if (v.witness) std::cerr << " (at " << report::number(*v.witness) << ")";
    std::cerr << '\n';
  }
}

// Load, apply overrides and check structure; diagnostics go to stderr.
Workflow load_checked(const std::string& path, const std::vector<std::string>& overrides) {
  Workflow wf = io::load_file(path);
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw InvalidParameter("--set expects PATH=VALUE, got '" + o + "'");
    std::size_t used = 0;
    const std::string value = o.substr(eq + 1);
    double v = 0.0;
    try {
      v = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != value.size() || value.empty()) throw InvalidParameter("--set value is not a number: '" + value + "'");
    apply_parameter(wf, o.substr(0, eq), v);
  }
  const auto vs = validate(wf);
  if (!vs.empty()) {
    print_violations(vs);
    throw Failure{invalid};
  }
  return wf;
}

void write_text(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out_path);
  if (!f) throw SchemaError("cannot write '" + out_path + "'");
  f << text;
}

struct AnalyzeArgs {
  std::string file;
  std::string out;
  std::string series;
  std::string csv_dir;
  int samples = 512;
  bool oracle_check = false;
  double dt = 1e-3;
  std::vector<std::string> overrides;
};

int cmd_analyze(const AnalyzeArgs& a) {
  std::optional<report::Series> series;
  if (!a.series.empty()) {
    series = report::parse_series(a.series);
    if (!series) throw InvalidParameter("unknown series '" + a.series + "' (progress, usage or buffered)");
    if (a.csv_dir.empty()) throw InvalidParameter("--series needs --csv DIR");
  }
  if (a.samples < 1) throw InvalidParameter("--samples must be >= 1");
  if (!(a.dt > 0.0)) throw InvalidParameter("--dt must be positive");

  Workflow wf = load_checked(a.file, a.overrides);
  topo_order(wf);
  const WorkflowResult r = analyze(wf);
  report::json doc = report::to_json(wf, r);

  if (a.oracle_check) {
    oracle::Options o;
    o.dt = a.dt;
    o.horizon = report::series_horizon(r) + 10.0 * a.dt;
    const auto sim = oracle::simulate(wf, o);
    doc["oracle_makespan"] = report::optional_number(sim.makespan);
    doc["max_deviation"] = report::max_deviation(r, sim);
  }

  if (series) {
    fs::create_directories(a.csv_dir);
    const double horizon = report::series_horizon(r);
    for (const auto& po : r.processes) {
      std::ofstream f(fs::path(a.csv_dir) / (po.name + ".csv"));
      if (!f) throw SchemaError("cannot write into '" + a.csv_dir + "'");
      report::write_series(f, wf, po, *series, a.samples, horizon);
    }
  }
  write_text(a.out, doc.dump(2) + "\n");
  return ok;
}

struct SweepArgs {
  std::string file;
  std::string param;
  double from = 0.0;
  double to = 1.0;
  int steps = 10;
  bool parallel = false;
  std::string out;
  std::vector<std::string> overrides;
};

int cmd_sweep(const SweepArgs& a) {
  if (a.steps < 1) throw InvalidParameter("--steps must be >= 1");
  Workflow wf = load_checked(a.file, a.overrides);
  topo_order(wf);
  SweepOptions so;
  so.parallel = a.parallel;
  const auto points = sweep(wf, a.param, linspace(a.from, a.to, a.steps), so);
  write_text(a.out, report::sweep_csv(points));
  return ok;
}

int cmd_validate(const std::string& file) {
  Workflow wf = io::load_file(file);
  auto vs = validate(wf);
  try {
    topo_order(wf);
  } catch (const CyclicDependency& e) {
    vs.push_back({Violation::Kind::reference, "edges", e.what(), std::nullopt});
  }
  if (!vs.empty()) {
    print_violations(vs);
    return invalid;
  }
  std::cout << "OK\n";
  return ok;
}

template <class F>
int guarded(F&& f) {
  try {
    apply_tolerance_from_env();
    return f();
  } catch (const Failure& e) {
    return e.code;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return invalid;
  } catch (const CyclicDependency& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cyclic;
  } catch (const UnknownParameter& e) {
    std::cerr << "error: " << e.what() << '\n';
    return unknown_parameter;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return solver_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return solver_error;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Analytic bottleneck and makespan analysis for process workflows"};
  app.require_subcommand(1);

  AnalyzeArgs aa;
  auto* analyze_cmd = app.add_subcommand("analyze", "Solve a workflow and report completions and bottlenecks");
  analyze_cmd->add_option("file", aa.file, "Workflow document")->required()->check(CLI::ExistingFile);
  analyze_cmd->add_option("--out", aa.out, "Write the JSON report here instead of stdout");
  analyze_cmd->add_option("--series", aa.series, "Emit per-process CSV series: progress, usage or buffered");
  analyze_cmd->add_option("--csv", aa.csv_dir, "Directory for --series output");
  analyze_cmd->add_option("--samples", aa.samples, "Uniform samples per series in addition to breakpoints")
      ->capture_default_str();
  analyze_cmd->add_flag("--oracle-check", aa.oracle_check, "Cross-check against the time-stepping reference");
  analyze_cmd->add_option("--dt", aa.dt, "Step of the reference simulation")->capture_default_str();
  analyze_cmd->add_option("--set", aa.overrides, "Override a parameter, PATH=VALUE (repeatable)");

  SweepArgs sa;
  auto* sweep_cmd = app.add_subcommand("sweep", "Makespan over a range of one parameter, as CSV");
  sweep_cmd->add_option("file", sa.file, "Workflow document")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--param", sa.param, "Dot path, e.g. bindings.dl1.fraction")->required();
  sweep_cmd->add_option("--from", sa.from, "First value")->required();
  sweep_cmd->add_option("--to", sa.to, "Last value")->required();
  sweep_cmd->add_option("--steps", sa.steps, "Number of values")->capture_default_str();
  sweep_cmd->add_flag("--parallel", sa.parallel, "Evaluate points concurrently (row order is kept)");
  sweep_cmd->add_option("--out", sa.out, "Write the CSV here instead of stdout");
  sweep_cmd->add_option("--set", sa.overrides, "Override a parameter, PATH=VALUE (repeatable)");

  std::string validate_file;
  auto* validate_cmd = app.add_subcommand("validate", "Check a workflow document without solving it");
  validate_cmd->add_option("file", validate_file, "Workflow document")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return invalid;
  }

  if (*analyze_cmd) return guarded([&] { return cmd_analyze(aa); });
  if (*sweep_cmd) return guarded([&] { return cmd_sweep(sa); });
  return guarded([&] { return cmd_validate(validate_file); });
}
