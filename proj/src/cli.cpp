#include "thermolens/cli.hpp"

#include <CLI11.hpp>

#include <cctype>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <utility>

#include "thermolens/analytics.hpp"
#include "thermolens/error.hpp"
#include "thermolens/io.hpp"
#include "thermolens/powerlaw.hpp"
#include "thermolens/structure.hpp"
#include "thermolens/thermo.hpp"

namespace thermolens {
namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string subcommand;
  std::string input;
  std::string readership;
  std::string output;
  std::string energy_output;
  std::string classes_output;
  std::string energy_model = "log";
  std::string format;
  double ks_threshold = kDefaultKsThreshold;
  SaturationParams saturation;
  std::optional<std::int64_t> horizon;
  bool include_unsaturated = false;
  double alpha = 0.0;
  Count n = 0;
  std::uint64_t seed = 0;
  double alpha_min = 1.2;
  double alpha_max = 4.0;
  double step = 0.1;
  Value truncation = 1000;
  Value support_max = 10000;
  double target_energy = 1.0;
  double tol = kBisectionTol;
  int perturbations = 100;
  Value class_base = 10;
  bool strict = false;
  unsigned threads = 1;
};

using Settings = std::vector<std::pair<std::string, std::string>>;

std::string num(double x) { return io::format_number(x); }

// Result-affecting configuration of a run; --threads is deliberately absent.
Settings effective_settings(const RunConfig &c) {
  const auto &s = c.subcommand;
  Settings out;
  if (!c.input.empty()) out.emplace_back("input", c.input);
  if (s == "metrics") {
    out.emplace_back("energy_model", c.energy_model);
  } else if (s == "fit") {
    out.emplace_back("ks_threshold", num(c.ks_threshold));
    out.emplace_back("estimator", kEstimatorName);
  } else if (s == "synth") {
    out.emplace_back("alpha", num(c.alpha));
    out.emplace_back("n", std::to_string(c.n));
    out.emplace_back("seed", std::to_string(c.seed));
  } else if (s == "curves") {
    out.emplace_back("alpha_min", num(c.alpha_min));
    out.emplace_back("alpha_max", num(c.alpha_max));
    out.emplace_back("step", num(c.step));
    out.emplace_back("truncation", std::to_string(c.truncation));
  } else if (s == "verify-theorem") {
    out.emplace_back("energy_model", c.energy_model);
    out.emplace_back("support_max", std::to_string(c.support_max));
    out.emplace_back("target_energy", num(c.target_energy));
    out.emplace_back("tol", num(c.tol));
    out.emplace_back("perturbations", std::to_string(c.perturbations));
    out.emplace_back("seed", std::to_string(c.seed));
  } else if (s == "evolve") {
    out.emplace_back("energy_model", c.energy_model);
    out.emplace_back("ks_threshold", num(c.ks_threshold));
    out.emplace_back("class_base", std::to_string(c.class_base));
    out.emplace_back("calendar", "utc-month");
    out.emplace_back("strict", c.strict ? "1" : "0");
  } else if (s == "pages") {
    out.emplace_back("ks_threshold", num(c.ks_threshold));
    out.emplace_back("min_edits", std::to_string(c.saturation.min_edits));
    out.emplace_back("tail_frac", num(c.saturation.tail_frac));
    out.emplace_back("growth_frac", num(c.saturation.growth_frac));
    out.emplace_back("horizon", c.horizon ? std::to_string(*c.horizon) : "last-event");
    out.emplace_back("time_axis", "wall-clock");
    out.emplace_back("strict", c.strict ? "1" : "0");
  } else if (s == "correlate") {
    out.emplace_back("readership", c.readership);
    out.emplace_back("include_unsaturated", c.include_unsaturated ? "1" : "0");
    out.emplace_back("join", "inner");
    out.emplace_back("strict", c.strict ? "1" : "0");
  }
  return out;
}

std::string header_line(const RunConfig &c) {
  std::string line = std::string("# thermolens ") + kVersion + " " + c.subcommand;
  for (const auto &[k, v] : effective_settings(c)) line += " " + k + "=" + v;
  return line;
}

io::Json header_json(const RunConfig &c) {
  io::Json config = io::Json::object();
  for (const auto &[k, v] : effective_settings(c)) config[k] = v;
  return {{"tool", "thermolens"}, {"version", kVersion}, {"subcommand", c.subcommand},
          {"config", std::move(config)}};
}

// Writes to the --output file when one is given, otherwise to `fallback`.
class Sink {
 public:
  Sink(const std::string &path, std::ostream &fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw IoError("cannot open output file '" + path + "'");
      stream_ = &file_;
    }
  }
  std::ostream &get() { return *stream_; }
  void finish() {
    stream_->flush();
    if (!*stream_) throw IoError("write failure");
  }

 private:
  std::ofstream file_;
  std::ostream *stream_;
};

std::ifstream open_input(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open input file '" + path + "'");
  return in;
}

ParseMode parse_mode(const RunConfig &c) { return c.strict ? ParseMode::Strict : ParseMode::Lenient; }

void write_json(const RunConfig &c, io::Json payload, std::ostream &out) {
  io::Json doc;
  doc["meta"] = header_json(c);
  for (auto &[k, v] : payload.items()) doc[k] = std::move(v);
  Sink sink(c.output, out);
  sink.get() << doc.dump(2) << '\n';
  sink.finish();
}

Parsed<EditEvent> load_events(const RunConfig &c, std::ostream &err) {
  std::ifstream in = open_input(c.input);
  Parsed<EditEvent> parsed = parse_events(in, parse_mode(c));
  if (parsed.skipped > 0) err << "warning: skipped " << parsed.skipped << " malformed lines\n";
  return parsed;
}

// ---------------------------------------------------------------------------

void cmd_metrics(const RunConfig &c, std::ostream &out) {
  std::ifstream in = open_input(c.input);
  const Collection col = io::read_collection_csv(in);
  const ThermoReport report = thermo_report(col, io::parse_model(c.energy_model));
  if (c.format == "json") {
    write_json(c, io::to_json(report), out);
    return;
  }
  Sink sink(c.output, out);
  sink.get() << header_line(c) << '\n' << io::kThermoHeader << '\n' << io::thermo_csv_row(report) << '\n';
  sink.finish();
}

void cmd_fit(const RunConfig &c, std::ostream &out) {
  std::ifstream in = open_input(c.input);
  const PowerLawFit fit = classify(io::read_collection_csv(in), c.ks_threshold);
  if (c.format == "csv") {
    Sink sink(c.output, out);
    sink.get() << header_line(c) << '\n' << io::kFitHeader << '\n' << io::fit_csv_row(fit) << '\n';
    sink.finish();
    return;
  }
  write_json(c, io::to_json(fit), out);
}

void cmd_synth(const RunConfig &c, std::ostream &out) {
  const Collection col = sample(c.alpha, c.n, c.seed);
  Sink sink(c.output, out);
  sink.get() << header_line(c) << '\n';
  io::write_collection_csv(sink.get(), col);
  sink.finish();
}

void cmd_curves(const RunConfig &c, std::ostream &out) {
  const std::vector<double> grid = alpha_grid(c.alpha_min, c.alpha_max, c.step);
  const TheoryCurve efficiency = efficiency_vs_alpha_curve(grid, c.truncation, c.threads);
  {
    Sink sink(c.output, out);
    std::ostream &os = sink.get();
    os << header_line(c) << '\n';
    os << "# power law truncated to 1.." << c.truncation
       << " and renormalised; R = ln(truncation) - S; A = -ln(Z_trunc)/alpha\n";
    os << "# uniform_reference S=" << num(efficiency.uniform->entropy)
       << " Q=" << num(efficiency.uniform->efficiency)
       << " R=" << num(efficiency.uniform->entropy_reduction) << '\n';
    io::write_curve_csv(os, efficiency);
    sink.finish();
  }
  if (!c.energy_output.empty()) {
    const TheoryCurve energy = energy_curve(grid);
    Sink sink(c.energy_output, out);
    sink.get() << header_line(c) << '\n'
               << "# closed forms: E = 1/(alpha-1), A = -ln(zeta(alpha))/alpha\n";
    io::write_curve_csv(sink.get(), energy);
    sink.finish();
  }
}

void cmd_verify(const RunConfig &c, std::ostream &out) {
  const MaxEntSolution sol = max_entropy_oracle(c.target_energy, c.support_max,
                                                io::parse_model(c.energy_model), c.tol);
  io::Json payload = io::to_json(sol);
  if (c.perturbations > 0 && sol.efficiency) {
    const PerturbationCheck check = perturbation_check(sol, c.perturbations, c.seed);
    payload["perturbation"] = {{"trials", check.trials},
                               {"oracle_Q", check.oracle_efficiency},
                               {"max_perturbed_Q", check.max_perturbed_efficiency},
                               {"violations", check.violations}};
  }
  write_json(c, std::move(payload), out);
}

void cmd_evolve(const RunConfig &c, std::ostream &out, std::ostream &err) {
  const Parsed<EditEvent> parsed = load_events(c, err);
  EvolutionOptions options;
  options.model = io::parse_model(c.energy_model);
  options.ks_threshold = c.ks_threshold;
  options.class_base = c.class_base;
  options.threads = c.threads;
  const std::vector<EvolutionRow> rows =
      evolution_report(monthly_collections(parsed.records), options);
  {
    Sink sink(c.output, out);
    sink.get() << header_line(c) << '\n' << "# skipped_lines=" << parsed.skipped << '\n';
    io::write_evolution_csv(sink.get(), rows);
    sink.finish();
  }
  if (!c.classes_output.empty()) {
    Sink sink(c.classes_output, out);
    sink.get() << header_line(c) << '\n';
    io::write_class_csv(sink.get(), rows);
    sink.finish();
  }
}

void cmd_pages(const RunConfig &c, std::ostream &out, std::ostream &err) {
  const Parsed<EditEvent> parsed = load_events(c, err);
  if (parsed.records.empty()) throw DomainError("no events");
  const std::int64_t horizon = c.horizon.value_or(last_timestamp(parsed.records));
  const auto timelines = page_timelines(parsed.records);
  std::vector<PageMetrics> metrics =
      page_metrics(page_collections(parsed.records), c.ks_threshold, c.threads);
  for (PageMetrics &m : metrics) {
    m.saturated = saturation_filter(timelines.at(m.page), horizon, c.saturation);
  }
  Sink sink(c.output, out);
  sink.get() << header_line(c) << '\n'
             << "# horizon_ts=" << horizon << " skipped_lines=" << parsed.skipped << '\n';
  io::write_page_metrics_csv(sink.get(), metrics);
  sink.finish();
}

void cmd_correlate(const RunConfig &c, std::ostream &out) {
  std::ifstream pages_in = open_input(c.input);
  std::vector<PageMetrics> pages = io::read_page_metrics_csv(pages_in);
  std::size_t unsaturated = 0;
  if (!c.include_unsaturated) {
    std::erase_if(pages, [&](const PageMetrics &m) {
      const bool drop = m.saturated.has_value() && !*m.saturated;
      unsaturated += drop ? 1 : 0;
      return drop;
    });
  }
  std::ifstream readership_in = open_input(c.readership);
  const auto readership = parse_readership(readership_in, parse_mode(c));
  io::Json payload = io::to_json(correlate(pages, readership.records));
  payload["excluded_unsaturated"] = unsaturated;
  payload["skipped_readership_lines"] = readership.skipped;
  write_json(c, std::move(payload), out);
}

// ---------------------------------------------------------------------------

std::string env_name(const std::string &flag) {
  std::string name = "THERMOLENS_";
  for (const char ch : flag) {
    name += ch == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  }
  return name;
}

template <typename T>
CLI::Option *opt(CLI::App *app, const std::string &flag, T &target, const std::string &help) {
  return app->add_option("--" + flag, target, help)->envname(env_name(flag));
}

void validate(const RunConfig &c) {
  const auto fail = [](const std::string &what) { throw UsageError(what); };
  const auto &s = c.subcommand;
  if (s == "metrics" || s == "evolve" || s == "verify-theorem") {
    if (c.energy_model != "log" && c.energy_model != "logarithmic" && c.energy_model != "linear") {
      fail("--energy-model must be log or linear");
    }
  }
  if (!(c.ks_threshold >= 0.0 && c.ks_threshold <= 1.0)) fail("--ks-threshold must lie in [0, 1]");
  if (s == "synth") {
    if (!(c.alpha > kMinAlpha)) fail("--alpha must exceed 1 + 1e-6");
    if (c.n < 1) fail("--n must be >= 1");
  }
  if (s == "curves") {
    if (!(c.alpha_min > kMinAlpha)) fail("--alpha-min must exceed 1 + 1e-6");
    if (!(c.alpha_max >= c.alpha_min)) fail("--alpha-max must be >= --alpha-min");
    if (!(c.step > 0.0)) fail("--step must be positive");
    if (c.truncation < 10) fail("--truncation must be >= 10");
  }
  if (s == "verify-theorem") {
    if (c.support_max < 3) fail("--support-max must be >= 3");
    if (!(c.tol > 0.0)) fail("--tol must be positive");
    if (c.perturbations < 0) fail("--perturbations must be >= 0");
  }
  if (s == "pages") {
    if (c.saturation.min_edits < 0) fail("--min-edits must be >= 0");
    if (!(c.saturation.tail_frac > 0.0 && c.saturation.tail_frac <= 1.0)) {
      fail("--tail-frac must lie in (0, 1]");
    }
    if (!(c.saturation.growth_frac >= 0.0 && c.saturation.growth_frac <= 1.0)) {
      fail("--growth-frac must lie in [0, 1]");
    }
  }
  if (s == "evolve" && c.class_base < 2) fail("--class-base must be >= 2");
  if ((s == "metrics" && !c.format.empty() && c.format != "csv" && c.format != "json") ||
      (s == "fit" && !c.format.empty() && c.format != "csv" && c.format != "json")) {
    fail("--format must be csv or json");
  }
  if (c.threads < 1) fail("--threads must be >= 1");
}

}  // namespace

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  RunConfig c;
  CLI::App app{"Thermodynamic order and efficiency metrics for contribution logs", "thermolens"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kVersion);
  app.add_option("--threads", c.threads, "Worker threads for per-month/per-page work")
      ->envname(env_name("threads"))
      ->capture_default_str();

  const auto add_output_opt = [&](CLI::App *sub) {
    sub->add_option("-o,--output", c.output, "Output file (default: stdout)");
  };

  auto *metrics = app.add_subcommand("metrics", "Thermodynamic metrics of one collection CSV");
  metrics->add_option("input", c.input, "Collection CSV (value,count)")->required();
  opt(metrics, "energy-model", c.energy_model, "log or linear")->capture_default_str();
  opt(metrics, "format", c.format, "csv (default) or json");
  add_output_opt(metrics);

  auto *fit = app.add_subcommand("fit", "Fit and classify a discrete power law");
  fit->add_option("input", c.input, "Collection CSV (value,count)")->required();
  opt(fit, "ks-threshold", c.ks_threshold, "Power law iff D < threshold")->capture_default_str();
  opt(fit, "format", c.format, "json (default) or csv");
  add_output_opt(fit);

  auto *synth = app.add_subcommand("synth", "Seeded power-law sample as a collection CSV");
  opt(synth, "alpha", c.alpha, "Exponent (> 1)")->required();
  opt(synth, "n", c.n, "Sample size")->required();
  opt(synth, "seed", c.seed, "RNG seed")->required();
  add_output_opt(synth);

  auto *curves = app.add_subcommand("curves", "Theoretical S/Q/R and E/A curves over alpha");
  opt(curves, "alpha-min", c.alpha_min, "First exponent")->capture_default_str();
  opt(curves, "alpha-max", c.alpha_max, "Last exponent")->capture_default_str();
  opt(curves, "step", c.step, "Grid step")->capture_default_str();
  opt(curves, "truncation", c.truncation, "Support size for S/Q/R")->capture_default_str();
  opt(curves, "energy-output", c.energy_output, "Also write closed-form E/A curve here");
  add_output_opt(curves);

  auto *verify = app.add_subcommand("verify-theorem", "Constrained max-entropy oracle report");
  opt(verify, "energy-model", c.energy_model, "log or linear")->capture_default_str();
  opt(verify, "support-max", c.support_max, "Support 1..V")->capture_default_str();
  opt(verify, "target-energy", c.target_energy, "Average energy constraint")->capture_default_str();
  opt(verify, "tol", c.tol, "Bisection tolerance on lambda")->capture_default_str();
  opt(verify, "perturbations", c.perturbations, "Random feasible perturbations")->capture_default_str();
  opt(verify, "seed", c.seed, "Perturbation RNG seed")->capture_default_str();
  add_output_opt(verify);

  auto *evolve = app.add_subcommand("evolve", "Monthly evolution series from an event log");
  evolve->add_option("input", c.input, "Events CSV (ts,editor,page)")->required();
  opt(evolve, "energy-model", c.energy_model, "log or linear")->capture_default_str();
  opt(evolve, "ks-threshold", c.ks_threshold, "Power law iff D < threshold")->capture_default_str();
  opt(evolve, "class-base", c.class_base, "Base of logarithmic classes")->capture_default_str();
  opt(evolve, "classes-output", c.classes_output, "Per-month class table CSV");
  evolve->add_flag("--strict", c.strict, "Fail on the first malformed line")->envname(env_name("strict"));
  add_output_opt(evolve);

  auto *pages = app.add_subcommand("pages", "Per-page metrics with saturation and power-law flags");
  pages->add_option("input", c.input, "Events CSV (ts,editor,page)")->required();
  opt(pages, "ks-threshold", c.ks_threshold, "Power law iff D < threshold")->capture_default_str();
  opt(pages, "min-edits", c.saturation.min_edits, "Saturation: minimum edits")->capture_default_str();
  opt(pages, "tail-frac", c.saturation.tail_frac, "Saturation: trailing time fraction")->capture_default_str();
  opt(pages, "growth-frac", c.saturation.growth_frac, "Saturation: allowed growth")->capture_default_str();
  opt(pages, "horizon", c.horizon, "Analysis end (epoch s; default: last event)");
  pages->add_flag("--strict", c.strict, "Fail on the first malformed line")->envname(env_name("strict"));
  add_output_opt(pages);

  auto *corr = app.add_subcommand("correlate", "Readership correlation report from page metrics");
  corr->add_option("input", c.input, "Page metrics CSV from `pages`")->required();
  opt(corr, "readership", c.readership, "Readership CSV (page,clicks)")->required();
  corr->add_flag("--include-unsaturated", c.include_unsaturated, "Keep pages flagged unsaturated");
  corr->add_flag("--strict", c.strict, "Fail on the first malformed line")->envname(env_name("strict"));
  add_output_opt(corr);

  std::vector<const char *> argv{"thermolens"};
  for (const std::string &a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion &) {
    out << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError &e) {
    err << "error: usage: " << e.what() << '\n';
    return 2;
  }

  for (CLI::App *sub : app.get_subcommands()) c.subcommand = sub->get_name();

  try {
    validate(c);
    const auto &s = c.subcommand;
    if (s == "metrics") cmd_metrics(c, out);
    else if (s == "fit") cmd_fit(c, out);
    else if (s == "synth") cmd_synth(c, out);
    else if (s == "curves") cmd_curves(c, out);
    else if (s == "verify-theorem") cmd_verify(c, out);
    else if (s == "evolve") cmd_evolve(c, out, err);
    else if (s == "pages") cmd_pages(c, out, err);
    else if (s == "correlate") cmd_correlate(c, out);
  } catch (const UsageError &e) {
    err << "error: usage: " << e.what() << '\n';
    return 2;
  } catch (const Error &e) {
    err << "error: " << e.kind() << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception &e) {
    err << "error: internal: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace thermolens
