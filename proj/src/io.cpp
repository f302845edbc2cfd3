#include "thermolens/io.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <vector>

#include "thermolens/error.hpp"

namespace thermolens::io {
namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (std::size_t pos; (pos = line.find(',', start)) != std::string_view::npos; start = pos + 1) {
    fields.push_back(line.substr(start, pos - start));
  }
  fields.push_back(line.substr(start));
  return fields;
}

template <typename T>
T parse_field(std::string_view s, std::size_t line_no) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError("line " + std::to_string(line_no) + ": bad number '" + std::string(s) + "'");
  }
  return v;
}

std::optional<double> parse_optional(std::string_view s, std::size_t line_no) {
  if (s.empty()) return std::nullopt;
  return parse_field<double>(s, line_no);
}

bool parse_flag(std::string_view s, std::size_t line_no) {
  if (s == "1" || s == "true") return true;
  if (s == "0" || s == "false") return false;
  throw ParseError("line " + std::to_string(line_no) + ": bad flag '" + std::string(s) + "'");
}

// Calls fn(fields, line_no) for every data row after the expected header.
template <typename Fn>
void for_each_row(std::istream &in, std::string_view header, std::size_t width, Fn fn) {
  if (!in) throw IoError("unreadable input stream");
  std::string line;
  std::size_t line_no = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!seen_header) {
      if (line != header) {
        throw ParseError("line " + std::to_string(line_no) + ": expected header '" +
                         std::string(header) + "'");
      }
      seen_header = true;
      continue;
    }
    const auto fields = split(line);
    if (fields.size() != width) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                       " fields");
    }
    fn(fields, line_no);
  }
  if (in.bad()) throw IoError("read failure");
  if (!seen_header) throw ParseError("missing header '" + std::string(header) + "'");
}

Json optional_json(const std::optional<double> &x) {
  return x ? Json(*x) : Json(nullptr);
}

}  // namespace

std::string format_number(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::string format_number(const std::optional<double> &x) {
  return x ? format_number(*x) : std::string();
}

const char *model_name(EnergyModel model) {
  return model == EnergyModel::Logarithmic ? "log" : "linear";
}

EnergyModel parse_model(std::string_view name) {
  if (name == "log" || name == "logarithmic") return EnergyModel::Logarithmic;
  if (name == "linear") return EnergyModel::Linear;
  throw DomainError("unknown energy model '" + std::string(name) + "'");
}

void write_collection_csv(std::ostream &out, const Collection &c) {
  out << kCollectionHeader << '\n';
  for (const Bin &b : c.bins()) out << b.value << ',' << b.count << '\n';
}

Collection read_collection_csv(std::istream &in) {
  std::vector<Bin> bins;
  for_each_row(in, kCollectionHeader, 2, [&](const auto &f, std::size_t line_no) {
    const auto value = parse_field<Value>(f[0], line_no);
    const auto count = parse_field<Count>(f[1], line_no);
    if (value < 1 || count < 1) {
      throw ParseError("line " + std::to_string(line_no) + ": value and count must be >= 1");
    }
    bins.push_back({value, count});
  });
  return Collection::from_bins(std::move(bins));
}

std::string thermo_csv_row(const ThermoReport &r) {
  return std::to_string(r.population) + ',' + format_number(r.entropy) + ',' +
         format_number(r.entropy_reduction) + ',' + format_number(r.avg_energy) + ',' +
         format_number(r.efficiency) + ',' + format_number(r.alpha) + ',' +
         format_number(r.free_energy) + ',' + format_number(r.fe_ratio);
}

Json to_json(const ThermoReport &r) {
  Json j;
  j["N"] = r.population;
  j["S"] = r.entropy;
  j["R"] = r.entropy_reduction;
  j["E"] = r.avg_energy;
  j["Q"] = optional_json(r.efficiency);
  j["alpha"] = optional_json(r.alpha);
  j["A"] = optional_json(r.free_energy);
  j["fe_ratio"] = optional_json(r.fe_ratio);
  j["kT"] = optional_json(r.temperature());
  j["energy_model"] = model_name(r.model);
  j["routes"] = {{"S", "empirical"},      {"R", "empirical"},
                 {"E", "empirical"},      {"Q", "empirical"},
                 {"alpha", kEstimatorName}, {"A", "closed-form at fitted alpha"},
                 {"fe_ratio", "empirical Q / fitted alpha"}};
  return j;
}

std::string fit_csv_row(const PowerLawFit &f) {
  return format_number(f.alpha) + ',' + std::to_string(f.v_min) + ',' +
         format_number(f.zeta_value) + ',' + format_number(f.ks_stat) + ',' +
         (f.is_power_law ? "1" : "0");
}

Json to_json(const PowerLawFit &f) {
  Json j;
  j["alpha"] = f.alpha;
  j["v_min"] = f.v_min;
  j["zeta"] = f.zeta_value;
  j["D"] = f.ks_stat;
  j["is_power_law"] = f.is_power_law;
  j["threshold"] = f.threshold;
  j["estimator"] = kEstimatorName;
  return j;
}

void write_curve_csv(std::ostream &out, const TheoryCurve &curve) {
  out << kCurveHeader << '\n';
  for (const TheoryPoint &p : curve.points) {
    out << format_number(p.alpha) << ',' << format_number(p.entropy) << ','
        << format_number(p.efficiency) << ',' << format_number(p.entropy_reduction) << ','
        << format_number(p.energy) << ',' << format_number(p.free_energy) << '\n';
  }
}

void write_evolution_csv(std::ostream &out, std::span<const EvolutionRow> rows) {
  out << kEvolutionHeader << '\n';
  for (const EvolutionRow &row : rows) {
    const ThermoReport &r = row.report;
    out << row.month.to_string() << ',' << r.population << ',' << format_number(r.entropy) << ','
        << format_number(r.entropy_reduction) << ',' << format_number(r.log_population()) << ','
        << format_number(r.avg_energy) << ',' << format_number(r.efficiency) << ','
        << format_number(r.alpha) << ',' << format_number(r.free_energy) << ','
        << format_number(r.fe_ratio) << '\n';
  }
}

void write_class_csv(std::ostream &out, std::span<const EvolutionRow> rows) {
  out << kClassHeader << '\n';
  for (const EvolutionRow &row : rows) {
    for (const ClassRow &c : row.classes.classes) {
      out << row.month.to_string() << ',' << c.index << ',' << c.population << ',' << c.mass
          << '\n';
    }
  }
}

void write_page_metrics_csv(std::ostream &out, std::span<const PageMetrics> pages) {
  out << kPageMetricsHeader << '\n';
  for (const PageMetrics &m : pages) {
    out << m.page << ',' << m.editors << ',' << format_number(m.entropy) << ','
        << format_number(m.entropy_reduction) << ',' << format_number(m.efficiency) << ','
        << format_number(m.total_energy) << ',' << m.total_edits << ','
        << format_number(m.alpha) << ',' << format_number(m.ks_stat) << ','
        << (m.is_power_law ? '1' : '0') << ',';
    if (m.saturated) out << (*m.saturated ? '1' : '0');
    out << '\n';
  }
}

std::vector<PageMetrics> read_page_metrics_csv(std::istream &in) {
  std::vector<PageMetrics> pages;
  for_each_row(in, kPageMetricsHeader, 11, [&](const auto &f, std::size_t line_no) {
    PageMetrics m;
    if (f[0].empty()) throw ParseError("line " + std::to_string(line_no) + ": empty page");
    m.page = std::string(f[0]);
    m.editors = parse_field<Count>(f[1], line_no);
    m.entropy = parse_field<double>(f[2], line_no);
    m.entropy_reduction = parse_field<double>(f[3], line_no);
    m.efficiency = parse_optional(f[4], line_no);
    m.total_energy = parse_field<double>(f[5], line_no);
    m.total_edits = parse_field<std::int64_t>(f[6], line_no);
    m.alpha = parse_optional(f[7], line_no);
    m.ks_stat = parse_optional(f[8], line_no);
    m.is_power_law = parse_flag(f[9], line_no);
    if (!f[10].empty()) m.saturated = parse_flag(f[10], line_no);
    pages.push_back(std::move(m));
  });
  return pages;
}

namespace {

Json to_json(const MetricCorrelations &c) {
  Json j;
  j["S"] = optional_json(c.entropy);
  j["R"] = optional_json(c.entropy_reduction);
  j["Q"] = optional_json(c.efficiency);
  j["total_energy"] = optional_json(c.total_energy);
  j["total_edits"] = optional_json(c.total_edits);
  return j;
}

Json to_json(const GroupReport &g) {
  Json j;
  j["size"] = g.size;
  Json readership = to_json(g.vs_readership);
  readership["editors"] = optional_json(g.vs_readership.editors);
  j["rho_readership"] = std::move(readership);
  j["rho_editors"] = to_json(g.vs_editors);
  j["readership_median"] = optional_json(g.readership_median);
  j["readership_mean"] = optional_json(g.readership_mean);
  j["edits_median"] = optional_json(g.edits_median);
  j["edits_mean"] = optional_json(g.edits_mean);
  return j;
}

}  // namespace

Json to_json(const CorrelationReport &r) {
  Json j;
  j["analyzed"] = r.analyzed;
  j["dropped_pages"] = r.dropped_pages;
  j["unmatched_readership"] = r.unmatched_readership;
  j["groups"] = {{"power_law", to_json(r.power_law)},
                 {"non_power_law", to_json(r.non_power_law)},
                 {"all", to_json(r.all)}};
  return j;
}

Json to_json(const MaxEntSolution &s) {
  Json j;
  j["energy_model"] = model_name(s.model);
  j["support_max"] = s.support_max;
  j["target_energy"] = s.target_energy;
  j["lambda"] = s.lambda;
  j["log_partition"] = s.log_partition;
  j["S"] = s.entropy;
  j["E"] = s.energy;
  j["Q"] = optional_json(s.efficiency);
  j["stationarity_residual"] = s.stationarity_residual;
  j["exponent_gap"] = optional_json(s.exponent_gap);
  j["underflowed"] = s.underflowed;
  j["iterations"] = s.iterations;
  return j;
}

}  // namespace thermolens::io
