#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>

#include <json.hpp>

#include "thermolens/analytics.hpp"
#include "thermolens/collection.hpp"
#include "thermolens/powerlaw.hpp"
#include "thermolens/structure.hpp"
#include "thermolens/thermo.hpp"

namespace thermolens::io {

using Json = nlohmann::ordered_json;

inline constexpr const char *kCollectionHeader = "value,count";
inline constexpr const char *kThermoHeader = "N,S,R,E,Q,alpha,A,fe_ratio";
inline constexpr const char *kFitHeader = "alpha,v_min,zeta,D,is_power_law";
inline constexpr const char *kCurveHeader = "alpha,S,Q,R,E,A";
inline constexpr const char *kEvolutionHeader = "month,N,S,R,logN,E,Q,alpha,A,fe_ratio";
inline constexpr const char *kClassHeader = "month,class,editors,edits";
inline constexpr const char *kPageMetricsHeader =
    "page,N,S,R,Q,total_energy,total_edits,alpha,D,is_power_law,saturated";

// Shortest decimal text that round-trips to the same double.
std::string format_number(double x);
// Empty string for an absent value.
std::string format_number(const std::optional<double> &x);

const char *model_name(EnergyModel model);
EnergyModel parse_model(std::string_view name);

void write_collection_csv(std::ostream &out, const Collection &c);
// Lines starting with '#' are skipped. Any malformed row raises ParseError.
Collection read_collection_csv(std::istream &in);

std::string thermo_csv_row(const ThermoReport &r);
Json to_json(const ThermoReport &r);

std::string fit_csv_row(const PowerLawFit &f);
Json to_json(const PowerLawFit &f);

void write_curve_csv(std::ostream &out, const TheoryCurve &curve);

void write_evolution_csv(std::ostream &out, std::span<const EvolutionRow> rows);
void write_class_csv(std::ostream &out, std::span<const EvolutionRow> rows);

void write_page_metrics_csv(std::ostream &out, std::span<const PageMetrics> pages);
std::vector<PageMetrics> read_page_metrics_csv(std::istream &in);

Json to_json(const CorrelationReport &r);
Json to_json(const MaxEntSolution &s);

}  // namespace thermolens::io
