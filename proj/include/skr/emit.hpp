#pragma once

#include <string>
#include <vector>

#include "skr/entropy_rates.hpp"
#include "skr/harness.hpp"
#include "skr/spectrum.hpp"

namespace skr {

/// Shortest decimal that parses back to the same double; "nan"/"inf"/"-inf" otherwise.
std::string format_double(double x);

/// Writes `content` to `path`, creating parent directories. Throws InvalidArgument
/// naming the path on failure.
void write_text_file(const std::string& path, const std::string& content);

std::string spectrum_csv(const Spectrum& spectrum);

/// Header n,d,trial,C,t_used,risk_regression,risk_interpolation,error.
std::string risk_table_csv(const RiskTable& table);
std::vector<RiskRow> parse_risk_table_csv(const std::string& text);
/// {gamma, best_C, r_regression, r_interpolation, theoretical_exponent, ...}.
std::string risk_summary_json(const RiskTable& table);
/// Log-log mean risk against n, one polyline per C plus interpolation, and the
/// theoretical slope drawn dashed.
std::string risk_svg(const RiskTable& table);

std::string rate_table_csv(const RateTable& table);
/// Two panels: n-exponent and d-exponent against gamma, one polyline per family.
std::string rate_svg(const RateTable& table);

struct SvgSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
  std::string extra_attributes;
};

/// A single line chart with axes, tick labels and a legend.
std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<SvgSeries>& series,
                           bool log_axes, double width = 640, double height = 420);

}  // namespace skr
