#include "skr/emit.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "skr/errors.hpp"

namespace skr {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

double parse_double(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw InvalidArgument("not a number: '" + s + "'");
  return v;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

}  // namespace

void write_text_file(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
  std::ofstream out(p, std::ios::binary);
  if (!out) throw InvalidArgument("cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw InvalidArgument("write to '" + path + "' failed");
}

std::string spectrum_csv(const Spectrum& s) {
  std::ostringstream os;
  os << "k,mu_k,log_mu_k,N,log_N\n";
  for (const auto& l : s.levels) {
    os << l.k << ',' << format_double(l.mu) << ',' << format_double(l.log_mu) << ','
       << l.multiplicity.decimal() << ',' << format_double(l.multiplicity.log_value) << '\n';
  }
  return os.str();
}

std::string risk_table_csv(const RiskTable& table) {
  std::ostringstream os;
  os << "n,d,trial,C,t_used,risk_regression,risk_interpolation,error\n";
  for (const auto& r : table.rows) {
    os << r.n << ',' << r.d << ',' << r.trial << ',' << format_double(r.c) << ','
       << format_double(r.t_used) << ',' << format_double(r.risk_regression) << ','
       << format_double(r.risk_interpolation) << ',' << csv_field(r.error) << '\n';
  }
  return os.str();
}

std::vector<RiskRow> parse_risk_table_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "n,d,trial,C,t_used,risk_regression,risk_interpolation,error")
    throw InvalidArgument("risk table CSV: unexpected header");
  std::vector<RiskRow> rows;
  std::vector<double> cs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 8) throw InvalidArgument("risk table CSV: expected 8 fields in '" + line + "'");
    RiskRow r;
    r.n = std::stoi(f[0]);
    r.d = std::stoi(f[1]);
    r.trial = std::stoi(f[2]);
    r.c = parse_double(f[3]);
    r.t_used = parse_double(f[4]);
    r.risk_regression = parse_double(f[5]);
    r.risk_interpolation = parse_double(f[6]);
    r.error = f[7];
    auto it = std::find(cs.begin(), cs.end(), r.c);
    if (it == cs.end()) it = cs.insert(cs.end(), r.c);
    r.c_index = static_cast<int>(it - cs.begin());
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string risk_summary_json(const RiskTable& t) {
  nlohmann::ordered_json j;
  j["gamma"] = t.gamma;
  j["best_C"] = t.best_c;
  j["r_regression"] = t.r_regression;
  j["r_interpolation"] = t.r_interpolation;
  j["theoretical_exponent"] = t.theoretical_exponent;
  j["failed_trials"] = t.failed_trials;
  nlohmann::ordered_json fits = nlohmann::ordered_json::array();
  for (const auto& f : t.regression_fits) {
    fits.push_back({{"C", f.c}, {"r", f.fit.r}, {"b", f.fit.b}, {"n", f.n}, {"mean_risk", f.mean_risk}});
  }
  j["regression_fits"] = fits;
  j["interpolation_fit"] = {{"r", t.interpolation_fit.fit.r},
                            {"b", t.interpolation_fit.fit.b},
                            {"n", t.interpolation_fit.n},
                            {"mean_risk", t.interpolation_fit.mean_risk}};
  return j.dump(2) + "\n";
}

std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<SvgSeries>& series,
                           bool log_axes, double width, double height) {
  const double ml = 70, mr = 150, mt = 40, mb = 55;
  const auto tx = [&](double v) { return log_axes ? std::log10(v) : v; };
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(tx(s.x[i])) || !std::isfinite(tx(s.y[i]))) continue;
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, tx(s.y[i]));
      y1 = std::max(y1, tx(s.y[i]));
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  const double pw = width - ml - mr, ph = height - mt - mb;
  const auto px = [&](double v) { return ml + (tx(v) - x0) / (x1 - x0) * pw; };
  const auto py = [&](double v) { return mt + ph - (tx(v) - y0) / (y1 - y0) * ph; };

  std::ostringstream os;
  os.precision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
     << xml_escape(title) << "</text>\n";
  os << "<line class=\"axis\" x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw << "\" y2=\""
     << mt + ph << "\" stroke=\"black\"/>\n";
  os << "<line class=\"axis\" x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + ph
     << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4.0, fy = y0 + (y1 - y0) * i / 4.0;
    const double vx = log_axes ? std::pow(10.0, fx) : fx, vy = log_axes ? std::pow(10.0, fy) : fy;
    os << "<text x=\"" << px(vx) << "\" y=\"" << mt + ph + 16 << "\" text-anchor=\"middle\" font-size=\"10\">"
       << vx << "</text>\n";
    os << "<text x=\"" << ml - 6 << "\" y=\"" << py(vy) + 3 << "\" text-anchor=\"end\" font-size=\"10\">" << vy
       << "</text>\n";
  }
  os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
     << xml_escape(x_label) << "</text>\n";
  os << "<text x=\"16\" y=\"" << mt + ph / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
     << mt + ph / 2 << ")\">" << xml_escape(y_label) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % (sizeof kPalette / sizeof *kPalette)];
    os << "<polyline data-series=\"" << xml_escape(s.name) << "\" fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"1.5\"";
    if (s.dashed) os << " stroke-dasharray=\"6 4\"";
    if (!s.extra_attributes.empty()) os << ' ' << s.extra_attributes;
    os << " points=\"";
    bool first = true;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(tx(s.x[i])) || !std::isfinite(tx(s.y[i]))) continue;
      os << (first ? "" : " ") << px(s.x[i]) << ',' << py(s.y[i]);
      first = false;
    }
    os << "\"/>\n";
    const double ly = mt + 14.0 * static_cast<double>(k);
    os << "<text x=\"" << ml + pw + 10 << "\" y=\"" << ly + 4 << "\" font-size=\"10\" fill=\"" << color << "\">"
       << xml_escape(s.name) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string risk_svg(const RiskTable& t) {
  std::vector<SvgSeries> series;
  for (const auto& f : t.regression_fits) {
    SvgSeries s;
    s.name = "regression C=" + format_double(f.c);
    s.x.assign(f.n.begin(), f.n.end());
    s.y = f.mean_risk;
    series.push_back(std::move(s));
  }
  SvgSeries in;
  in.name = "interpolation";
  in.x.assign(t.interpolation_fit.n.begin(), t.interpolation_fit.n.end());
  in.y = t.interpolation_fit.mean_risk;
  series.push_back(in);

  const CurveFit& best = t.best_regression_fit();
  if (!best.n.empty()) {
    SvgSeries th;
    th.name = "theory n^-" + format_double(t.theoretical_exponent);
    th.dashed = true;
    th.extra_attributes = "data-exponent=\"" + format_double(t.theoretical_exponent) + "\"";
    const double n0 = best.n.front(), r0 = best.mean_risk.front();
    for (int n : best.n) {
      th.x.push_back(n);
      th.y.push_back(r0 * std::pow(n / n0, -t.theoretical_exponent));
    }
    series.push_back(std::move(th));
  }
  return svg_line_chart("excess risk, gamma = " + format_double(t.gamma), "n", "mean excess risk", series, true);
}

std::string rate_table_csv(const RateTable& table) {
  std::ostringstream os;
  os << "family,gamma,p,n_exponent,d_exponent,log_factor,match_status\n";
  for (const auto& r : table.points) {
    os << to_string(r.family) << ',' << format_double(r.gamma) << ',' << r.p << ','
       << format_double(r.n_exponent) << ',' << format_double(r.d_exponent) << ','
       << (r.log_factor ? "true" : "false") << ',' << to_string(r.match_status) << '\n';
  }
  return os.str();
}

std::string rate_svg(const RateTable& table) {
  std::vector<SvgSeries> n_panel, d_panel;
  for (RateFamily f : {RateFamily::Inner, RateFamily::Ntk, RateFamily::Interpolation}) {
    SvgSeries sn, sd;
    sn.name = sd.name = std::string(to_string(f));
    for (const auto& r : table.points) {
      if (r.family != f) continue;
      sn.x.push_back(r.gamma);
      sn.y.push_back(r.n_exponent);
      sd.x.push_back(r.gamma);
      sd.y.push_back(r.d_exponent);
    }
    if (sn.x.empty()) continue;
    n_panel.push_back(std::move(sn));
    d_panel.push_back(std::move(sd));
  }
  const std::string a = svg_line_chart("rate exponent in n", "gamma", "n exponent", n_panel, false);
  const std::string b = svg_line_chart("rate exponent in d", "gamma", "d exponent", d_panel, false);
  // nest both panels in one document
  const auto body = [](const std::string& s) {
    const auto start = s.find('>') + 1;
    const auto stop = s.rfind("</svg>");
    return s.substr(start, stop - start);
  };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"1280\" height=\"420\" viewBox=\"0 0 1280 420\">\n"
     << "<g class=\"panel\">" << body(a) << "</g>\n"
     << "<g class=\"panel\" transform=\"translate(640 0)\">" << body(b) << "</g>\n"
     << "</svg>\n";
  return os.str();
}

}  // namespace skr
