#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "corrint/cli/csv.hpp"

namespace corrint::cli {

struct PlotError : Error {
  using Error::Error;
};

namespace svg_detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string escape(const std::string& s) {
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

inline bool is_se_column(const std::string& name) {
  const auto br = name.find('[');
  const std::string head = name.substr(0, br);
  return head.size() >= 3 && head.compare(head.size() - 3, 3, "_se") == 0;
}

inline std::string se_column_for(const std::string& name) {
  const auto br = name.find('[');
  if (br == std::string::npos) return name + "_se";
  return name.substr(0, br) + "_se" + name.substr(br);
}

inline std::vector<double> nice_ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  std::vector<double> t;
  for (double v = std::ceil(lo / step - 1e-9) * step; v <= hi + 1e-9 * span; v += step) {
    t.push_back(std::fabs(v) < 1e-12 * step ? 0.0 : v);
  }
  return t;
}

struct Series {
  std::string name;
  std::vector<double> y, se;  // nan where missing
};

}  // namespace svg_detail

/// Renders a line chart of every value column against the first column.
/// The output depends only on the input bytes.
inline std::string render_plot(const std::string& csv_text) {
  using namespace svg_detail;
  const Table t = parse_csv(csv_text);
  if (t.columns.size() < 2) throw PlotError("CSV has no series columns");
  if (t.rows.empty()) throw PlotError("CSV has no data rows");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto num = [&](const std::string& c) {
    auto v = cell_value(c);
    return v && std::isfinite(*v) ? *v : nan;
  };

  std::vector<double> x;
  for (const auto& r : t.rows) x.push_back(num(r[0]));
  std::vector<Series> series;
  for (std::size_t c = 1; c < t.columns.size(); ++c) {
    if (is_se_column(t.columns[c])) continue;
    Series s{t.columns[c], {}, {}};
    const std::string se_name = se_column_for(t.columns[c]);
    std::size_t se_col = 0;
    for (std::size_t k = 1; k < t.columns.size(); ++k)
      if (t.columns[k] == se_name) se_col = k;
    for (const auto& r : t.rows) {
      s.y.push_back(num(r[c]));
      s.se.push_back(se_col ? num(r[se_col]) : nan);
    }
    series.push_back(std::move(s));
  }

  double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
  std::size_t points = 0;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (std::isnan(x[i]) || std::isnan(s.y[i])) continue;
      ++points;
      xlo = std::min(xlo, x[i]);
      xhi = std::max(xhi, x[i]);
      const double e = std::isnan(s.se[i]) ? 0.0 : s.se[i];
      ylo = std::min(ylo, s.y[i] - e);
      yhi = std::max(yhi, s.y[i] + e);
    }
  }
  if (points == 0) throw PlotError("CSV has no finite data points");

  bool log_y = true;
  double pos_lo = INFINITY;
  for (const auto& s : series)
    for (double v : s.y)
      if (!std::isnan(v)) {
        if (v <= 0) log_y = false;
        pos_lo = std::min(pos_lo, v);
      }
  if (log_y) log_y = yhi / pos_lo >= 50.0;
  if (log_y) ylo = std::max(ylo, pos_lo / 2.0);
  if (xhi == xlo) {
    xlo -= 0.5;
    xhi += 0.5;
  }
  if (yhi == ylo) {
    ylo -= log_y ? ylo / 2 : 0.5;
    yhi += log_y ? yhi : 0.5;
  }

  const double W = 720, H = 440, L = 70, R = 230, T = 40, B = 50;
  const double pw = W - L - R, ph = H - T - B;
  auto fy = [&](double v) { return log_y ? std::log10(v) : v; };
  const double y0 = fy(ylo), y1 = fy(yhi);
  auto px = [&](double v) { return L + (v - xlo) / (xhi - xlo) * pw; };
  auto py = [&](double v) { return T + ph - (fy(v) - y0) / (y1 - y0) * ph; };

  std::string title;
  try {
    const auto j = nlohmann::json::parse(t.params_json);
    if (j.is_object() && j.contains("name") && j["name"].is_string()) title = j["name"].get<std::string>();
  } catch (const nlohmann::json::exception&) {
  }

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
    << " " << H << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty()) o << "<text x=\"" << fmt(L) << "\" y=\"22\" font-size=\"14\">" << escape(title) << "</text>\n";
  o << "<rect class=\"frame\" x=\"" << fmt(L) << "\" y=\"" << fmt(T) << "\" width=\"" << fmt(pw) << "\" height=\""
    << fmt(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (double v : nice_ticks(xlo, xhi)) {
    o << "<line x1=\"" << fmt(px(v)) << "\" y1=\"" << fmt(T + ph) << "\" x2=\"" << fmt(px(v)) << "\" y2=\""
      << fmt(T + ph + 5) << "\" stroke=\"black\"/>";
    o << "<text x=\"" << fmt(px(v)) << "\" y=\"" << fmt(T + ph + 18) << "\" text-anchor=\"middle\">"
      << format_number(v) << "</text>\n";
  }
  std::vector<double> yt;
  if (log_y) {
    for (double e = std::ceil(y0 - 1e-9); e <= y1 + 1e-9; e += 1.0) yt.push_back(std::pow(10.0, e));
    if (yt.size() < 2) yt = {ylo, yhi};
  } else {
    yt = nice_ticks(ylo, yhi);
  }
  for (double v : yt) {
    o << "<line x1=\"" << fmt(L - 5) << "\" y1=\"" << fmt(py(v)) << "\" x2=\"" << fmt(L) << "\" y2=\""
      << fmt(py(v)) << "\" stroke=\"black\"/>";
    o << "<text x=\"" << fmt(L - 8) << "\" y=\"" << fmt(py(v) + 4) << "\" text-anchor=\"end\">" << format_number(v)
      << "</text>\n";
  }
  o << "<text x=\"" << fmt(L + pw / 2) << "\" y=\"" << fmt(H - 12) << "\" text-anchor=\"middle\">"
    << escape(t.columns[0]) << "</text>\n";
  o << "<text x=\"16\" y=\"" << fmt(T + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << fmt(T + ph / 2) << ")\">" << (log_y ? "value (log scale)" : "value") << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const Series& s = series[si];
    const char* color = palette[si % 10];
    // Missing cells split the line into segments.
    std::vector<std::string> segments;
    std::string cur;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const bool ok = !std::isnan(x[i]) && !std::isnan(s.y[i]) && (!log_y || s.y[i] > 0);
      if (!ok) {
        if (!cur.empty()) segments.push_back(cur);
        cur.clear();
        continue;
      }
      cur += (cur.empty() ? "" : " ") + fmt(px(x[i])) + "," + fmt(py(s.y[i]));
    }
    if (!cur.empty()) segments.push_back(cur);
    o << "<g class=\"series\" data-name=\"" << escape(s.name) << "\">\n";
    for (const auto& seg : segments) {
      o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << seg << "\"/>\n";
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (std::isnan(x[i]) || std::isnan(s.y[i]) || (log_y && s.y[i] <= 0)) continue;
      o << "<circle cx=\"" << fmt(px(x[i])) << "\" cy=\"" << fmt(py(s.y[i])) << "\" r=\"2.5\" fill=\"" << color
        << "\"/>\n";
      if (std::isnan(s.se[i]) || s.se[i] <= 0) continue;
      const double lo = log_y ? std::max(s.y[i] - s.se[i], ylo) : s.y[i] - s.se[i];
      const double hi = s.y[i] + s.se[i];
      const double cx = px(x[i]);
      o << "<path class=\"errbar\" stroke=\"" << color << "\" d=\"M" << fmt(cx) << " " << fmt(py(lo)) << " V"
        << fmt(py(hi)) << " M" << fmt(cx - 3) << " " << fmt(py(lo)) << " H" << fmt(cx + 3) << " M" << fmt(cx - 3)
        << " " << fmt(py(hi)) << " H" << fmt(cx + 3) << "\"/>\n";
    }
    o << "</g>\n";
    const double ly = T + 8 + 16 * si;
    o << "<line x1=\"" << fmt(L + pw + 12) << "\" y1=\"" << fmt(ly) << "\" x2=\"" << fmt(L + pw + 30) << "\" y2=\""
      << fmt(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>";
    o << "<text x=\"" << fmt(L + pw + 35) << "\" y=\"" << fmt(ly + 4) << "\">" << escape(s.name) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

inline void render_plot_file(const std::filesystem::path& csv_path, const std::filesystem::path& out_svg) {
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw PlotError("cannot read '" + csv_path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string svg = render_plot(buf.str());
  std::ofstream out(out_svg, std::ios::binary);
  if (!out) throw PlotError("cannot write '" + out_svg.string() + "'");
  out << svg;
}

}  // namespace corrint::cli
