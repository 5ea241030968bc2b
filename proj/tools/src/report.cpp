#include "hjqp/cli/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "hjqp/cli/config.hpp"
#include "hjqp/errors.hpp"

namespace hjqp::cli {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) out += (i ? "," : "") + csv_field(fields[i]);
  return out + "\r\n";
}

void CsvTable::add(std::vector<std::string> row) {
  if (row.size() != header_.size()) fail(ErrorKind::config, "CSV row width differs from the header");
  rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
  std::string out = csv_row(header_);
  for (const auto& r : rows_) out += csv_row(r);
  return out;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        field += ch;
      }
      continue;
    }
    if (ch == '"') {
      quoted = true;
      any = true;
    } else if (ch == ',') {
      row.push_back(field);
      field.clear();
      any = true;
    } else if (ch == '\r' || ch == '\n') {
      if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      row.push_back(field);
      rows.push_back(row);
      row.clear();
      field.clear();
      any = false;
    } else {
      field += ch;
      any = true;
    }
  }
  if (any || !field.empty()) {
    row.push_back(field);
    rows.push_back(row);
  }
  return rows;
}

namespace {

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

}  // namespace

std::string render_svg(const PlotSpec& plot) {
  constexpr double W = 640, H = 420, L = 70, R = 160, T = 40, B = 50;
  auto tx = [&](double v) { return plot.log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return plot.log_y ? std::log10(v) : v; };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : plot.series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if ((plot.log_x && !(s.x[i] > 0.0)) || (plot.log_y && !(s.y[i] > 0.0))) continue;
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  const double pw = W - L - R, ph = H - T - B;
  auto px = [&](double v) { return L + (tx(v) - x0) / (x1 - x0) * pw; };
  auto py = [&](double v) { return T + ph - (ty(v) - y0) / (y1 - y0) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
    << " " << H << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape_xml(plot.title)
    << "</text>\n";
  o << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4.0, fy = y0 + (y1 - y0) * i / 4.0;
    const double gx = L + pw * i / 4.0, gy = T + ph - ph * i / 4.0;
    o << "<line x1=\"" << num(gx) << "\" y1=\"" << T + ph << "\" x2=\"" << num(gx) << "\" y2=\"" << T + ph + 5
      << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << num(gx) << "\" y=\"" << T + ph + 18 << "\" text-anchor=\"middle\">"
      << tick_label(plot.log_x ? std::pow(10.0, fx) : fx) << "</text>\n";
    o << "<line x1=\"" << L - 5 << "\" y1=\"" << num(gy) << "\" x2=\"" << L << "\" y2=\"" << num(gy)
      << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << L - 8 << "\" y=\"" << num(gy + 4) << "\" text-anchor=\"end\">"
      << tick_label(plot.log_y ? std::pow(10.0, fy) : fy) << "</text>\n";
  }
  o << "<text x=\"" << L + pw / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">" << escape_xml(plot.x_label)
    << "</text>\n";
  o << "<text x=\"16\" y=\"" << T + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << T + ph / 2
    << ")\">" << escape_xml(plot.y_label) << "</text>\n";
  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const auto& s = plot.series[k];
    const char* color = kColors[k % 6];
    std::string pts;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if ((plot.log_x && !(s.x[i] > 0.0)) || (plot.log_y && !(s.y[i] > 0.0))) continue;
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      pts += num(px(s.x[i])) + "," + num(py(s.y[i])) + " ";
      if (!s.line)
        o << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i])) << "\" r=\"3\" fill=\"" << color
          << "\"/>\n";
    }
    if (s.line && !pts.empty())
      o << "<polyline points=\"" << pts << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
    const double ly = T + 14 + 16.0 * double(k);
    o << "<rect x=\"" << L + pw + 10 << "\" y=\"" << ly - 8 << "\" width=\"10\" height=\"10\" fill=\"" << color
      << "\"/>\n";
    o << "<text x=\"" << L + pw + 26 << "\" y=\"" << ly << "\">" << escape_xml(s.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

Series fit_series(const RateFit& fit, double lo, double hi, const std::string& label) {
  Series s;
  s.label = label;
  constexpr int n = 32;
  for (int i = 0; i < n; ++i) {
    const double x = lo * std::pow(hi / lo, double(i) / (n - 1));
    double y = 0.0;
    switch (fit.model) {
      case FitModel::power_law: y = std::exp(fit.log_constant + fit.exponent * std::log(x)); break;
      case FitModel::log_law: y = fit.log_constant + fit.exponent * std::log(x); break;
      case FitModel::reciprocal_log_law: y = fit.log_constant + fit.exponent / std::abs(std::log(x)); break;
    }
    s.x.push_back(x);
    s.y.push_back(y);
  }
  return s;
}

void ensure_directory(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) fail(ErrorKind::config, "cannot create output directory " + dir);
  const auto probe = std::filesystem::path(dir) / ".hjqp-write-probe";
  {
    std::ofstream f(probe);
    if (!f) fail(ErrorKind::config, "output directory " + dir + " is not writable");
  }
  std::filesystem::remove(probe, ec);
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::config, "cannot write " + path);
  f << content;
  if (!f) fail(ErrorKind::config, "write failed for " + path);
}

}  // namespace hjqp::cli
