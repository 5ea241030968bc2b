#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hjqp/rate_fit.hpp"

namespace hjqp::cli {

// RFC 4180: CRLF line ends, fields with comma, quote or line breaks are quoted and
// embedded quotes doubled.
std::string csv_field(const std::string& s);
std::string csv_row(const std::vector<std::string>& fields);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
  void add(std::vector<std::string> row);
  std::size_t rows() const noexcept { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// Parses RFC 4180 text back into rows (header included).
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool line = true;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = true;
  bool log_y = true;
  std::vector<Series> series;
};

// Standalone SVG document (no external references).
std::string render_svg(const PlotSpec& plot);
// Fitted curve of a RateFit sampled over [lo, hi].
Series fit_series(const RateFit& fit, double lo, double hi, const std::string& label);

// Creates the directory (and parents); throws Error(config) when it is not writable.
void ensure_directory(const std::string& dir);
void write_file(const std::string& path, const std::string& content);

}  // namespace hjqp::cli
