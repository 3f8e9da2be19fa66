#pragma once

#include <cstdio>
#include <fstream>
#include <string>

#include "finsim/errors.hpp"
#include "finsim/time_series.hpp"

namespace finsim {

/// Formats a value with 9 significant digits, the repository-wide CSV
/// precision. %g keeps files compact and reproduces 1e-8-level checks.
inline std::string format_csv_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

/// Writes a TimeSeries as CSV: header row, one row per sample, LF endings,
/// no trailing delimiter. Output is byte-identical for identical inputs.
inline void emit_timeseries(const TimeSeries& ts, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output file: " + path);
  const auto& names = ts.channel_names();
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (j > 0) out << ',';
    out << names[j];
  }
  out << '\n';
  for (Eigen::Index i = 0; i < ts.rows(); ++i) {
    for (std::size_t j = 0; j < names.size(); ++j) {
      if (j > 0) out << ',';
      out << format_csv_value(ts.at(i, names[j]));
    }
    out << '\n';
  }
  out.flush();
  if (!out) throw IoError("write failed: " + path);
}

inline void write_text_file(const std::string& text, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output file: " + path);
  out << text;
  out.flush();
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace finsim
