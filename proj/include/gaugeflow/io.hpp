// CSV / JSON emission. CSV files carry a header row, 17-significant-digit
// floats, UTF-8 and Unix newlines, so identical runs produce identical bytes.
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gaugeflow/core.hpp"
#include "gaugeflow/dynamics.hpp"
#include "gaugeflow/gauge.hpp"

namespace gaugeflow {

using Json = nlohmann::json;

inline std::string format_float(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header)
      : columns_(std::move(header)) {}

  void add_row(const std::vector<double>& row) {
    if (row.size() != columns_.size())
      throw ContractViolation("csv row width does not match the header");
    rows_.push_back(row);
  }

  void write(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
    for (std::size_t c = 0; c < columns_.size(); ++c)
      out << (c ? "," : "") << columns_[c];
    out << "\n";
    for (const auto& row : rows_) {
      for (std::size_t c = 0; c < row.size(); ++c)
        out << (c ? "," : "") << format_float(row[c]);
      out << "\n";
    }
  }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<double>> rows_;
};

inline void write_series_csv(const std::filesystem::path& path,
                             const ObservableSeries& series) {
  std::vector<std::string> header{"t"};
  for (const auto& [name, values] : series.values) header.push_back(name);
  CsvWriter csv(std::move(header));
  for (std::size_t k = 0; k < series.times.size(); ++k) {
    std::vector<double> row{series.times[k]};
    for (const auto& [name, values] : series.values)
      row.push_back(values(Eigen::Index(k)));
    csv.add_row(row);
  }
  csv.write(path);
}

inline Json series_to_json(const ObservableSeries& series) {
  Json j;
  j["t"] = series.times;
  for (const auto& [name, values] : series.values)
    j[name] = std::vector<double>(values.data(), values.data() + values.size());
  return j;
}

// Gauge trajectories in both parametrizations on a common grid.
inline void write_trajectory_csv(
    const std::filesystem::path& path,
    const std::vector<double>& times,
    const std::vector<CovariantGaugeState>& covariant,
    const std::vector<GaussGaugeState>& gauss) {
  CsvWriter csv({"t", "K", "nx", "ny", "nz", "xi_plus_re", "xi_plus_im",
                 "xi_z_re", "xi_z_im", "xi_minus_re", "xi_minus_im",
                 "unitarity_residual"});
  for (std::size_t k = 0; k < times.size(); ++k) {
    const CovariantGaugeState& c = covariant.at(k);
    const GaussGaugeState& g = gauss.at(k);
    csv.add_row({times[k], c.angle, c.axis.x, c.axis.y, c.axis.z,
                 g.xi_plus.real(), g.xi_plus.imag(), g.xi_z.real(),
                 g.xi_z.imag(), g.xi_minus.real(), g.xi_minus.imag(),
                 g.unitarity_residual()});
  }
  csv.write(path);
}

inline void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << "\n";
}

}  // namespace gaugeflow
