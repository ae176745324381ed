#pragma once

// File formats: comma-separated time series with a header row, and a JSON
// model file. Numbers are written in shortest round-trip form so that
// write -> read -> write is byte-identical.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fracdyn/fraccore.hpp"
#include "fracdyn/observability.hpp"

namespace fracdyn::io {

inline constexpr std::string_view kModelSchemaVersion = "fracdyn-model/1";

struct TimeSeries {
  std::vector<std::string> channels;
  Matrix values;  // rows are time samples
  std::optional<double> sample_rate;
};

// Accepts optional leading "# key=value" lines (only sample_rate is read).
TimeSeries parse_csv(std::string_view text, std::size_t min_rows = 1);
std::string format_csv(const TimeSeries& series);

TimeSeries read_csv(const std::filesystem::path& path, std::size_t min_rows = 1);
void write_csv(const std::filesystem::path& path, const TimeSeries& series);

// Columns named prefix1..prefixN.
TimeSeries labelled(const Matrix& values, std::string_view prefix);

std::string format_double(double value);

struct ModelFile {
  std::string schema_version{kModelSchemaVersion};
  FractionalOrders alpha;
  Matrix a;
  Matrix b;
  std::string provenance;

  SystemModel to_model() const;
  static ModelFile from_model(const SystemModel& model, std::string provenance = {});
};

ModelFile parse_model(std::string_view text);
std::string format_model(const ModelFile& model);
ModelFile read_model(const std::filesystem::path& path);
void write_model(const std::filesystem::path& path, const ModelFile& model);

// Sensor lists on the command line and in files are 1-based ("1,3,4").
SensorSet parse_sensor_list(std::string_view text, std::size_t state_count);
std::string format_sensor_list(const SensorSet& sensors);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace fracdyn::io
