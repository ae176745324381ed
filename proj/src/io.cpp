#include "fracdyn/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fracdyn::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_number(std::string_view field, std::size_t line) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (field.empty() || ec != std::errc() || ptr != last) {
    throw ParseError("cannot parse number '" + std::string(field) + "'", line);
  }
  if (!std::isfinite(value)) {
    throw ParseError("non-finite value '" + std::string(field) + "'", line);
  }
  return value;
}

Matrix json_matrix(const nlohmann::json& j, std::size_t rows, std::size_t cols,
                   std::string_view name) {
  if (!j.is_array() || j.size() != rows) {
    throw ParseError("model field '" + std::string(name) + "' must have " +
                     std::to_string(rows) + " rows");
  }
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const auto& row = j[r];
    if (!row.is_array() || row.size() != cols) {
      throw ParseError("model field '" + std::string(name) + "' row " +
                       std::to_string(r + 1) + " must have " + std::to_string(cols) +
                       " entries");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!row[c].is_number()) {
        throw ParseError("model field '" + std::string(name) + "' has a non-numeric entry");
      }
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c].get<double>();
    }
  }
  return m;
}

nlohmann::json matrix_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw ArgumentError("cannot format number");
  return std::string(buf, ptr);
}

TimeSeries parse_csv(std::string_view text, std::size_t min_rows) {
  TimeSeries series;
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  bool have_header = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = text.find('\n', pos);
    std::string_view line = text.substr(pos, end == std::string_view::npos ? text.npos : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (have_header) throw ParseError("comment lines must precede the header", line_no);
      const std::string_view body = trim(line.substr(1));
      const std::size_t eq = body.find('=');
      if (eq != std::string_view::npos && trim(body.substr(0, eq)) == "sample_rate") {
        series.sample_rate = parse_number(trim(body.substr(eq + 1)), line_no);
      }
      continue;
    }
    const auto fields = split(line, ',');
    if (!have_header) {
      for (auto f : fields) {
        if (f.empty()) throw ParseError("empty channel name in header", line_no);
        series.channels.emplace_back(f);
      }
      have_header = true;
      continue;
    }
    if (fields.size() != series.channels.size()) {
      throw ParseError("row has " + std::to_string(fields.size()) + " fields, expected " +
                           std::to_string(series.channels.size()),
                       line_no);
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (auto f : fields) row.push_back(parse_number(f, line_no));
    rows.push_back(std::move(row));
  }
  if (!have_header) throw ParseError("CSV has no header row");
  if (rows.size() < min_rows) {
    throw ParseError("CSV has " + std::to_string(rows.size()) + " data rows, need at least " +
                     std::to_string(min_rows));
  }
  series.values.resize(static_cast<Eigen::Index>(rows.size()),
                       static_cast<Eigen::Index>(series.channels.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      series.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return series;
}

std::string format_csv(const TimeSeries& series) {
  if (static_cast<std::size_t>(series.values.cols()) != series.channels.size()) {
    throw ArgumentError("time series has mismatched channel names");
  }
  std::string out;
  if (series.sample_rate) out += "# sample_rate=" + format_double(*series.sample_rate) + "\n";
  for (std::size_t c = 0; c < series.channels.size(); ++c) {
    if (c) out += ',';
    out += series.channels[c];
  }
  out += '\n';
  for (Eigen::Index r = 0; r < series.values.rows(); ++r) {
    for (Eigen::Index c = 0; c < series.values.cols(); ++c) {
      if (c) out += ',';
      out += format_double(series.values(r, c));
    }
    out += '\n';
  }
  return out;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ArgumentError("cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

TimeSeries read_csv(const std::filesystem::path& path, std::size_t min_rows) {
  try {
    return parse_csv(read_text(path), min_rows);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_csv(const std::filesystem::path& path, const TimeSeries& series) {
  write_text(path, format_csv(series));
}

TimeSeries labelled(const Matrix& values, std::string_view prefix) {
  TimeSeries series;
  series.values = values;
  for (Eigen::Index c = 0; c < values.cols(); ++c) {
    series.channels.push_back(std::string(prefix) + std::to_string(c + 1));
  }
  return series;
}

SystemModel ModelFile::to_model() const { return SystemModel(alpha, a, b); }

ModelFile ModelFile::from_model(const SystemModel& model, std::string provenance) {
  ModelFile file;
  file.alpha = model.orders();
  file.a = model.a();
  file.b = model.b();
  file.provenance = std::move(provenance);
  return file;
}

ModelFile parse_model(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("model file is not valid JSON: ") + e.what());
  }
  ModelFile model;
  try {
    model.schema_version = j.at("schema_version").get<std::string>();
    if (model.schema_version != kModelSchemaVersion) {
      throw ParseError("unsupported model schema '" + model.schema_version + "'");
    }
    const auto n = j.at("n").get<std::size_t>();
    const auto p = j.at("p").get<std::size_t>();
    if (n == 0 || p >= n) throw ParseError("model requires n >= 1 and p < n");
    const auto alpha = j.at("alpha").get<std::vector<double>>();
    if (alpha.size() != n) throw ParseError("model field 'alpha' must have n entries");
    model.alpha = FractionalOrders(
        Eigen::Map<const Vector>(alpha.data(), static_cast<Eigen::Index>(n)));
    model.a = json_matrix(j.at("A"), n, n, "A");
    model.b = json_matrix(j.at("B"), n, p, "B");
    model.provenance = j.value("provenance", "");
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed model file: ") + e.what());
  } catch (const ArgumentError& e) {
    throw ParseError(std::string("invalid model: ") + e.what());
  }
  return model;
}

std::string format_model(const ModelFile& model) {
  nlohmann::ordered_json j;
  j["schema_version"] = model.schema_version;
  j["n"] = model.a.rows();
  j["p"] = model.b.cols();
  j["alpha"] = std::vector<double>(model.alpha.values().data(),
                                   model.alpha.values().data() + model.alpha.size());
  j["A"] = matrix_json(model.a);
  j["B"] = matrix_json(model.b);
  j["provenance"] = model.provenance;
  return j.dump(2) + "\n";
}

ModelFile read_model(const std::filesystem::path& path) {
  try {
    return parse_model(read_text(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_model(const std::filesystem::path& path, const ModelFile& model) {
  write_text(path, format_model(model));
}

SensorSet parse_sensor_list(std::string_view text, std::size_t state_count) {
  std::vector<std::size_t> indices;
  text = trim(text);
  if (!text.empty()) {
    for (auto field : split(text, ',')) {
      std::size_t value = 0;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
      if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
        throw ParseError("bad sensor index '" + std::string(field) + "'");
      }
      if (value == 0 || value > state_count) {
        throw ParseError("sensor " + std::to_string(value) + " is outside 1.." +
                         std::to_string(state_count));
      }
      indices.push_back(value - 1);
    }
  }
  try {
    return SensorSet(std::move(indices), state_count);
  } catch (const ArgumentError& e) {
    throw ParseError(e.what());
  }
}

std::string format_sensor_list(const SensorSet& sensors) {
  std::string out;
  for (std::size_t i = 0; i < sensors.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(sensors.indices()[i] + 1);
  }
  return out;
}

}  // namespace fracdyn::io
