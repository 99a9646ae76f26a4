#include "pulseflow/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "pulseflow/error.hpp"

namespace pulseflow {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& cell, std::size_t line) {
  const std::string s = trim(cell);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (s.empty() || used != s.size()) {
    throw Error(ErrorCode::io, "line " + std::to_string(line) + ": not a number '" + s + "'");
  }
  return v;
}

}  // namespace

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());
}

nlohmann::json read_json(const std::filesystem::path& path) {
  try {
    return nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::io, path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  write_text(path, doc.dump(2) + "\n");
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_csv(const std::vector<std::string>& header,
                       const std::vector<std::vector<double>>& columns) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out += ',';
    out += header[i];
  }
  out += '\n';
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) out += ',';
      const double v = columns[c][r];
      if (!std::isnan(v)) out += format_number(v);
    }
    out += '\n';
  }
  return out;
}

AreaSamples parse_area_csv(const std::string& text, double period) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  AreaSamples s;
  s.period = period;
  std::vector<std::pair<std::size_t, double>> fractions;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(trim(line), ',');
    if (header) {
      if (cells.size() < 3 || trim(cells[0]) != "t_frac") {
        throw Error(ErrorCode::io, "area CSV header must be t_frac,x_0,...,x_{N-1}");
      }
      for (std::size_t j = 1; j < cells.size(); ++j) s.stations.push_back(parse_double(cells[j], line_no));
      header = false;
      continue;
    }
    if (cells.size() != s.stations.size() + 1) {
      throw Error(ErrorCode::io, "line " + std::to_string(line_no) + ": expected " +
                                     std::to_string(s.stations.size() + 1) + " cells");
    }
    fractions.emplace_back(line_no, parse_double(cells[0], line_no));
    for (std::size_t j = 1; j < cells.size(); ++j) s.values.push_back(parse_double(cells[j], line_no));
    ++s.phase_count;
  }
  if (header) throw Error(ErrorCode::io, "area CSV is empty");
  for (std::size_t k = 0; k < fractions.size(); ++k) {
    const double expect = static_cast<double>(k) / static_cast<double>(s.phase_count);
    if (std::abs(fractions[k].second - expect) > 1e-9) {
      throw Error(ErrorCode::io, "line " + std::to_string(fractions[k].first) + ": t_frac " +
                                     format_number(fractions[k].second) + " is not " + format_number(expect));
    }
  }
  s.validate();
  return s;
}

AreaSamples read_area_csv(const std::filesystem::path& path, double period) {
  return parse_area_csv(read_text(path), period);
}

std::string format_area_csv(const AreaSamples& samples) {
  std::vector<std::string> header{"t_frac"};
  for (double x : samples.stations) header.push_back(format_number(x));
  std::vector<std::vector<double>> cols(samples.stations.size() + 1);
  for (std::size_t k = 0; k < samples.phase_count; ++k) {
    cols[0].push_back(static_cast<double>(k) / static_cast<double>(samples.phase_count));
    for (std::size_t j = 0; j < samples.stations.size(); ++j) cols[j + 1].push_back(samples.at(k, j));
  }
  return format_csv(header, cols);
}

void write_area_csv(const std::filesystem::path& path, const AreaSamples& samples) {
  write_text(path, format_area_csv(samples));
}

AreaSamples contours_to_samples(const nlohmann::json& doc, double period) {
  if (!doc.is_array() || doc.empty()) throw Error(ErrorCode::io, "contour JSON must be a non-empty array");
  std::map<std::pair<double, std::size_t>, double> areas;
  std::map<double, int> stations;
  std::size_t phases = 0;
  try {
    for (const auto& e : doc) {
      const auto phase = e.at("phase_index").get<std::size_t>();
      const double z = e.at("z_cm").get<double>();
      ContourRing ring;
      for (const auto& p : e.at("points")) {
        if (!p.is_array() || p.size() != 2) throw Error(ErrorCode::io, "contour point must be [x, y]");
        ring.points.push_back({p[0].get<double>(), p[1].get<double>()});
      }
      if (!areas.emplace(std::pair{z, phase}, polygon_area(ring)).second) {
        throw Error(ErrorCode::io, "duplicate contour for z=" + format_number(z) + ", phase " +
                                       std::to_string(phase));
      }
      stations[z] = 0;
      phases = std::max(phases, phase + 1);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::io, std::string("contour JSON: ") + e.what());
  }
  AreaSamples s;
  s.period = period;
  s.phase_count = phases;
  for (const auto& [z, unused] : stations) s.stations.push_back(z);
  for (std::size_t k = 0; k < phases; ++k) {
    for (double z : s.stations) {
      auto it = areas.find({z, k});
      if (it == areas.end()) {
        throw Error(ErrorCode::io, "missing contour for z=" + format_number(z) + ", phase " + std::to_string(k));
      }
      s.values.push_back(it->second);
    }
  }
  s.validate();
  return s;
}

AreaSamples read_contours_json(const std::filesystem::path& path, double period) {
  return contours_to_samples(read_json(path), period);
}

RiccatiCoefficients coefficients_from_json(const nlohmann::json& doc, int harmonics) {
  try {
    const double period = doc.at("T").get<double>();
    const auto& samples = doc.at("samples");
    const std::size_t m = samples.size();
    if (m == 0) throw Error(ErrorCode::io, "coefficient JSON has no samples");
    std::vector<double> cols[4];
    static const char* names[4] = {"A", "B", "C0", "C1"};
    for (std::size_t k = 0; k < m; ++k) {
      const auto& e = samples[k];
      const double t = e.at("t").get<double>();
      if (std::abs(t - period * static_cast<double>(k) / static_cast<double>(m)) > 1e-9 * period) {
        throw Error(ErrorCode::io, "coefficient samples must sit at t = k T / M");
      }
      for (int c = 0; c < 4; ++c) cols[c].push_back(e.value(names[c], 0.0));
    }
    const int h = std::min(harmonics, static_cast<int>((m - 1) / 2));
    return RiccatiCoefficients::from_series(period, project_trig_series(cols[0], period, h),
                                            project_trig_series(cols[1], period, h),
                                            project_trig_series(cols[2], period, h),
                                            project_trig_series(cols[3], period, h));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::io, std::string("coefficient JSON: ") + e.what());
  }
}

RiccatiCoefficients read_coefficients_json(const std::filesystem::path& path, int harmonics) {
  return coefficients_from_json(read_json(path), harmonics);
}

}  // namespace pulseflow
