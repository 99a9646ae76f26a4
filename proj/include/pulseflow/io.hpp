#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "pulseflow/area_field.hpp"
#include "pulseflow/riccati.hpp"

namespace pulseflow {

/// Area grid CSV: header `t_frac,x_0,...,x_{N-1}`, one row per phase k/M.
AreaSamples read_area_csv(const std::filesystem::path& path, double period);
AreaSamples parse_area_csv(const std::string& text, double period);
void write_area_csv(const std::filesystem::path& path, const AreaSamples& samples);
std::string format_area_csv(const AreaSamples& samples);

/// Contour JSON: [{phase_index, z_cm, points: [[x, y], ...]}, ...]. Every
/// (phase, station) pair must be present exactly once.
AreaSamples read_contours_json(const std::filesystem::path& path, double period);
AreaSamples contours_to_samples(const nlohmann::json& doc, double period);

/// Coefficient injection: {T, samples: [{t, A, B, C0, C1}, ...]} on a
/// uniform grid t_k = k T / M, projected onto up to `harmonics` harmonics.
RiccatiCoefficients coefficients_from_json(const nlohmann::json& doc, int harmonics = 3);
RiccatiCoefficients read_coefficients_json(const std::filesystem::path& path, int harmonics = 3);

nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

/// Shortest round-trip formatting (17 significant digits).
std::string format_number(double v);

/// Column-major table: header names and equally long columns.
std::string format_csv(const std::vector<std::string>& header,
                       const std::vector<std::vector<double>>& columns);

}  // namespace pulseflow
