#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pulseflow/error.hpp"
#include "pulseflow/hemodynamics.hpp"
#include "pulseflow/optimizer.hpp"
#include "pulseflow/synth.hpp"

namespace pulseflow {

inline constexpr const char* kToolVersion = "1.0.0";

/// Batch configuration. Relative paths resolve against the config file.
struct RunConfig {
  std::optional<std::filesystem::path> area_csv;
  std::optional<std::filesystem::path> contours_json;
  double period = 1.0;  // s; from period_s or 60 / heart_rate_bpm
  std::optional<double> segment_start;
  std::optional<double> segment_end;
  double block_length = 1.0;
  int harmonics = 3;
  InverseConfig inverse;
  double density = 1.06;          // g/cm^3
  double viscosity_pa_s = 0.0035; // converted x10 to g/(cm s)
  std::vector<double> flow_fractions{0.1, 0.5, 0.9};
  SynthSpec synth;
  nlohmann::json effective;  // normalised config, hashed into the manifest

  FluidProperties fluid() const;
  void validate() const;
};

RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

/// Exit status for a pipeline error: 2 for data-driven infeasibility, 1 otherwise.
int exit_code_for(ErrorCode code);

/// Full command line entry point; returns the process exit code.
int run_cli(int argc, const char* const* argv);

}  // namespace pulseflow
