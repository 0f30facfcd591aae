#pragma once

#include <cstdint>
#include <string>

#include "codedstereo/metrics.hpp"
#include "codedstereo/optics.hpp"

namespace cs {

struct RunConfig {
  OpticalConfig optical;
  LossWeights weights;
  double sigma = 0.02;
  uint64_t seed = 0;
  std::string manifest_path;
  std::string mask_path;
  std::string output_dir;

  bool operator==(const RunConfig&) const = default;
};

// INI-style text: sections [optical], [loss], [run]; `key = value` lines;
// `#` comments. Unknown keys are rejected with a nearest-key suggestion,
// duplicates are errors, absent keys keep their defaults.
RunConfig parse_config(const std::string& text);

// parse_config plus eager existence checks for manifest/mask paths
// (relative to the config file's directory).
RunConfig load_config(const std::string& path);

// Canonical dump listing every key; parse_config(dump_config(c)) == c.
std::string dump_config(const RunConfig& config);

}  // namespace cs
