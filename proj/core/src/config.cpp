#include "codedstereo/config.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "codedstereo/errors.hpp"

namespace cs {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

size_t levenshtein(const std::string& a, const std::string& b) {
  std::vector<size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (size_t j = 1; j <= b.size(); ++j) {
      const size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double parse_double(const std::string& key, const std::string& value, int line) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (value.empty() || end == value.c_str() || *end != '\0')
    throw ConfigError("config line " + std::to_string(line) + ": key '" + key +
                      "' expects a number, got '" + value + "'");
  return v;
}

long long parse_int(const std::string& key, const std::string& value, int line) {
  char* end = nullptr;
  const long long v = std::strtoll(value.c_str(), &end, 10);
  if (value.empty() || end == value.c_str() || *end != '\0')
    throw ConfigError("config line " + std::to_string(line) + ": key '" + key +
                      "' expects an integer, got '" + value + "'");
  return v;
}

uint64_t parse_u64(const std::string& key, const std::string& value, int line) {
  char* end = nullptr;
  if (!value.empty() && value[0] == '-')
    throw ConfigError("config line " + std::to_string(line) + ": key '" + key +
                      "' expects a non-negative integer, got '" + value + "'");
  const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
  if (value.empty() || end == value.c_str() || *end != '\0')
    throw ConfigError("config line " + std::to_string(line) + ": key '" + key +
                      "' expects an integer, got '" + value + "'");
  return v;
}

using Setter = std::function<void(RunConfig&, const std::string& key,
                                  const std::string& value, int line)>;

std::map<std::string, Setter> optical_keys() {
  auto real = [](double OpticalConfig::* field) {
    return [field](RunConfig& c, const std::string& k, const std::string& v, int line) {
      c.optical.*field = parse_double(k, v, line);
    };
  };
  auto integer = [](int OpticalConfig::* field) {
    return [field](RunConfig& c, const std::string& k, const std::string& v, int line) {
      c.optical.*field = static_cast<int>(parse_int(k, v, line));
    };
  };
  auto wavelength = [](int idx) {
    return [idx](RunConfig& c, const std::string& k, const std::string& v, int line) {
      c.optical.wavelengths[idx] = parse_double(k, v, line);
    };
  };
  return {
      {"focal_length", real(&OpticalConfig::focal_length)},
      {"f_number", real(&OpticalConfig::f_number)},
      {"baseline", real(&OpticalConfig::baseline)},
      {"sensor_pixel_pitch", real(&OpticalConfig::sensor_pixel_pitch)},
      {"focus_distance", real(&OpticalConfig::focus_distance)},
      {"wavelength_r", wavelength(0)},
      {"wavelength_g", wavelength(1)},
      {"wavelength_b", wavelength(2)},
      {"mask_grid_size", integer(&OpticalConfig::mask_grid_size)},
      {"mask_pitch", real(&OpticalConfig::mask_pitch)},
      {"refractive_index", real(&OpticalConfig::refractive_index)},
      {"disparity_min", real(&OpticalConfig::disparity_min)},
      {"disparity_max", real(&OpticalConfig::disparity_max)},
      {"num_disparity_levels", integer(&OpticalConfig::num_disparity_levels)},
      {"d0", real(&OpticalConfig::d0)},
      {"preshift", integer(&OpticalConfig::preshift)},
      {"psf_kernel_size", integer(&OpticalConfig::psf_kernel_size)},
  };
}

std::map<std::string, Setter> loss_keys() {
  auto alpha = [](int idx) {
    return [idx](RunConfig& c, const std::string& k, const std::string& v, int line) {
      c.weights.alpha[idx] = parse_double(k, v, line);
    };
  };
  return {
      {"alpha0", alpha(0)},
      {"alpha1", alpha(1)},
      {"alpha2", alpha(2)},
      {"gamma",
       [](RunConfig& c, const std::string& k, const std::string& v, int line) {
         c.weights.gamma = parse_double(k, v, line);
       }},
  };
}

std::map<std::string, Setter> run_keys() {
  return {
      {"sigma",
       [](RunConfig& c, const std::string& k, const std::string& v, int line) {
         c.sigma = parse_double(k, v, line);
       }},
      {"seed",
       [](RunConfig& c, const std::string& k, const std::string& v, int line) {
         c.seed = parse_u64(k, v, line);
       }},
      {"manifest",
       [](RunConfig& c, const std::string&, const std::string& v, int) {
         c.manifest_path = v;
       }},
      {"mask",
       [](RunConfig& c, const std::string&, const std::string& v, int) {
         c.mask_path = v;
       }},
      {"output_dir",
       [](RunConfig& c, const std::string&, const std::string& v, int) {
         c.output_dir = v;
       }},
  };
}

std::string fmt_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  const std::map<std::string, std::map<std::string, Setter>> sections = {
      {"optical", optical_keys()},
      {"loss", loss_keys()},
      {"run", run_keys()},
  };

  RunConfig config;
  const std::map<std::string, Setter>* current = nullptr;
  std::string current_name;
  std::set<std::string> seen;

  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string s = trim(raw);
    if (s.empty()) continue;

    if (s.front() == '[') {
      if (s.back() != ']')
        throw ConfigError("config line " + std::to_string(line) +
                          ": unterminated section header");
      const std::string name = trim(s.substr(1, s.size() - 2));
      auto it = sections.find(name);
      if (it == sections.end()) {
        std::string best;
        size_t best_d = SIZE_MAX;
        for (const auto& [sec, _] : sections) {
          const size_t d = levenshtein(name, sec);
          if (d < best_d) best_d = d, best = sec;
        }
        throw ConfigError("config line " + std::to_string(line) + ": unknown section [" +
                          name + "], did you mean [" + best + "]?");
      }
      current = &it->second;
      current_name = name;
      continue;
    }

    const size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line) +
                        ": expected 'key = value', got '" + s + "'");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(line) + ": empty key");
    if (!current)
      throw ConfigError("config line " + std::to_string(line) + ": key '" + key +
                        "' appears before any [section] header");

    auto it = current->find(key);
    if (it == current->end()) {
      std::string best;
      size_t best_d = SIZE_MAX;
      for (const auto& [known, _] : *current) {
        const size_t d = levenshtein(key, known);
        if (d < best_d) best_d = d, best = known;
      }
      throw ConfigError("config line " + std::to_string(line) + ": unknown key '" + key +
                        "' in [" + current_name + "], did you mean '" + best + "'?");
    }
    const std::string qualified = current_name + "." + key;
    if (!seen.insert(qualified).second)
      throw ConfigError("config line " + std::to_string(line) + ": duplicate key '" + key +
                        "' in [" + current_name + "]");
    it->second(config, key, value, line);
  }
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();

  RunConfig config;
  try {
    config = parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }

  const auto base = std::filesystem::path(path).parent_path();
  auto resolve = [&](std::string& p) {
    if (p.empty()) return;
    std::filesystem::path fp(p);
    if (fp.is_relative()) fp = base / fp;
    p = fp.string();
    if (!std::filesystem::exists(fp))
      throw DataError(path + ": referenced path does not exist: " + p);
  };
  resolve(config.manifest_path);
  resolve(config.mask_path);
  return config;
}

std::string dump_config(const RunConfig& c) {
  std::string out;
  out += "[optical]\n";
  out += "focal_length = " + fmt_real(c.optical.focal_length) + "\n";
  out += "f_number = " + fmt_real(c.optical.f_number) + "\n";
  out += "baseline = " + fmt_real(c.optical.baseline) + "\n";
  out += "sensor_pixel_pitch = " + fmt_real(c.optical.sensor_pixel_pitch) + "\n";
  out += "focus_distance = " + fmt_real(c.optical.focus_distance) + "\n";
  out += "wavelength_r = " + fmt_real(c.optical.wavelengths[0]) + "\n";
  out += "wavelength_g = " + fmt_real(c.optical.wavelengths[1]) + "\n";
  out += "wavelength_b = " + fmt_real(c.optical.wavelengths[2]) + "\n";
  out += "mask_grid_size = " + std::to_string(c.optical.mask_grid_size) + "\n";
  out += "mask_pitch = " + fmt_real(c.optical.mask_pitch) + "\n";
  out += "refractive_index = " + fmt_real(c.optical.refractive_index) + "\n";
  out += "disparity_min = " + fmt_real(c.optical.disparity_min) + "\n";
  out += "disparity_max = " + fmt_real(c.optical.disparity_max) + "\n";
  out += "num_disparity_levels = " + std::to_string(c.optical.num_disparity_levels) + "\n";
  out += "d0 = " + fmt_real(c.optical.d0) + "\n";
  out += "preshift = " + std::to_string(c.optical.preshift) + "\n";
  out += "psf_kernel_size = " + std::to_string(c.optical.psf_kernel_size) + "\n";
  out += "\n[loss]\n";
  out += "alpha0 = " + fmt_real(c.weights.alpha[0]) + "\n";
  out += "alpha1 = " + fmt_real(c.weights.alpha[1]) + "\n";
  out += "alpha2 = " + fmt_real(c.weights.alpha[2]) + "\n";
  out += "gamma = " + fmt_real(c.weights.gamma) + "\n";
  out += "\n[run]\n";
  out += "sigma = " + fmt_real(c.sigma) + "\n";
  out += "seed = " + std::to_string(c.seed) + "\n";
  if (!c.manifest_path.empty()) out += "manifest = " + c.manifest_path + "\n";
  if (!c.mask_path.empty()) out += "mask = " + c.mask_path + "\n";
  if (!c.output_dir.empty()) out += "output_dir = " + c.output_dir + "\n";
  return out;
}

}  // namespace cs
