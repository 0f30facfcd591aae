#include "codedstereo/manifest.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "codedstereo/errors.hpp"
#include "codedstereo/pfm.hpp"
#include "codedstereo/png_io.hpp"
#include "codedstereo/rng.hpp"

namespace cs {

namespace {

struct Entry {
  int line = 0;
  std::string left_rgb, right_rgb, left_disp, right_disp;
  double disp_scale = 1.0;
  double disp_offset = 0.0;
  std::string id;
};

std::string lower_ext(const std::string& path) {
  std::string ext = std::filesystem::path(path).extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext;
}

Grid load_disparity(const std::string& path, double scale, double offset) {
  const std::string ext = lower_ext(path);
  Grid raw;
  if (ext == ".pfm") {
    raw = read_pfm_gray(path);
  } else if (ext == ".png") {
    raw = read_png_gray_raw(path);
  } else {
    throw DataError(path + ": disparity must be .pfm or .png");
  }
  for (size_t i = 0; i < raw.size(); ++i) raw[i] = raw[i] * scale + offset;
  return raw;
}

Entry parse_entry(const std::string& line_text, int line_no) {
  Entry e;
  e.line = line_no;
  std::istringstream in(line_text);
  std::string token;
  while (in >> token) {
    const size_t eq = token.find('=');
    if (eq == std::string::npos)
      throw DataError("manifest line " + std::to_string(line_no) +
                      ": expected key=value, got '" + token + "'");
    const std::string key = token.substr(0, eq);
    const std::string value = token.substr(eq + 1);
    if (value.empty())
      throw DataError("manifest line " + std::to_string(line_no) + ": empty value for '" +
                      key + "'");
    if (key == "left_rgb") {
      e.left_rgb = value;
    } else if (key == "right_rgb") {
      e.right_rgb = value;
    } else if (key == "left_disp") {
      e.left_disp = value;
    } else if (key == "right_disp") {
      e.right_disp = value;
    } else if (key == "disp_scale" || key == "disp_offset") {
      char* end = nullptr;
      const double v = std::strtod(value.c_str(), &end);
      if (end == value.c_str() || *end != '\0')
        throw DataError("manifest line " + std::to_string(line_no) + ": bad number for '" +
                        key + "'");
      (key == "disp_scale" ? e.disp_scale : e.disp_offset) = v;
    } else if (key == "id") {
      e.id = value;
    } else {
      throw DataError("manifest line " + std::to_string(line_no) + ": unknown key '" + key +
                      "'");
    }
  }
  auto require = [&](const char* key, const std::string& value) {
    if (value.empty())
      throw DataError("manifest line " + std::to_string(line_no) +
                      ": missing required '" + std::string(key) + "'");
  };
  require("left_rgb", e.left_rgb);
  require("right_rgb", e.right_rgb);
  require("left_disp", e.left_disp);
  require("right_disp", e.right_disp);
  if (e.id.empty())
    e.id = std::filesystem::path(e.left_rgb).stem().string() + "-" +
           std::to_string(line_no);
  return e;
}

Grid crop_grid(const Grid& g, int y0, int x0, int h, int w) {
  Grid out(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out(y, x) = g(y0 + y, x0 + x);
  return out;
}

Image crop_image(const Image& img, int y0, int x0, int h, int w) {
  Image out;
  for (int c = 0; c < 3; ++c) out.ch[c] = crop_grid(img.ch[c], y0, x0, h, w);
  return out;
}

}  // namespace

ManifestResult load_scene_manifest(const std::string& path, const OpticalConfig& config,
                                   int crop_height, int crop_width, uint64_t crop_seed) {
  if ((crop_height > 0) != (crop_width > 0))
    throw ConfigError("crop needs both height and width (or neither)");

  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);

  const auto base = std::filesystem::path(path).parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path fp(p);
    if (fp.is_relative()) fp = base / fp;
    return fp.string();
  };

  std::vector<Entry> entries;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    bool blank = true;
    for (char c : raw)
      if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
    if (blank) continue;
    Entry e = parse_entry(raw, line_no);
    e.left_rgb = resolve(e.left_rgb);
    e.right_rgb = resolve(e.right_rgb);
    e.left_disp = resolve(e.left_disp);
    e.right_disp = resolve(e.right_disp);
    entries.push_back(std::move(e));
  }
  if (entries.empty()) throw DataError(path + ": manifest lists no scenes");

  // Existence is checked for every file before decoding anything, so a typo
  // in the last line does not surface after minutes of loading.
  for (const Entry& e : entries) {
    for (const std::string& p : {e.left_rgb, e.right_rgb, e.left_disp, e.right_disp}) {
      if (!std::filesystem::exists(p))
        throw DataError("manifest line " + std::to_string(e.line) + ": missing file " + p);
    }
  }

  ManifestResult result;
  for (size_t i = 0; i < entries.size(); ++i) {
    const Entry& e = entries[i];
    Scene scene;
    scene.id = e.id;
    scene.texture_left = read_png(e.left_rgb);
    scene.texture_right = read_png(e.right_rgb);
    scene.disparity_left = load_disparity(e.left_disp, e.disp_scale, e.disp_offset);
    scene.disparity_right = load_disparity(e.right_disp, e.disp_scale, e.disp_offset);

    const int h = scene.texture_left.height(), w = scene.texture_left.width();
    if (scene.texture_right.height() != h || scene.texture_right.width() != w ||
        scene.disparity_left.height() != h || scene.disparity_left.width() != w ||
        scene.disparity_right.height() != h || scene.disparity_right.width() != w) {
      result.rejected.push_back(e.id + ": shape mismatch across views/maps");
      continue;
    }

    if (crop_height > 0) {
      if (h < crop_height || w < crop_width) {
        result.rejected.push_back(e.id + ": smaller than the requested crop");
        continue;
      }
      int y0 = (h - crop_height) / 2, x0 = (w - crop_width) / 2;
      if (crop_seed != 0) {
        Rng rng(Rng::derive(crop_seed, i));
        y0 = static_cast<int>(rng.uniform_int(0, h - crop_height));
        x0 = static_cast<int>(rng.uniform_int(0, w - crop_width));
      }
      scene.texture_left = crop_image(scene.texture_left, y0, x0, crop_height, crop_width);
      scene.texture_right = crop_image(scene.texture_right, y0, x0, crop_height, crop_width);
      scene.disparity_left = crop_grid(scene.disparity_left, y0, x0, crop_height, crop_width);
      scene.disparity_right =
          crop_grid(scene.disparity_right, y0, x0, crop_height, crop_width);
    }

    size_t clamped = 0;
    for (Grid* d : {&scene.disparity_left, &scene.disparity_right}) {
      for (size_t k = 0; k < d->size(); ++k) {
        double& v = (*d)[k];
        if (v < config.disparity_min || v > config.disparity_max) {
          v = std::clamp(v, config.disparity_min, config.disparity_max);
          ++clamped;
        }
      }
    }
    const size_t total = scene.disparity_left.size() + scene.disparity_right.size();
    if (clamped * 2 > total) {
      result.rejected.push_back(
          e.id + ": " + std::to_string(100.0 * clamped / total) +
          "% of disparities outside the working range (wrong disp_scale/offset?)");
      continue;
    }
    result.scenes.push_back(std::move(scene));
  }

  if (result.scenes.empty()) {
    std::string msg = path + ": every scene was rejected:";
    for (const auto& r : result.rejected) msg += "\n  " + r;
    throw DataError(msg);
  }
  return result;
}

}  // namespace cs
