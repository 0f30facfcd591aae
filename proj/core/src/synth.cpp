#include "codedstereo/synth.hpp"

#include <algorithm>
#include <cmath>

#include "codedstereo/errors.hpp"
#include "codedstereo/rng.hpp"

namespace cs {

namespace {

// Smooth random field evaluable at arbitrary (fractional) coordinates over
// y in [0, height), x in [-pad, width + pad). Octave value noise: random
// lattices at halving cell sizes, bilinearly interpolated.
class NoiseField {
 public:
  NoiseField(int height, int width, double pad, uint64_t seed, int octaves) {
    double amp = 1.0, total = 0.0;
    int cell = 32;
    for (int o = 0; o < octaves; ++o) {
      Octave oct;
      oct.cell = std::max(2, cell);
      oct.x0 = -static_cast<int>(std::ceil(pad / oct.cell)) - 1;
      const int nx = static_cast<int>(std::ceil((width + pad) / oct.cell)) + 2 - oct.x0;
      const int ny = height / oct.cell + 3;
      oct.values = Grid(ny, nx);
      Rng rng(Rng::derive(seed, o));
      for (size_t i = 0; i < oct.values.size(); ++i) oct.values[i] = rng.uniform();
      oct.amp = amp;
      total += amp;
      octaves_.push_back(std::move(oct));
      amp *= 0.5;
      cell /= 2;
    }
    scale_ = 1.0 / total;
  }

  // Result in [0,1].
  double sample(double y, double x) const {
    double acc = 0.0;
    for (const Octave& o : octaves_) {
      const double gy = y / o.cell;
      const double gx = x / o.cell - o.x0;
      const int iy = static_cast<int>(std::floor(gy));
      const int ix = static_cast<int>(std::floor(gx));
      const double fy = gy - iy, fx = gx - ix;
      const int y0 = std::clamp(iy, 0, o.values.height() - 2);
      const int x0 = std::clamp(ix, 0, o.values.width() - 2);
      const double v00 = o.values(y0, x0), v01 = o.values(y0, x0 + 1);
      const double v10 = o.values(y0 + 1, x0), v11 = o.values(y0 + 1, x0 + 1);
      acc += o.amp * ((1 - fy) * ((1 - fx) * v00 + fx * v01) +
                      fy * ((1 - fx) * v10 + fx * v11));
    }
    return acc * scale_;
  }

 private:
  struct Octave {
    Grid values;
    int cell = 1;
    int x0 = 0;
    double amp = 1.0;
  };
  std::vector<Octave> octaves_;
  double scale_ = 1.0;
};

double to_band(double v) { return 0.1 + 0.8 * v; }

struct LayerRect {
  double disparity = 0.0;
  int y0 = 0, y1 = 0;      // view-independent
  double x0 = 0, x1 = 0;   // world (left-view) coordinates
};

}  // namespace

Image make_noise_texture(int height, int width, uint64_t seed, int octaves) {
  if (height <= 0 || width <= 0) throw ConfigError("make_noise_texture: empty shape");
  Image out(height, width);
  for (int c = 0; c < 3; ++c) {
    NoiseField field(height, width, 0.0, Rng::derive(seed, 100 + c), octaves);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) out.ch[c](y, x) = to_band(field.sample(y, x));
  }
  return out;
}

Scene make_plane_scene(int height, int width, const std::vector<double>& disparities,
                       uint64_t seed, const std::string& id) {
  if (height <= 0 || width <= 0) throw ConfigError("make_plane_scene: empty shape");
  if (disparities.empty()) throw ConfigError("make_plane_scene: no layers");

  std::vector<double> sorted = disparities;
  std::sort(sorted.begin(), sorted.end());
  const double pad = sorted.back() + 4.0;

  Rng rng(Rng::derive(seed, 7));
  std::vector<LayerRect> layers;
  std::vector<NoiseField> fields;
  for (size_t k = 0; k < sorted.size(); ++k) {
    LayerRect r;
    r.disparity = sorted[k];
    if (k == 0) {
      r.y0 = 0;
      r.y1 = height;
      r.x0 = -pad;
      r.x1 = width + pad;
    } else {
      const int min_h = std::max(8, height / 3);
      r.y0 = static_cast<int>(rng.uniform_int(0, std::max(0, height - min_h)));
      r.y1 = std::min<int>(height, r.y0 + min_h +
                                       static_cast<int>(rng.uniform_int(0, height / 2)));
      const double min_w = std::max(8.0, width / 3.0);
      // Keep foreground rects out of the strip x < d + margin where the left
      // view has no counterpart in the right view.
      const double lo_x = std::min(sorted[k] + 8.0, width - min_w);
      r.x0 = rng.uniform(lo_x, std::max(lo_x + 1.0, width - min_w));
      r.x1 = std::min<double>(width + pad, r.x0 + min_w + rng.uniform(0.0, width / 2.0));
    }
    layers.push_back(r);
  }
  for (size_t k = 0; k < sorted.size(); ++k)
    for (int c = 0; c < 3; ++c)
      fields.emplace_back(height, width, pad + 4.0, Rng::derive(seed, 10 * k + c), 4);

  Scene scene;
  scene.id = id;
  scene.texture_left = Image(height, width);
  scene.texture_right = Image(height, width);
  scene.disparity_left = Grid(height, width);
  scene.disparity_right = Grid(height, width);

  // Painter's order far to near, each view with its own coverage: a right
  // view pixel x_R sees world position x_R + d of that layer.
  for (int view = 0; view < 2; ++view) {
    Image& tex = view == 0 ? scene.texture_left : scene.texture_right;
    Grid& disp = view == 0 ? scene.disparity_left : scene.disparity_right;
    for (size_t k = 0; k < layers.size(); ++k) {
      const LayerRect& r = layers[k];
      for (int y = r.y0; y < r.y1; ++y) {
        for (int x = 0; x < width; ++x) {
          const double world_x = view == 0 ? x : x + r.disparity;
          if (world_x < r.x0 || world_x >= r.x1) continue;
          for (int c = 0; c < 3; ++c)
            tex.ch[c](y, x) = to_band(fields[3 * k + c].sample(y, world_x));
          disp(y, x) = r.disparity;
        }
      }
    }
  }
  return scene;
}

Scene make_ramp_scene(int height, int width, double d_lo, double d_hi, uint64_t seed,
                      const std::string& id) {
  if (height <= 0 || width <= 0) throw ConfigError("make_ramp_scene: empty shape");
  const double pad = std::max(d_lo, d_hi) + 4.0;

  Scene scene;
  scene.id = id;
  scene.texture_left = Image(height, width);
  scene.texture_right = Image(height, width);
  scene.disparity_left = Grid(height, width);
  scene.disparity_right = Grid(height, width);

  std::vector<NoiseField> fields;
  for (int c = 0; c < 3; ++c)
    fields.emplace_back(height, width, pad, Rng::derive(seed, c), 4);

  for (int y = 0; y < height; ++y) {
    const double t = height > 1 ? static_cast<double>(y) / (height - 1) : 0.0;
    const double d = d_lo + (d_hi - d_lo) * t;
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < 3; ++c) {
        scene.texture_left.ch[c](y, x) = to_band(fields[c].sample(y, x));
        scene.texture_right.ch[c](y, x) = to_band(fields[c].sample(y, x + d));
      }
      scene.disparity_left(y, x) = d;
      scene.disparity_right(y, x) = d;
    }
  }
  return scene;
}

Scene make_stair_scene(int height, int width, const std::vector<double>& steps,
                       uint64_t seed, const std::string& id) {
  if (height <= 0 || width <= 0) throw ConfigError("make_stair_scene: empty shape");
  if (steps.empty()) throw ConfigError("make_stair_scene: no steps");
  if (height < 2 * static_cast<int>(steps.size()))
    throw ConfigError("make_stair_scene: fewer than 2 rows per step");
  const double pad = *std::max_element(steps.begin(), steps.end()) + 4.0;

  Scene scene;
  scene.id = id;
  scene.texture_left = Image(height, width);
  scene.texture_right = Image(height, width);
  scene.disparity_left = Grid(height, width);
  scene.disparity_right = Grid(height, width);

  std::vector<NoiseField> fields;
  for (int c = 0; c < 3; ++c)
    fields.emplace_back(height, width, pad, Rng::derive(seed, c), 4);

  const int n = static_cast<int>(steps.size());
  for (int y = 0; y < height; ++y) {
    const int strip = std::min(n - 1, y * n / height);
    const double d = steps[strip];
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < 3; ++c) {
        scene.texture_left.ch[c](y, x) = to_band(fields[c].sample(y, x));
        scene.texture_right.ch[c](y, x) = to_band(fields[c].sample(y, x + d));
      }
      scene.disparity_left(y, x) = d;
      scene.disparity_right(y, x) = d;
    }
  }
  return scene;
}

namespace {

// Nearest working disparity level at the given fraction of the level range.
double level_at(const std::vector<double>& levels, double frac) {
  const int n = static_cast<int>(levels.size());
  const int idx = std::clamp(static_cast<int>(std::lround(frac * (n - 1))), 0, n - 1);
  return levels[idx];
}

}  // namespace

std::vector<Scene> make_toy_scenes(int height, int width, const OpticalConfig& config,
                                   uint64_t seed) {
  const std::vector<double> levels = config.disparity_levels();
  auto lvl = [&](double f) { return level_at(levels, f); };

  // Depth structure must stay coarser than the blur kernels (tens of pixels),
  // or every window sees a mixture of shifts and block matching carries no
  // signal. Three fronto planes at levels where matching quality actually
  // depends on the mask, plus one two-plane scene for boundary structure.
  // The top levels stay out: no phase-only mask matches there at working
  // noise, so they only add floor. Ordered so that consecutive pairs span
  // near and far depths, which keeps small round-robin batches balanced.
  std::vector<Scene> scenes;
  scenes.push_back(make_ramp_scene(height, width, lvl(0.25), lvl(0.25),
                                   Rng::derive(seed, 1), "plane-a"));
  scenes.push_back(make_ramp_scene(height, width, lvl(0.8), lvl(0.8),
                                   Rng::derive(seed, 3), "plane-c"));
  scenes.push_back(make_ramp_scene(height, width, lvl(0.6), lvl(0.6),
                                   Rng::derive(seed, 2), "plane-b"));
  scenes.push_back(make_plane_scene(height, width, {lvl(0.35), lvl(0.75)},
                                    Rng::derive(seed, 4), "duo"));
  return scenes;
}

std::vector<Scene> make_eval_scenes(int height, int width, const OpticalConfig& config,
                                    uint64_t seed) {
  const double lo = config.disparity_min, hi = config.disparity_max;
  const std::vector<double> levels = config.disparity_levels();
  auto lvl = [&](double f) { return level_at(levels, f); };

  // The ramps make every disparity level present so per-level curves have no
  // holes; the plane scenes provide the matchable structure.
  std::vector<Scene> scenes;
  scenes.push_back(
      make_ramp_scene(height, width, lo, hi, Rng::derive(seed, 5), "ramp-up"));
  scenes.push_back(
      make_ramp_scene(height, width, hi, lo, Rng::derive(seed, 6), "ramp-down"));
  scenes.push_back(make_plane_scene(height, width, {lvl(0.25), lvl(0.55), lvl(0.85)},
                                    Rng::derive(seed, 7), "planes-a"));
  scenes.push_back(make_plane_scene(height, width, {lvl(0.1), lvl(0.5), lvl(0.9)},
                                    Rng::derive(seed, 8), "planes-b"));
  return scenes;
}

}  // namespace cs
