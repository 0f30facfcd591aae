#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "codedstereo/config.hpp"
#include "codedstereo/errors.hpp"
#include "codedstereo/manifest.hpp"
#include "codedstereo/mask_io.hpp"
#include "codedstereo/optics.hpp"
#include "codedstereo/pfm.hpp"
#include "codedstereo/png_io.hpp"
#include "codedstereo/rng.hpp"
#include "codedstereo/synth.hpp"
#include "doctest.h"

using namespace cs;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const char* tag) {
  fs::path dir = fs::temp_directory_path() / (std::string("cs_io_") + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Grid random_float_grid(int h, int w, Rng& rng, double lo = -10.0, double hi = 10.0) {
  Grid g(h, w);
  for (size_t i = 0; i < g.size(); ++i)
    g[i] = static_cast<double>(static_cast<float>(rng.uniform(lo, hi)));
  return g;
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("pfm grid round-trips are byte exact") {
  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const int h = 1 + static_cast<int>(rng.uniform_int(0, 39));
    const int w = 1 + static_cast<int>(rng.uniform_int(0, 39));
    Grid g = random_float_grid(h, w, rng);

    const std::vector<uint8_t> bytes = encode_pfm(g);
    PfmFile f = decode_pfm(bytes);
    REQUIRE(!f.color);
    REQUIRE(f.gray.same_shape(g));
    for (size_t i = 0; i < g.size(); ++i) CHECK(f.gray[i] == g[i]);
    CHECK(encode_pfm(f.gray) == bytes);
  }
}

TEST_CASE("pfm color round-trips are byte exact") {
  Rng rng(55);
  for (int trial = 0; trial < 100; ++trial) {
    const int h = 1 + static_cast<int>(rng.uniform_int(0, 20));
    const int w = 1 + static_cast<int>(rng.uniform_int(0, 20));
    Image img(h, w);
    for (int c = 0; c < 3; ++c) img[c] = random_float_grid(h, w, rng, 0.0, 1.0);

    const std::vector<uint8_t> bytes = encode_pfm(img);
    PfmFile f = decode_pfm(bytes);
    REQUIRE(f.color);
    for (int c = 0; c < 3; ++c)
      for (size_t i = 0; i < img[c].size(); ++i) CHECK(f.rgb[c][i] == img[c][i]);
    CHECK(encode_pfm(f.rgb) == bytes);
  }
}

TEST_CASE("pfm stores rows bottom-first") {
  // Hand-built file: 1 column, 2 rows, little-endian floats 2.0 then 1.0.
  std::string header = "Pf\n1 2\n-1\n";
  std::vector<uint8_t> bytes(header.begin(), header.end());
  const float data[2] = {2.0f, 1.0f};
  const uint8_t* raw = reinterpret_cast<const uint8_t*>(data);
  bytes.insert(bytes.end(), raw, raw + 8);

  PfmFile f = decode_pfm(bytes);
  REQUIRE(!f.color);
  REQUIRE(f.gray.height() == 2);
  REQUIRE(f.gray.width() == 1);
  CHECK(f.gray(0, 0) == 1.0);
  CHECK(f.gray(1, 0) == 2.0);
}

TEST_CASE("pfm big-endian scale round-trips too") {
  Rng rng(7);
  Grid g = random_float_grid(5, 9, rng);
  const std::vector<uint8_t> bytes = encode_pfm(g, 1.0);
  PfmFile f = decode_pfm(bytes);
  CHECK(f.scale == 1.0);
  for (size_t i = 0; i < g.size(); ++i) CHECK(f.gray[i] == g[i]);
  CHECK(encode_pfm(f.gray, f.scale) == bytes);
}

TEST_CASE("pfm rejects malformed input with an offset") {
  Rng rng(8);
  Grid g = random_float_grid(4, 4, rng);
  std::vector<uint8_t> bytes = encode_pfm(g);

  SUBCASE("truncated payload") {
    bytes.resize(bytes.size() - 3);
    try {
      decode_pfm(bytes);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(contains(e.what(), "byte offset"));
    }
  }
  SUBCASE("non-finite pixel") {
    const float nan = std::nanf("");
    std::memcpy(bytes.data() + bytes.size() - 4, &nan, 4);
    try {
      decode_pfm(bytes);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(contains(e.what(), "non-finite"));
    }
  }
  SUBCASE("bad magic") {
    bytes[0] = 'Q';
    CHECK_THROWS_AS(decode_pfm(bytes), DataError);
  }
  SUBCASE("empty or zero-scale encode") {
    CHECK_THROWS_AS(encode_pfm(Grid()), DataError);
    CHECK_THROWS_AS(encode_pfm(g, 0.0), DataError);
  }
}

TEST_CASE("pfm file io and the gray convenience reader") {
  const fs::path dir = fresh_dir("pfm");
  Rng rng(9);
  Grid g = random_float_grid(6, 11, rng);
  Image img(3, 5);
  for (int c = 0; c < 3; ++c) img[c] = random_float_grid(3, 5, rng, 0.0, 1.0);

  write_pfm((dir / "g.pfm").string(), g);
  write_pfm((dir / "c.pfm").string(), img);

  Grid g2 = read_pfm_gray((dir / "g.pfm").string());
  for (size_t i = 0; i < g.size(); ++i) CHECK(g2[i] == g[i]);

  try {
    read_pfm_gray((dir / "c.pfm").string());
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(contains(e.what(), "3-channel"));
  }
  CHECK_THROWS_AS(read_pfm((dir / "absent.pfm").string()), DataError);
  fs::remove_all(dir);
}

TEST_CASE("mask text round-trips byte for byte") {
  Rng rng(77);
  OpticalConfig cfg;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 16 + static_cast<int>(rng.uniform_int(0, 3)) * 8;
    PhaseMask m;
    m.height_map = Grid(n, n);
    for (size_t i = 0; i < m.height_map.size(); ++i)
      m.height_map[i] = rng.uniform(0.0, 2e-6);
    m.provenance = (trial % 2) ? "learned" : "flat";
    if (trial % 3 == 0) {
      m.coefficients.resize(7);
      for (auto& c : m.coefficients) c = rng.uniform(-5e-7, 5e-7);
    }

    const std::string t1 = encode_mask(m);
    PhaseMask back = decode_mask(t1);
    CHECK(back.provenance == m.provenance);
    CHECK(back.coefficients.size() == m.coefficients.size());
    // Arbitrary heights snap to the femtometer lattice on the first encode;
    // after that the text is a fixed point.
    CHECK(encode_mask(back) == t1);
    for (size_t i = 0; i < m.height_map.size(); ++i)
      CHECK(std::abs(back.height_map[i] - m.height_map[i]) <= 0.5001e-15);
  }
}

TEST_CASE("lattice-aligned heights survive mask io exactly") {
  OpticalConfig cfg;
  PhaseMask cubic = make_cubic_mask(2e-6, cfg);
  PhaseMask quant = quantize_height(cubic, 50e-9, 16);

  const std::string text = encode_mask(quant);
  PhaseMask back = decode_mask(text);
  CHECK(encode_mask(back) == text);
  // Multiples of the 50 nm step sit on the femtometer lattice, so the only
  // wiggle left is decimal parsing at the last ulp.
  for (size_t i = 0; i < quant.height_map.size(); ++i)
    CHECK(std::abs(back.height_map[i] - quant.height_map[i]) <= 1e-18);
}

TEST_CASE("mask file io and malformed inputs") {
  const fs::path dir = fresh_dir("mask");
  OpticalConfig cfg;
  PhaseMask m = make_cubic_mask(1e-6, cfg);
  m.coefficients = {1e-7, -2e-7};
  write_mask((dir / "m.txt").string(), m);
  PhaseMask back = read_mask((dir / "m.txt").string());
  CHECK(back.height_map.same_shape(m.height_map));
  CHECK(back.coefficients.size() == 2);

  CHECK_THROWS_AS(read_mask((dir / "absent.txt").string()), DataError);

  auto expect_error = [](const std::string& text, const std::string& fragment) {
    try {
      decode_mask(text);
      FAIL("expected DataError for: ", fragment);
    } catch (const DataError& e) {
      CHECK_MESSAGE(contains(e.what(), fragment), e.what());
    }
  };
  expect_error("not-a-mask v1 4\nprovenance x\n", "bad magic");
  expect_error("mask-height v2 4\nprovenance x\n", "unsupported version");
  expect_error("mask-height v1 0\nprovenance x\n", "grid size out of range");
  expect_error("mask-height v1 2\nflat\n0 0\n0 0\n", "provenance");
  expect_error("mask-height v1 2\nprovenance flat\n0 0\n0\n", "truncated");
  expect_error("mask-height v1 2\nprovenance flat\n0 0\n0 0\nextra\n", "trailing");
  expect_error("mask-height v1 2\nprovenance flat\n0 zz\n0 0\n", "bad");

  SUBCASE("provenance must be one word") {
    PhaseMask bad = m;
    bad.provenance = "two words";
    CHECK_THROWS_AS(encode_mask(bad), DataError);
  }
  fs::remove_all(dir);
}

TEST_CASE("config dump and parse are inverse") {
  RunConfig base;
  CHECK(parse_config(dump_config(base)) == base);

  RunConfig custom;
  custom.optical.f_number = 16.0;
  custom.optical.wavelengths = {0.62e-6, 0.53e-6, 0.46e-6};
  custom.optical.num_disparity_levels = 11;
  custom.optical.d0 = 80.0;
  custom.weights.alpha = {2.0, 1.0, 0.5};
  custom.weights.gamma = 0.25;
  custom.sigma = 0.005;
  custom.seed = 123456789;
  custom.manifest_path = "scenes/list.txt";
  custom.mask_path = "masks/learned.txt";
  custom.output_dir = "out";
  CHECK(parse_config(dump_config(custom)) == custom);
}

TEST_CASE("config parser diagnostics") {
  auto expect_error = [](const std::string& text, const std::string& fragment) {
    try {
      parse_config(text);
      FAIL("expected ConfigError for: ", fragment);
    } catch (const ConfigError& e) {
      CHECK_MESSAGE(contains(e.what(), fragment), e.what());
    }
  };

  // A near-miss key suggests the real one.
  expect_error("[optical]\nfocal_lenght = 0.05\n", "focal_length");
  expect_error("[optical]\nf_number = 8\nf_number = 16\n", "duplicate");
  expect_error("[lens]\nfocal_length = 0.05\n", "unknown section");
  expect_error("f_number = 8\n", "section");
  expect_error("[optical]\n= 5\n", "empty key");
  expect_error("[optical]\nf_number eight\n", "f_number");
  expect_error("[optical]\nf_number = eight\n", "expects a number");

  RunConfig c = parse_config("# comment only\n\n[optical]\nf_number = 16 # inline\n");
  CHECK(c.optical.f_number == 16.0);
}

TEST_CASE("load_config checks referenced paths eagerly") {
  const fs::path dir = fresh_dir("cfg");
  {
    std::ofstream out(dir / "bad.ini");
    out << "[run]\nmanifest = absent_manifest.txt\n";
  }
  try {
    load_config((dir / "bad.ini").string());
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(contains(e.what(), "does not exist"));
  }

  {
    std::ofstream out(dir / "list.txt");
    out << "# empty manifest placeholder\n";
    std::ofstream cfg(dir / "good.ini");
    cfg << "[run]\nmanifest = list.txt\nsigma = 0.01\n";
  }
  RunConfig c = load_config((dir / "good.ini").string());
  CHECK(c.sigma == 0.01);
  // Relative references come back resolved against the config directory.
  CHECK(c.manifest_path == (dir / "list.txt").string());
  fs::remove_all(dir);
}

TEST_CASE("png write and read at both depths") {
  const fs::path dir = fresh_dir("png");
  Image img = make_noise_texture(24, 31, 4);

  write_png((dir / "c8.png").string(), img, 8);
  Image back8 = read_png((dir / "c8.png").string());
  REQUIRE(back8[0].same_shape(img[0]));
  double worst = 0.0;
  for (int c = 0; c < 3; ++c)
    for (size_t i = 0; i < img[c].size(); ++i)
      worst = std::max(worst, std::abs(back8[c][i] - img[c][i]));
  CHECK(worst <= 0.5 / 255.0 + 1e-12);

  write_png((dir / "c16.png").string(), img, 16);
  Image back16 = read_png((dir / "c16.png").string());
  worst = 0.0;
  for (int c = 0; c < 3; ++c)
    for (size_t i = 0; i < img[c].size(); ++i)
      worst = std::max(worst, std::abs(back16[c][i] - img[c][i]));
  CHECK(worst <= 0.5 / 65535.0 + 1e-12);

  // Written pixels are quantized, so a second write/read cycle is exact.
  write_png((dir / "c8b.png").string(), back8, 8);
  Image again = read_png((dir / "c8b.png").string());
  for (int c = 0; c < 3; ++c)
    for (size_t i = 0; i < again[c].size(); ++i) CHECK(again[c][i] == back8[c][i]);
  fs::remove_all(dir);
}

TEST_CASE("gray png readers and the raw quanta path") {
  const fs::path dir = fresh_dir("gpng");
  Grid g(5, 7);
  for (size_t i = 0; i < g.size(); ++i) g[i] = static_cast<double>(i) / 255.0;

  write_png_gray((dir / "g8.png").string(), g, 8);
  Grid norm = read_png_gray((dir / "g8.png").string());
  Grid raw = read_png_gray_raw((dir / "g8.png").string());
  for (size_t i = 0; i < g.size(); ++i) {
    CHECK(raw[i] == static_cast<double>(i));
    CHECK(norm[i] == doctest::Approx(g[i]).epsilon(1e-12));
  }

  Image gray_as_rgb = read_png((dir / "g8.png").string());
  for (size_t i = 0; i < g.size(); ++i) {
    CHECK(gray_as_rgb[0][i] == gray_as_rgb[1][i]);
    CHECK(gray_as_rgb[1][i] == gray_as_rgb[2][i]);
  }

  Image color = make_noise_texture(5, 7, 6);
  write_png((dir / "c.png").string(), color, 8);
  CHECK_THROWS_AS(read_png_gray((dir / "c.png").string()), DataError);

  write_png_gray((dir / "g16.png").string(), g, 16);
  Grid raw16 = read_png_gray_raw((dir / "g16.png").string());
  CHECK(raw16(0, 1) == doctest::Approx(257.0).epsilon(1e-12));
  fs::remove_all(dir);
}

TEST_CASE("scene manifest end-to-end") {
  const fs::path dir = fresh_dir("manifest");
  OpticalConfig cfg;

  Scene s = make_plane_scene(40, 260, {48.0}, 21, "plane");
  write_png((dir / "l.png").string(), s.texture_left, 16);
  write_png((dir / "r.png").string(), s.texture_right, 16);
  write_pfm((dir / "dl.pfm").string(), s.disparity_left);
  write_pfm((dir / "dr.pfm").string(), s.disparity_right);

  SUBCASE("pfm disparities load as stored") {
    {
      std::ofstream out(dir / "list.txt");
      out << "# one scene\n";
      out << "left_rgb=l.png right_rgb=r.png left_disp=dl.pfm right_disp=dr.pfm id=s0\n";
    }
    ManifestResult res = load_scene_manifest((dir / "list.txt").string(), cfg);
    REQUIRE(res.scenes.size() == 1);
    CHECK(res.rejected.empty());
    CHECK(res.scenes[0].id == "s0");
    CHECK(res.scenes[0].disparity_left(3, 100) == doctest::Approx(48.0).epsilon(1e-6));
    const double px = s.texture_left[1](7, 33);
    CHECK(std::abs(res.scenes[0].texture_left[1](7, 33) - px) <= 0.5 / 65535.0 + 1e-12);
  }

  SUBCASE("png disparities apply scale and offset to raw quanta") {
    Grid quanta(40, 260, 182.0);  // (182 - 134) * 1.0 = 48
    write_png_gray((dir / "d.png").string(), Grid(40, 260, 182.0 / 255.0), 8);
    {
      std::ofstream out(dir / "list.txt");
      out << "left_rgb=l.png right_rgb=r.png left_disp=d.png right_disp=d.png"
          << " disp_offset=-134 id=png-disp\n";
    }
    ManifestResult res = load_scene_manifest((dir / "list.txt").string(), cfg);
    REQUIRE(res.scenes.size() == 1);
    CHECK(res.scenes[0].disparity_left(0, 0) == doctest::Approx(48.0).epsilon(1e-9));
  }

  SUBCASE("missing files fail before any decoding") {
    {
      std::ofstream out(dir / "list.txt");
      out << "left_rgb=l.png right_rgb=r.png left_disp=dl.pfm right_disp=gone.pfm\n";
    }
    try {
      load_scene_manifest((dir / "list.txt").string(), cfg);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(contains(e.what(), "missing file"));
    }
  }

  SUBCASE("shape mismatches are rejected with a reason") {
    Scene small = make_plane_scene(20, 220, {48.0}, 22, "small");
    write_png((dir / "ls.png").string(), small.texture_left, 8);
    {
      std::ofstream out(dir / "list.txt");
      out << "left_rgb=ls.png right_rgb=r.png left_disp=dl.pfm right_disp=dr.pfm id=bad\n";
      out << "left_rgb=l.png right_rgb=r.png left_disp=dl.pfm right_disp=dr.pfm id=good\n";
    }
    ManifestResult res = load_scene_manifest((dir / "list.txt").string(), cfg);
    REQUIRE(res.scenes.size() == 1);
    CHECK(res.scenes[0].id == "good");
    REQUIRE(res.rejected.size() == 1);
    CHECK(contains(res.rejected[0], "shape mismatch"));
  }

  SUBCASE("out-of-range disparities are clamped or drop the scene") {
    Grid wild(40, 260, 0.0);
    for (int x = 0; x < 260; ++x)
      for (int y = 0; y < 40; ++y) wild(y, x) = (x % 4 == 0) ? 500.0 : 48.0;
    write_pfm((dir / "wild.pfm").string(), wild);
    {
      std::ofstream out(dir / "list.txt");
      out << "left_rgb=l.png right_rgb=r.png left_disp=wild.pfm right_disp=dr.pfm id=w\n";
    }
    // A quarter clamped: kept, but clamped to the working range.
    ManifestResult res = load_scene_manifest((dir / "list.txt").string(), cfg);
    REQUIRE(res.scenes.size() == 1);
    CHECK(res.scenes[0].disparity_left(0, 0) == doctest::Approx(cfg.disparity_max));

    Grid all_wild(40, 260, 7000.0);
    write_pfm((dir / "aw.pfm").string(), all_wild);
    {
      std::ofstream out(dir / "list2.txt");
      out << "left_rgb=l.png right_rgb=r.png left_disp=aw.pfm right_disp=aw.pfm id=aw\n";
    }
    try {
      load_scene_manifest((dir / "list2.txt").string(), cfg);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(contains(e.what(), "every scene was rejected"));
      CHECK(contains(e.what(), "disp_scale"));
    }
  }

  SUBCASE("crops are centered or seeded") {
    {
      std::ofstream out(dir / "list.txt");
      out << "left_rgb=l.png right_rgb=r.png left_disp=dl.pfm right_disp=dr.pfm id=s\n";
    }
    ManifestResult centered =
        load_scene_manifest((dir / "list.txt").string(), cfg, 16, 64, 0);
    REQUIRE(centered.scenes.size() == 1);
    CHECK(centered.scenes[0].texture_left.height() == 16);
    CHECK(centered.scenes[0].texture_left.width() == 64);
    // Center window starts at (12, 98).
    CHECK(centered.scenes[0].texture_left[0](0, 0) ==
          doctest::Approx(
              load_scene_manifest((dir / "list.txt").string(), cfg).scenes[0]
                  .texture_left[0](12, 98))
              .epsilon(1e-12));

    ManifestResult seeded =
        load_scene_manifest((dir / "list.txt").string(), cfg, 16, 64, 5);
    ManifestResult seeded2 =
        load_scene_manifest((dir / "list.txt").string(), cfg, 16, 64, 5);
    CHECK(seeded.scenes[0].texture_left[0](0, 0) == seeded2.scenes[0].texture_left[0](0, 0));

    CHECK_THROWS_AS(load_scene_manifest((dir / "list.txt").string(), cfg, 16, 0, 0),
                    ConfigError);
    // A crop larger than the only scene rejects it, and an empty survivor
    // set is an error.
    try {
      load_scene_manifest((dir / "list.txt").string(), cfg, 64, 300, 0);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(contains(e.what(), "smaller than the requested crop"));
    }
  }

  SUBCASE("parser rejects unknown keys and empty manifests") {
    {
      std::ofstream out(dir / "list.txt");
      out << "left_rgb=l.png right_rgb=r.png left_disp=dl.pfm right_disp=dr.pfm wat=1\n";
    }
    CHECK_THROWS_AS(load_scene_manifest((dir / "list.txt").string(), cfg), DataError);
    {
      std::ofstream out(dir / "empty.txt");
      out << "# nothing\n";
    }
    CHECK_THROWS_AS(load_scene_manifest((dir / "empty.txt").string(), cfg), DataError);
  }

  fs::remove_all(dir);
}
