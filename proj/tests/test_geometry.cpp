#include <doctest.h>

#include <algorithm>

#include "nlhr/errors.hpp"
#include "nlhr/geometry.hpp"
#include "nlhr/rng.hpp"

using namespace nlhr;

TEST_CASE("build_array spans the expected 128-element aperture") {
  const auto a = build_array(128, 0.1925e-3);
  const double half = 63.5 * 0.1925e-3;
  CHECK(a.element_x.front() == doctest::Approx(-half).epsilon(1e-12));
  CHECK(a.element_x.back() == doctest::Approx(half).epsilon(1e-12));
}

TEST_CASE("build_array symmetry cases") {
  const auto two = build_array(2, 1e-3);
  CHECK(two.element_x[0] == doctest::Approx(-0.5e-3));
  CHECK(two.element_x[1] == doctest::Approx(0.5e-3));

  const auto three = build_array(3, 0.3e-3);
  CHECK(three.element_x[0] == doctest::Approx(-0.3e-3));
  CHECK(three.element_x[1] == doctest::Approx(0.0));
  CHECK(three.element_x[2] == doctest::Approx(0.3e-3));
}

TEST_CASE("build_array rejects degenerate input") {
  CHECK_THROWS_AS(build_array(1, 1e-3), ConfigError);
  CHECK_THROWS_AS(build_array(16, 0.0), ConfigError);
  CHECK_THROWS_AS(build_array(16, -1e-3), ConfigError);
}

TEST_CASE("array is centered and uniformly pitched") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform(0, 200));
    const double pitch = rng.uniform(0.05e-3, 0.5e-3);
    const auto a = build_array(n, pitch);
    double mean = 0.0;
    for (double x : a.element_x) mean += x;
    mean /= n;
    CHECK(std::abs(mean) < 1e-12);
    for (int i = 0; i + 1 < n; ++i)
      CHECK(a.element_x[i + 1] - a.element_x[i] == doctest::Approx(pitch).epsilon(1e-12));
    // mirror symmetry: reverse and negate reproduces the same coordinates
    auto mirrored = a.element_x;
    std::reverse(mirrored.begin(), mirrored.end());
    for (double& x : mirrored) x = -x;
    for (int i = 0; i < n; ++i)
      CHECK(mirrored[i] == doctest::Approx(a.element_x[i]).epsilon(1e-12));
  }
}

TEST_CASE("validate_config accepts the full-scale simulation profile") {
  AcquisitionConfig cfg;
  cfg.center_frequency = 8e6;
  cfg.sampling_frequency = 100e6;
  cfg.prf = 10e3;
  cfg.sound_speed = 1540.0;
  cfg.num_frames = 32;
  cfg.num_tx_cycles = 5;
  cfg.f_number = 1.25;
  cfg.alpha_deg = {6, 9, 12, 15};
  CHECK(validate_config(cfg).empty());
  CHECK(cfg.wavelength() == doctest::Approx(0.1925e-3).epsilon(1e-12));
  // wavelength * f0 == c exactly
  CHECK(cfg.wavelength() * cfg.center_frequency == doctest::Approx(cfg.sound_speed).epsilon(1e-15));
}

TEST_CASE("validate_config reports every violation with the field name") {
  AcquisitionConfig cfg;
  cfg.center_frequency = 8e6;
  cfg.sampling_frequency = 16e6;  // < 4 f0
  cfg.prf = 10e3;
  cfg.sound_speed = 1540.0;
  cfg.num_frames = 32;
  cfg.num_tx_cycles = 5;
  cfg.f_number = 1.25;
  cfg.alpha_deg = {};  // empty
  const auto errs = validate_config(cfg);
  REQUIRE(errs.size() == 2);
  CHECK(errs[0].find("sampling_frequency") != std::string::npos);
  CHECK(errs[1].find("alpha_set") != std::string::npos);
  CHECK_THROWS_AS(validated(cfg), ConfigError);
}

TEST_CASE("alpha outside (0, 45) rejected") {
  AcquisitionConfig cfg;
  cfg.center_frequency = 5e6;
  cfg.sampling_frequency = 20e6;
  cfg.prf = 10e3;
  cfg.num_frames = 8;
  cfg.alpha_deg = {9.0, 45.0};
  const auto errs = validate_config(cfg);
  REQUIRE(errs.size() == 1);
  CHECK(errs[0].find("alpha_set") != std::string::npos);
}

TEST_CASE("grid is depth-major with positive depths") {
  const auto g = make_grid(-1e-3, 1e-3, 0.5e-3, 10e-3, 12e-3, 0.25e-3);
  CHECK(g.num_x() == 5);
  CHECK(g.num_z() == 9);
  CHECK(g.num_pixels() == 45);
  // z runs fastest
  CHECK(g.pixel_index(0, 1) == 1);
  CHECK(g.pixel_index(1, 0) == 9);
  CHECK(g.pixel_x(10) == doctest::Approx(-0.5e-3));
  CHECK(g.pixel_z(10) == doctest::Approx(10.25e-3));
  CHECK(validate_grid(g).empty());

  ImagingGrid bad = g;
  bad.z_coords[0] = -1e-3;
  CHECK(!validate_grid(bad).empty());
}

TEST_CASE("json round trip for the acquisition config") {
  AcquisitionConfig cfg;
  cfg.center_frequency = 8e6;
  cfg.sampling_frequency = 100e6;
  cfg.prf = 10e3;
  cfg.sound_speed = 1540.0;
  cfg.num_frames = 64;
  cfg.num_tx_cycles = 5;
  cfg.f_number = 1.25;
  cfg.alpha_deg = {6, 9, 12, 15};
  const auto back = acquisition_from_json_text(acquisition_to_json_text(cfg));
  CHECK(back.center_frequency == cfg.center_frequency);
  CHECK(back.sampling_frequency == cfg.sampling_frequency);
  CHECK(back.alpha_deg == cfg.alpha_deg);

  CHECK_THROWS_AS(acquisition_from_json_text("{"), ConfigError);
  CHECK_THROWS_AS(acquisition_from_json_text("{}"), ConfigError);
}

TEST_CASE("transducer and grid json") {
  const auto a = transducer_from_json_text(R"({"num_elements": 64, "pitch": 3.08e-4})");
  CHECK(a.num_elements == 64);
  const auto g = grid_from_json_text(
      R"({"x_min": -1e-3, "x_max": 1e-3, "x_spacing": 5e-4, "z_min": 1e-2, "z_max": 1.1e-2, "z_spacing": 1e-4})");
  CHECK(g.num_x() == 5);
  CHECK(g.z_coords.front() == doctest::Approx(1e-2));
}
