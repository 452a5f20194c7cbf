#include <doctest.h>

#include <cstdio>
#include <unistd.h>
#include <filesystem>
#include <fstream>

#include "nlhr/io.hpp"
#include "nlhr/rf_frameset.hpp"
#include "nlhr/rng.hpp"
#include "nlhr/sha256.hpp"

using namespace nlhr;
namespace fs = std::filesystem;

namespace {
struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("nlhr_io_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};
}  // namespace

TEST_CASE("sha256 known vectors") {
  CHECK(sha256_hex(std::string("")) ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex(std::string("abc")) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex(std::string("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq")) ==
        "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST_CASE("rf round trip preserves samples and metadata") {
  TempDir tmp;
  RFFrameSet rf;
  rf.num_channels = 3;
  rf.num_samples = 17;
  rf.num_frames = 5;
  rf.sampling_frequency = 20e6;
  rf.prf_effective = 10e3;
  rf.center_frequency = 5e6;
  rf.sound_speed = 1540.0;
  rf.seed = 99;
  rf.allocate();
  Rng rng(1);
  for (auto& v : rf.samples) v = static_cast<float>(rng.normal());

  save_rf(rf, tmp.path / "rf.bin");
  const auto back = load_rf(tmp.path / "rf.bin");
  CHECK(back.num_channels == 3);
  CHECK(back.num_samples == 17);
  CHECK(back.num_frames == 5);
  CHECK(back.samples == rf.samples);
  CHECK(back.seed == 99);
  CHECK(back.sampling_frequency == rf.sampling_frequency);

  // on-disk order is (channel, sample, frame): frame index runs fastest
  std::ifstream in(tmp.path / "rf.bin", std::ios::binary);
  std::vector<float> flat(3 * 17 * 5);
  in.read(reinterpret_cast<char*>(flat.data()), static_cast<std::streamsize>(flat.size() * 4));
  for (int c = 0; c < 3; ++c)
    for (int s = 0; s < 17; ++s)
      for (int f = 0; f < 5; ++f)
        CHECK(flat[(c * 17 + s) * 5 + f] == rf.at(f, c, s));
}

TEST_CASE("slow-time ensemble round trip") {
  TempDir tmp;
  SlowTimeEnsemble st;
  st.tag = BeamformerKind::nlhr;
  st.carrier_hz = 10e6;
  st.prf_effective = 20e3;
  st.alpha_deg = {6.0, 9.0};
  st.num_points = 7;
  st.num_frames = 4;
  const std::size_t n = 2 * 7 * 4;
  st.left.resize(n);
  st.right.resize(n);
  Rng rng(2);
  for (auto& v : st.left) v = {static_cast<float>(rng.normal()), static_cast<float>(rng.normal())};
  for (auto& v : st.right) v = {static_cast<float>(rng.normal()), static_cast<float>(rng.normal())};
  st.left_valid.assign(2 * 7, 1);
  st.right_valid.assign(2 * 7, 1);
  st.left_valid[3] = 0;

  save_slowtime(st, tmp.path / "ens", "slowtime");
  const auto back = load_slowtime(tmp.path / "ens", "slowtime");
  CHECK(back.tag == BeamformerKind::nlhr);
  CHECK(back.carrier_hz == st.carrier_hz);
  CHECK(back.alpha_deg == st.alpha_deg);
  CHECK(back.left == st.left);
  CHECK(back.right == st.right);
  CHECK(back.left_valid == st.left_valid);
}

TEST_CASE("velocity field round trip") {
  TempDir tmp;
  const auto grid = make_grid(-1e-3, 1e-3, 1e-3, 10e-3, 11e-3, 0.5e-3);
  VelocityField f;
  f.num_points = grid.num_pixels();
  f.num_windows = 2;
  f.window_time_s = {1e-3, 3e-3};
  const std::size_t n = static_cast<std::size_t>(2) * f.num_points;
  f.magnitude.assign(n, 0.25f);
  f.angle_deg.assign(n, 90.0f);
  f.axial.assign(n, 0.0f);
  f.lateral.assign(n, 0.25f);
  f.valid.assign(n, 1);
  f.valid[1] = 0;
  save_velocity_field(f, grid, tmp.path / "velocity.csv", tmp.path / "velocity.bin");
  const auto back = load_velocity_field(tmp.path / "velocity.bin");
  CHECK(back.num_points == f.num_points);
  CHECK(back.num_windows == 2);
  CHECK(back.magnitude == f.magnitude);
  CHECK(back.valid == f.valid);
  CHECK(fs::exists(tmp.path / "velocity.csv"));
}

TEST_CASE("pgm heatmap writes a valid P5 header and sidecar") {
  TempDir tmp;
  std::vector<float> vals(12, 0.5f);
  std::vector<std::uint8_t> valid(12, 1);
  write_pgm_heatmap(tmp.path / "map.pgm", 3, 4, vals, valid, 0.0, 1.0, "test");
  std::ifstream in(tmp.path / "map.pgm", std::ios::binary);
  std::string magic;
  int w, h, maxval;
  in >> magic >> w >> h >> maxval;
  CHECK(magic == "P5");
  CHECK(w == 3);
  CHECK(h == 4);
  CHECK(maxval == 255);
  in.get();
  std::vector<std::uint8_t> data(12);
  in.read(reinterpret_cast<char*>(data.data()), 12);
  for (auto b : data) CHECK(static_cast<int>(b) == 128);
  CHECK(fs::exists(tmp.path / "map.pgm.json"));
}

TEST_CASE("manifest entries hash file contents") {
  TempDir tmp;
  std::ofstream(tmp.path / "a.txt") << "hello\n";
  const auto e = manifest_entry(tmp.path, tmp.path / "a.txt");
  CHECK(e.path == "a.txt");
  CHECK(e.bytes == 6);
  CHECK(e.sha256 == sha256_hex(std::string("hello\n")));
  Manifest m;
  m.files.push_back(e);
  m.config_echo = "{\"k\": 1}";
  write_manifest(m, tmp.path / "manifest.json");
  CHECK(fs::exists(tmp.path / "manifest.json"));
}

TEST_CASE("format_number is deterministic and compact") {
  CHECK(format_number(0.25) == "0.25");
  CHECK(format_number(1540.0) == "1540");
  CHECK(format_number(-1.5e-4) == "-0.00015");
}
