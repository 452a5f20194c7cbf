// SPDX-License-Identifier: Apache-2.0
#include "nlhr/geometry.hpp"

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nlhr/errors.hpp"

namespace nlhr {

using json = nlohmann::json;

TransducerArray build_array(int num_elements, double pitch_m) {
  if (num_elements < 2) throw ConfigError("build_array: num_elements must be >= 2");
  if (!(pitch_m > 0.0)) throw ConfigError("build_array: pitch must be positive");
  TransducerArray a;
  a.num_elements = num_elements;
  a.pitch = pitch_m;
  a.element_x.resize(static_cast<std::size_t>(num_elements));
  const double half = 0.5 * (num_elements - 1);
  for (int i = 0; i < num_elements; ++i) a.element_x[i] = (i - half) * pitch_m;
  return a;
}

std::vector<std::string> validate_config(const AcquisitionConfig& cfg) {
  std::vector<std::string> errs;
  if (!(cfg.center_frequency > 0.0)) errs.push_back("center_frequency: must be positive");
  if (!(cfg.sampling_frequency > 0.0)) errs.push_back("sampling_frequency: must be positive");
  if (cfg.center_frequency > 0.0 && cfg.sampling_frequency < 4.0 * cfg.center_frequency)
    errs.push_back("sampling_frequency: must be >= 4 * center_frequency");
  if (!(cfg.prf > 0.0)) errs.push_back("prf: must be positive");
  if (!(cfg.sound_speed > 0.0)) errs.push_back("sound_speed: must be positive");
  if (cfg.num_frames < 1) errs.push_back("num_frames: must be >= 1");
  if (cfg.num_tx_cycles < 1) errs.push_back("num_tx_cycles: must be >= 1");
  if (!(cfg.f_number > 0.0)) errs.push_back("f_number: must be positive");
  if (cfg.alpha_deg.empty()) errs.push_back("alpha_set: must not be empty");
  for (double a : cfg.alpha_deg)
    if (!(a > 0.0 && a < 45.0)) {
      errs.push_back("alpha_set: all angles must lie in (0, 45) degrees");
      break;
    }
  return errs;
}

const AcquisitionConfig& validated(const AcquisitionConfig& cfg) {
  auto errs = validate_config(cfg);
  if (!errs.empty()) {
    std::ostringstream os;
    os << "invalid acquisition config:";
    for (const auto& e : errs) os << "\n  - " << e;
    throw ConfigError(os.str());
  }
  return cfg;
}

namespace {
double uniform_spacing(const std::vector<double>& v, const char* axis) {
  if (v.size() < 2) throw ConfigError(std::string(axis) + ": need at least 2 coordinates");
  const double step = v[1] - v[0];
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    double d = v[i + 1] - v[i];
    if (std::abs(d - step) > 1e-9 * std::abs(step))
      throw ConfigError(std::string(axis) + ": coordinates are not uniformly spaced");
  }
  return step;
}
}  // namespace

double ImagingGrid::x_spacing() const { return uniform_spacing(x_coords, "x_coords"); }
double ImagingGrid::z_spacing() const { return uniform_spacing(z_coords, "z_coords"); }

ImagingGrid make_grid(double x_min, double x_max, double x_step,
                      double z_min, double z_max, double z_step) {
  if (!(x_step > 0.0) || !(z_step > 0.0)) throw ConfigError("grid: steps must be positive");
  if (!(x_max >= x_min) || !(z_max > z_min)) throw ConfigError("grid: empty extent");
  ImagingGrid g;
  const int nx = static_cast<int>(std::floor((x_max - x_min) / x_step + 1e-9)) + 1;
  const int nz = static_cast<int>(std::floor((z_max - z_min) / z_step + 1e-9)) + 1;
  g.x_coords.resize(static_cast<std::size_t>(nx));
  g.z_coords.resize(static_cast<std::size_t>(nz));
  for (int i = 0; i < nx; ++i) g.x_coords[i] = x_min + i * x_step;
  for (int i = 0; i < nz; ++i) g.z_coords[i] = z_min + i * z_step;
  auto errs = validate_grid(g);
  if (!errs.empty()) throw ConfigError("grid: " + errs.front());
  return g;
}

std::vector<std::string> validate_grid(const ImagingGrid& grid) {
  std::vector<std::string> errs;
  auto strictly_increasing = [](const std::vector<double>& v) {
    for (std::size_t i = 0; i + 1 < v.size(); ++i)
      if (!(v[i + 1] > v[i])) return false;
    return true;
  };
  if (grid.x_coords.empty() || grid.z_coords.empty())
    errs.push_back("coordinate lists must not be empty");
  if (!strictly_increasing(grid.x_coords)) errs.push_back("x_coords: must be strictly increasing");
  if (!strictly_increasing(grid.z_coords)) errs.push_back("z_coords: must be strictly increasing");
  for (double z : grid.z_coords)
    if (!(z > 0.0)) {
      errs.push_back("z_coords: all depths must be strictly positive");
      break;
    }
  return errs;
}

namespace {
json parse(const std::string& text, const char* what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ConfigError(std::string(what) + ": malformed JSON");
  return j;
}

template <typename T>
T require(const json& j, const char* key, const char* what) {
  if (!j.contains(key))
    throw ConfigError(std::string(what) + ": missing key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string(what) + ": key '" + key + "' has the wrong type");
  }
}
}  // namespace

TransducerArray transducer_from_json_text(const std::string& text) {
  json j = parse(text, "transducer");
  return build_array(require<int>(j, "num_elements", "transducer"),
                     require<double>(j, "pitch", "transducer"));
}

AcquisitionConfig acquisition_from_json_text(const std::string& text) {
  json j = parse(text, "acquisition");
  AcquisitionConfig cfg;
  cfg.center_frequency = require<double>(j, "center_frequency", "acquisition");
  cfg.sampling_frequency = require<double>(j, "sampling_frequency", "acquisition");
  cfg.prf = require<double>(j, "prf", "acquisition");
  cfg.sound_speed = require<double>(j, "sound_speed", "acquisition");
  cfg.num_frames = require<int>(j, "num_frames", "acquisition");
  cfg.num_tx_cycles = require<int>(j, "num_tx_cycles", "acquisition");
  cfg.f_number = require<double>(j, "f_number", "acquisition");
  cfg.alpha_deg = require<std::vector<double>>(j, "alpha_set", "acquisition");
  // "wavelength" is derived; an explicit key is accepted but ignored.
  return cfg;
}

ImagingGrid grid_from_json_text(const std::string& text) {
  json j = parse(text, "grid");
  if (j.contains("x_coords") || j.contains("z_coords")) {
    ImagingGrid g;
    g.x_coords = require<std::vector<double>>(j, "x_coords", "grid");
    g.z_coords = require<std::vector<double>>(j, "z_coords", "grid");
    auto errs = validate_grid(g);
    if (!errs.empty()) throw ConfigError("grid: " + errs.front());
    return g;
  }
  return make_grid(require<double>(j, "x_min", "grid"), require<double>(j, "x_max", "grid"),
                   require<double>(j, "x_spacing", "grid"), require<double>(j, "z_min", "grid"),
                   require<double>(j, "z_max", "grid"), require<double>(j, "z_spacing", "grid"));
}

std::string acquisition_to_json_text(const AcquisitionConfig& cfg) {
  json j;
  j["center_frequency"] = cfg.center_frequency;
  j["sampling_frequency"] = cfg.sampling_frequency;
  j["prf"] = cfg.prf;
  j["sound_speed"] = cfg.sound_speed;
  j["num_frames"] = cfg.num_frames;
  j["num_tx_cycles"] = cfg.num_tx_cycles;
  j["f_number"] = cfg.f_number;
  j["alpha_set"] = cfg.alpha_deg;
  j["wavelength"] = cfg.wavelength();
  return j.dump(2);
}

}  // namespace nlhr
