// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace nlhr {

/// Uniform linear array centered at lateral 0, elements at depth 0.
/// Coordinates: x lateral, z depth (positive away from the probe face).
struct TransducerArray {
  int num_elements = 0;
  double pitch = 0.0;              // element spacing [m]
  std::vector<double> element_x;   // lateral element positions [m], strictly increasing

  double aperture_min() const { return element_x.front(); }
  double aperture_max() const { return element_x.back(); }
};

TransducerArray build_array(int num_elements, double pitch_m);

/// Plane-wave acquisition parameters. Angles are degrees at this surface and
/// converted to radians where used.
struct AcquisitionConfig {
  double center_frequency = 0.0;   // f0 [Hz]
  double sampling_frequency = 0.0; // fs [Hz]
  double prf = 0.0;                // pulse repetition frequency [Hz]
  double sound_speed = 1540.0;     // c [m/s]
  int num_frames = 0;
  int num_tx_cycles = 5;
  double f_number = 1.25;
  std::vector<double> alpha_deg;   // transmit-receive sub-aperture angles [deg]

  double wavelength() const { return sound_speed / center_frequency; }
};

/// Returns one message per violated invariant; empty means valid.
std::vector<std::string> validate_config(const AcquisitionConfig& cfg);

/// Throws ConfigError listing every violation.
const AcquisitionConfig& validated(const AcquisitionConfig& cfg);

/// Dense rectangular imaging lattice. Pixel ordering is depth-major:
/// pixel = ix * num_z() + iz, so axial runs are contiguous.
struct ImagingGrid {
  std::vector<double> x_coords;  // [m], strictly increasing
  std::vector<double> z_coords;  // [m], strictly increasing, all > 0

  int num_x() const { return static_cast<int>(x_coords.size()); }
  int num_z() const { return static_cast<int>(z_coords.size()); }
  int num_pixels() const { return num_x() * num_z(); }
  int pixel_index(int ix, int iz) const { return ix * num_z() + iz; }
  double pixel_x(int p) const { return x_coords[p / num_z()]; }
  double pixel_z(int p) const { return z_coords[p % num_z()]; }
  double x_spacing() const;  // uniform spacing; throws ConfigError if not uniform
  double z_spacing() const;
};

ImagingGrid make_grid(double x_min, double x_max, double x_step,
                      double z_min, double z_max, double z_step);

std::vector<std::string> validate_grid(const ImagingGrid& grid);

// JSON bindings (keys mirror field names; Hz / meters / degrees as declared).
TransducerArray transducer_from_json_text(const std::string& text);
AcquisitionConfig acquisition_from_json_text(const std::string& text);
ImagingGrid grid_from_json_text(const std::string& text);
std::string acquisition_to_json_text(const AcquisitionConfig& cfg);

}  // namespace nlhr
