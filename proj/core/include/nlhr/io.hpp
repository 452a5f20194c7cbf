// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nlhr/beamforming.hpp"
#include "nlhr/clutter.hpp"
#include "nlhr/metrics.hpp"
#include "nlhr/velocity.hpp"

namespace nlhr {

/// Deterministic number formatting for text artifacts ("%.9g").
std::string format_number(double v);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  void row(const std::vector<double>& values);
  void raw_row(const std::vector<std::string>& cells);

 private:
  std::string buffer_;
  std::filesystem::path path_;

 public:
  ~CsvWriter();
};

/// 8-bit binary PGM plus a JSON sidecar recording the linear colormap range.
void write_pgm_heatmap(const std::filesystem::path& path, int width, int height,
                       const std::vector<float>& values, const std::vector<std::uint8_t>& valid,
                       double vmin, double vmax, const std::string& quantity);

// Slow-time ensembles persist as one interleaved-complex float32 cube per
// (alpha, side) plus a JSON sidecar carrying tag/alpha/side/carrier/prf.
void save_slowtime(const SlowTimeEnsemble& st, const std::filesystem::path& dir,
                   const std::string& stem);
SlowTimeEnsemble load_slowtime(const std::filesystem::path& dir, const std::string& stem);

void save_velocity_field(const VelocityField& field, const ImagingGrid& grid,
                         const std::filesystem::path& csv_path,
                         const std::filesystem::path& bin_path);
VelocityField load_velocity_field(const std::filesystem::path& bin_path);

void write_sv_report_csv(const std::filesystem::path& path,
                         const std::vector<std::pair<std::string, SvdReport>>& reports);

struct ManifestEntry {
  std::string path;  // relative to the output directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct Manifest {
  std::vector<ManifestEntry> files;
  std::string config_echo;  // JSON of the experiment config that produced the artifacts
};

ManifestEntry manifest_entry(const std::filesystem::path& root,
                             const std::filesystem::path& file);
void write_manifest(const Manifest& m, const std::filesystem::path& path);

}  // namespace nlhr
