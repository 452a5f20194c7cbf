// SPDX-License-Identifier: Apache-2.0
#include "nlhr/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "nlhr/errors.hpp"
#include "nlhr/sha256.hpp"

namespace nlhr {

using json = nlohmann::json;

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : path_(path) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += header[i];
  }
  buffer_ += '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += format_number(values[i]);
  }
  buffer_ += '\n';
}

void CsvWriter::raw_row(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += cells[i];
  }
  buffer_ += '\n';
}

CsvWriter::~CsvWriter() {
  std::ofstream out(path_, std::ios::binary);
  out << buffer_;
}

void write_pgm_heatmap(const std::filesystem::path& path, int width, int height,
                       const std::vector<float>& values, const std::vector<std::uint8_t>& valid,
                       double vmin, double vmax, const std::string& quantity) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PipelineError("write_pgm: cannot open " + path.string());
  out << "P5\n" << width << " " << height << "\n255\n";
  const double span = vmax > vmin ? vmax - vmin : 1.0;
  std::vector<std::uint8_t> row(static_cast<std::size_t>(width));
  // rows run over depth, columns over lateral position; values are [x][z]
  for (int iz = 0; iz < height; ++iz) {
    for (int ix = 0; ix < width; ++ix) {
      const std::size_t p = static_cast<std::size_t>(ix) * height + iz;
      if (!valid.empty() && !valid[p]) {
        row[ix] = 0;
        continue;
      }
      double t = (values[p] - vmin) / span;
      t = std::clamp(t, 0.0, 1.0);
      row[ix] = static_cast<std::uint8_t>(std::lround(t * 255.0));
    }
    out.write(reinterpret_cast<const char*>(row.data()), width);
  }
  json side;
  side["width"] = width;
  side["height"] = height;
  side["vmin"] = vmin;
  side["vmax"] = vmax;
  side["quantity"] = quantity;
  std::ofstream sout(path.string() + ".json");
  sout << side.dump(2) << "\n";
}

namespace {
std::string side_name(Side s) { return s == Side::left ? "left" : "right"; }

void write_complex_cube(const std::filesystem::path& bin,
                        const std::vector<std::complex<float>>& data, std::size_t offset,
                        std::size_t count) {
  std::ofstream out(bin, std::ios::binary);
  if (!out) throw PipelineError("save_slowtime: cannot open " + bin.string());
  out.write(reinterpret_cast<const char*>(data.data() + offset),
            static_cast<std::streamsize>(count * sizeof(std::complex<float>)));
}
}  // namespace

void save_slowtime(const SlowTimeEnsemble& st, const std::filesystem::path& dir,
                   const std::string& stem) {
  std::filesystem::create_directories(dir);
  const std::size_t per_cube = static_cast<std::size_t>(st.num_points) * st.num_frames;
  json meta;
  meta["beamformer_tag"] = st.tag == BeamformerKind::nlhr ? "nlhr" : "das";
  meta["carrier_hz"] = st.carrier_hz;
  meta["prf_effective"] = st.prf_effective;
  meta["alpha_set"] = st.alpha_deg;
  meta["dims"] = {{"points", st.num_points}, {"frames", st.num_frames}};
  meta["complex"] = true;
  json cubes = json::array();
  for (std::size_t a = 0; a < st.alpha_deg.size(); ++a) {
    for (Side side : {Side::left, Side::right}) {
      const auto& data = side == Side::left ? st.left : st.right;
      const auto& valid = side == Side::left ? st.left_valid : st.right_valid;
      char name[128];
      std::snprintf(name, sizeof(name), "%s_a%02d_%s.bin", stem.c_str(), static_cast<int>(a),
                    side_name(side).c_str());
      write_complex_cube(dir / name, data, a * per_cube, per_cube);
      std::string mask_name = std::string(name) + ".mask";
      std::ofstream mout(dir / mask_name, std::ios::binary);
      mout.write(reinterpret_cast<const char*>(valid.data() + a * st.num_points),
                 st.num_points);
      json c;
      c["file"] = name;
      c["mask"] = mask_name;
      c["alpha"] = st.alpha_deg[a];
      c["side"] = side_name(side);
      cubes.push_back(c);
    }
  }
  meta["cubes"] = cubes;
  std::ofstream mo(dir / (stem + ".json"));
  mo << meta.dump(2) << "\n";
  if (!mo) throw PipelineError("save_slowtime: sidecar write failed");
}

SlowTimeEnsemble load_slowtime(const std::filesystem::path& dir, const std::string& stem) {
  std::ifstream mi(dir / (stem + ".json"));
  if (!mi) throw PipelineError("load_slowtime: missing sidecar " + (dir / stem).string());
  json meta = json::parse(mi, nullptr, false);
  if (meta.is_discarded()) throw PipelineError("load_slowtime: malformed sidecar");

  SlowTimeEnsemble st;
  st.tag = meta.at("beamformer_tag").get<std::string>() == "nlhr" ? BeamformerKind::nlhr
                                                                  : BeamformerKind::das;
  st.carrier_hz = meta.at("carrier_hz").get<double>();
  st.prf_effective = meta.at("prf_effective").get<double>();
  st.alpha_deg = meta.at("alpha_set").get<std::vector<double>>();
  st.num_points = meta.at("dims").at("points").get<int>();
  st.num_frames = meta.at("dims").at("frames").get<int>();
  const std::size_t per_cube = static_cast<std::size_t>(st.num_points) * st.num_frames;
  const std::size_t total = per_cube * st.alpha_deg.size();
  st.left.resize(total);
  st.right.resize(total);
  st.left_valid.assign(st.alpha_deg.size() * st.num_points, 1);
  st.right_valid.assign(st.alpha_deg.size() * st.num_points, 1);

  for (const auto& c : meta.at("cubes")) {
    const std::string file = c.at("file").get<std::string>();
    const std::string mask = c.at("mask").get<std::string>();
    const double alpha = c.at("alpha").get<double>();
    const bool is_left = c.at("side").get<std::string>() == "left";
    std::size_t a = 0;
    while (a < st.alpha_deg.size() && std::abs(st.alpha_deg[a] - alpha) > 1e-12) ++a;
    if (a == st.alpha_deg.size()) throw PipelineError("load_slowtime: unknown alpha in sidecar");
    auto& data = is_left ? st.left : st.right;
    auto& valid = is_left ? st.left_valid : st.right_valid;
    std::ifstream in(dir / file, std::ios::binary);
    if (!in) throw PipelineError("load_slowtime: cannot open " + (dir / file).string());
    in.read(reinterpret_cast<char*>(data.data() + a * per_cube),
            static_cast<std::streamsize>(per_cube * sizeof(std::complex<float>)));
    if (!in) throw PipelineError("load_slowtime: truncated cube " + file);
    std::ifstream min(dir / mask, std::ios::binary);
    if (!min) throw PipelineError("load_slowtime: missing mask " + mask);
    min.read(reinterpret_cast<char*>(valid.data() + a * st.num_points), st.num_points);
  }
  return st;
}

void save_velocity_field(const VelocityField& field, const ImagingGrid& grid,
                         const std::filesystem::path& csv_path,
                         const std::filesystem::path& bin_path) {
  {
    CsvWriter csv(csv_path, {"x", "z", "t_window", "v", "theta_deg", "valid"});
    for (int w = 0; w < field.num_windows; ++w)
      for (int p = 0; p < field.num_points; ++p) {
        const std::size_t k = field.idx(w, p);
        csv.row({grid.pixel_x(p), grid.pixel_z(p), field.window_time_s[w],
                 field.magnitude[k], field.angle_deg[k],
                 static_cast<double>(field.valid[k])});
      }
  }
  std::ofstream out(bin_path, std::ios::binary);
  if (!out) throw PipelineError("save_velocity_field: cannot open " + bin_path.string());
  for (int w = 0; w < field.num_windows; ++w)
    for (int p = 0; p < field.num_points; ++p) {
      const std::size_t k = field.idx(w, p);
      const float rec[5] = {field.magnitude[k], field.angle_deg[k], field.axial[k],
                            field.lateral[k], static_cast<float>(field.valid[k])};
      out.write(reinterpret_cast<const char*>(rec), sizeof(rec));
    }
  json side;
  side["dims"] = {{"windows", field.num_windows}, {"points", field.num_points}};
  side["fields"] = {"magnitude", "angle_deg", "axial", "lateral", "valid"};
  side["window_time_s"] = field.window_time_s;
  std::ofstream sout(bin_path.string() + ".json");
  sout << side.dump(2) << "\n";
}

VelocityField load_velocity_field(const std::filesystem::path& bin_path) {
  std::ifstream sin(bin_path.string() + ".json");
  if (!sin) throw PipelineError("load_velocity_field: missing sidecar for " + bin_path.string());
  json side = json::parse(sin, nullptr, false);
  if (side.is_discarded()) throw PipelineError("load_velocity_field: malformed sidecar");
  VelocityField field;
  field.num_windows = side.at("dims").at("windows").get<int>();
  field.num_points = side.at("dims").at("points").get<int>();
  field.window_time_s = side.at("window_time_s").get<std::vector<double>>();
  const std::size_t n = static_cast<std::size_t>(field.num_windows) * field.num_points;
  field.magnitude.resize(n);
  field.angle_deg.resize(n);
  field.axial.resize(n);
  field.lateral.resize(n);
  field.valid.resize(n);
  std::ifstream in(bin_path, std::ios::binary);
  if (!in) throw PipelineError("load_velocity_field: cannot open " + bin_path.string());
  for (std::size_t k = 0; k < n; ++k) {
    float rec[5];
    in.read(reinterpret_cast<char*>(rec), sizeof(rec));
    if (!in) throw PipelineError("load_velocity_field: truncated file");
    field.magnitude[k] = rec[0];
    field.angle_deg[k] = rec[1];
    field.axial[k] = rec[2];
    field.lateral[k] = rec[3];
    field.valid[k] = rec[4] != 0.0f ? 1 : 0;
  }
  return field;
}

void write_sv_report_csv(const std::filesystem::path& path,
                         const std::vector<std::pair<std::string, SvdReport>>& reports) {
  CsvWriter csv(path, {"cube", "component", "value_db", "frequency_hz"});
  for (const auto& [name, rep] : reports)
    for (std::size_t k = 0; k < rep.singular_values.size(); ++k)
      csv.raw_row({name, std::to_string(k), format_number(rep.value_db[k]),
                   format_number(rep.frequency_hz[k])});
}

ManifestEntry manifest_entry(const std::filesystem::path& root,
                             const std::filesystem::path& file) {
  ManifestEntry e;
  e.path = std::filesystem::relative(file, root).generic_string();
  e.sha256 = sha256_file_hex(file);
  e.bytes = std::filesystem::file_size(file);
  return e;
}

void write_manifest(const Manifest& m, const std::filesystem::path& path) {
  json j;
  json files = json::array();
  for (const auto& e : m.files) {
    json f;
    f["path"] = e.path;
    f["sha256"] = e.sha256;
    f["bytes"] = e.bytes;
    files.push_back(f);
  }
  j["files"] = files;
  if (!m.config_echo.empty()) j["config"] = json::parse(m.config_echo);
  std::ofstream out(path);
  out << j.dump(2) << "\n";
  if (!out) throw PipelineError("write_manifest: write failed");
}

}  // namespace nlhr
