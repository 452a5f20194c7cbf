// SPDX-License-Identifier: Apache-2.0
#include "nlhr/rf_frameset.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "nlhr/errors.hpp"

namespace nlhr {

using json = nlohmann::json;

void save_rf(const RFFrameSet& rf, const std::filesystem::path& bin_path) {
  std::ofstream out(bin_path, std::ios::binary);
  if (!out) throw PipelineError("save_rf: cannot open " + bin_path.string());
  // disk order: (channel, sample, frame)
  std::vector<float> row(static_cast<std::size_t>(rf.num_frames));
  for (int c = 0; c < rf.num_channels; ++c) {
    for (int s = 0; s < rf.num_samples; ++s) {
      for (int f = 0; f < rf.num_frames; ++f) row[f] = rf.at(f, c, s);
      out.write(reinterpret_cast<const char*>(row.data()),
                static_cast<std::streamsize>(row.size() * sizeof(float)));
    }
  }
  if (!out) throw PipelineError("save_rf: write failed for " + bin_path.string());

  json side;
  side["dims"] = {{"channels", rf.num_channels},
                  {"samples", rf.num_samples},
                  {"frames", rf.num_frames}};
  side["f_s"] = rf.sampling_frequency;
  side["f0"] = rf.center_frequency;
  side["prf"] = rf.prf_effective;
  side["c"] = rf.sound_speed;
  side["seed"] = rf.seed;
  side["start_time"] = rf.start_time;
  std::ofstream sout(bin_path.string() + ".json");
  sout << side.dump(2) << "\n";
  if (!sout) throw PipelineError("save_rf: sidecar write failed");
}

RFFrameSet load_rf(const std::filesystem::path& bin_path) {
  std::ifstream sin(bin_path.string() + ".json");
  if (!sin) throw PipelineError("load_rf: missing sidecar for " + bin_path.string());
  json side = json::parse(sin, nullptr, false);
  if (side.is_discarded()) throw PipelineError("load_rf: malformed sidecar");

  RFFrameSet rf;
  rf.num_channels = side.at("dims").at("channels").get<int>();
  rf.num_samples = side.at("dims").at("samples").get<int>();
  rf.num_frames = side.at("dims").at("frames").get<int>();
  rf.sampling_frequency = side.at("f_s").get<double>();
  rf.center_frequency = side.at("f0").get<double>();
  rf.prf_effective = side.at("prf").get<double>();
  rf.sound_speed = side.at("c").get<double>();
  rf.seed = side.value("seed", 0ULL);
  rf.start_time = side.value("start_time", 0.0);
  rf.allocate();

  std::ifstream in(bin_path, std::ios::binary);
  if (!in) throw PipelineError("load_rf: cannot open " + bin_path.string());
  std::vector<float> row(static_cast<std::size_t>(rf.num_frames));
  for (int c = 0; c < rf.num_channels; ++c) {
    for (int s = 0; s < rf.num_samples; ++s) {
      in.read(reinterpret_cast<char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
      if (!in) throw PipelineError("load_rf: truncated file " + bin_path.string());
      for (int f = 0; f < rf.num_frames; ++f) rf.at(f, c, s) = row[f];
    }
  }
  return rf;
}

}  // namespace nlhr
