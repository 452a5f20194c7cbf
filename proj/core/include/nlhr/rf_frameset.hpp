// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace nlhr {

/// Per-channel RF echo samples for a sequence of plane-wave emissions.
/// In memory the layout is frame-major ([frame][channel][sample]); on disk
/// the flat float32 layout is (channel, sample, frame), frame fastest.
struct RFFrameSet {
  int num_channels = 0;
  int num_samples = 0;
  int num_frames = 0;
  double sampling_frequency = 0.0;  // [Hz]
  double prf_effective = 0.0;       // [Hz]
  double start_time = 0.0;          // [s] time of sample 0
  double center_frequency = 0.0;    // [Hz] carried along for sidecars
  double sound_speed = 0.0;         // [m/s]
  std::uint64_t seed = 0;
  std::vector<float> samples;

  std::size_t index(int frame, int channel, int sample) const {
    return (static_cast<std::size_t>(frame) * num_channels + channel) * num_samples + sample;
  }
  float& at(int frame, int channel, int sample) { return samples[index(frame, channel, sample)]; }
  float at(int frame, int channel, int sample) const { return samples[index(frame, channel, sample)]; }
  std::span<const float> line(int frame, int channel) const {
    return {samples.data() + index(frame, channel, 0), static_cast<std::size_t>(num_samples)};
  }

  void allocate() {
    samples.assign(static_cast<std::size_t>(num_channels) * num_samples * num_frames, 0.0f);
  }
};

/// Writes <path> (little-endian float32) and a <path>.json sidecar.
void save_rf(const RFFrameSet& rf, const std::filesystem::path& bin_path);
RFFrameSet load_rf(const std::filesystem::path& bin_path);

}  // namespace nlhr
