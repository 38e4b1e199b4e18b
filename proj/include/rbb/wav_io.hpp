// Copyright 2026 the rbb-toolkit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef RBB_WAV_IO_HPP
#define RBB_WAV_IO_HPP

#include <string>
#include <vector>

namespace rbb {

struct WavData {
  int sample_rate = 0;
  // One vector per channel, samples as doubles in [-1, 1] nominal range.
  std::vector<std::vector<double>> channels;

  std::size_t num_frames() const { return channels.empty() ? 0 : channels[0].size(); }
};

// Reads PCM16 or float32 RIFF/WAVE files. Throws std::runtime_error on
// malformed input or unsupported encodings.
WavData read_wav(const std::string& path);

// Writes float32 WAV; channels must agree in length.
void write_wav(const std::string& path, const WavData& data);

}  // namespace rbb

#endif  // RBB_WAV_IO_HPP
