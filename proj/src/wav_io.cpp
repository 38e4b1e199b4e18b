// Copyright 2026 the rbb-toolkit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rbb/wav_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace rbb {

namespace {

std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint16_t read_u16(std::istream& in) {
  unsigned char b[2];
  in.read(reinterpret_cast<char*>(b), 2);
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

void write_u32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

void write_u16(std::ostream& out, std::uint16_t v) {
  const char b[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
  out.write(b, 2);
}

}  // namespace

WavData read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open wav file: " + path);

  char tag[4];
  in.read(tag, 4);
  if (std::memcmp(tag, "RIFF", 4) != 0) throw std::runtime_error("not a RIFF file: " + path);
  read_u32(in);  // riff size
  in.read(tag, 4);
  if (std::memcmp(tag, "WAVE", 4) != 0) throw std::runtime_error("not a WAVE file: " + path);

  std::uint16_t format = 0, num_channels = 0, bits = 0;
  std::uint32_t sample_rate = 0;
  std::vector<char> payload;

  while (in.read(tag, 4)) {
    const std::uint32_t chunk_size = read_u32(in);
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      format = read_u16(in);
      num_channels = read_u16(in);
      sample_rate = read_u32(in);
      read_u32(in);  // byte rate
      read_u16(in);  // block align
      bits = read_u16(in);
      if (chunk_size > 16) in.ignore(chunk_size - 16);
    } else if (std::memcmp(tag, "data", 4) == 0) {
      payload.resize(chunk_size);
      in.read(payload.data(), chunk_size);
    } else {
      in.ignore(chunk_size + (chunk_size % 2));
    }
  }
  if (num_channels == 0 || payload.empty()) {
    throw std::runtime_error("wav file has no audio data: " + path);
  }

  WavData data;
  data.sample_rate = static_cast<int>(sample_rate);
  data.channels.resize(num_channels);

  if (format == 1 && bits == 16) {
    const std::size_t frames = payload.size() / (2 * num_channels);
    for (auto& ch : data.channels) ch.resize(frames);
    const auto* p = reinterpret_cast<const unsigned char*>(payload.data());
    for (std::size_t f = 0; f < frames; ++f) {
      for (int c = 0; c < num_channels; ++c) {
        const std::size_t idx = 2 * (f * num_channels + c);
        const std::int16_t v = static_cast<std::int16_t>(p[idx] | (p[idx + 1] << 8));
        data.channels[c][f] = v / 32768.0;
      }
    }
  } else if (format == 3 && bits == 32) {
    const std::size_t frames = payload.size() / (4 * num_channels);
    for (auto& ch : data.channels) ch.resize(frames);
    for (std::size_t f = 0; f < frames; ++f) {
      for (int c = 0; c < num_channels; ++c) {
        float v;
        std::memcpy(&v, payload.data() + 4 * (f * num_channels + c), 4);
        data.channels[c][f] = v;
      }
    }
  } else {
    throw std::runtime_error("unsupported wav encoding (want PCM16 or float32): " + path);
  }
  return data;
}

void write_wav(const std::string& path, const WavData& data) {
  if (data.channels.empty()) throw std::runtime_error("no channels to write");
  const std::size_t frames = data.num_frames();
  for (const auto& ch : data.channels) {
    if (ch.size() != frames) throw std::runtime_error("channel length mismatch");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot create wav file: " + path);

  const auto num_channels = static_cast<std::uint16_t>(data.channels.size());
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(frames * num_channels * 4);

  out.write("RIFF", 4);
  write_u32(out, 36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  write_u32(out, 16);
  write_u16(out, 3);  // IEEE float
  write_u16(out, num_channels);
  write_u32(out, static_cast<std::uint32_t>(data.sample_rate));
  write_u32(out, static_cast<std::uint32_t>(data.sample_rate) * num_channels * 4);
  write_u16(out, static_cast<std::uint16_t>(num_channels * 4));
  write_u16(out, 32);
  out.write("data", 4);
  write_u32(out, data_bytes);
  for (std::size_t f = 0; f < frames; ++f) {
    for (int c = 0; c < num_channels; ++c) {
      const float v = static_cast<float>(data.channels[c][f]);
      out.write(reinterpret_cast<const char*>(&v), 4);
    }
  }
}

}  // namespace rbb
