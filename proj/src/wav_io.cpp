/*
 * Copyright 2026 The Emova Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "emova/wav_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "emova/errors.hpp"

namespace emova::io {

namespace {

std::uint32_t read_u32(std::istream& in) {
  std::uint8_t b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint16_t read_u16(std::istream& in) {
  std::uint8_t b[2];
  in.read(reinterpret_cast<char*>(b), 2);
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

void write_u32(std::ostream& out, std::uint32_t v) {
  const std::uint8_t b[4] = {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8),
                             static_cast<std::uint8_t>(v >> 16),
                             static_cast<std::uint8_t>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

void write_u16(std::ostream& out, std::uint16_t v) {
  const std::uint8_t b[2] = {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8)};
  out.write(reinterpret_cast<const char*>(b), 2);
}

}  // namespace

dsp::AudioSignal read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open wav file: " + path);

  char tag[4];
  in.read(tag, 4);
  if (!in || std::memcmp(tag, "RIFF", 4) != 0)
    throw ValidationError("not a RIFF file: " + path);
  read_u32(in);  // riff size
  in.read(tag, 4);
  if (!in || std::memcmp(tag, "WAVE", 4) != 0)
    throw ValidationError("not a WAVE file: " + path);

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t sample_rate = 0;
  bool have_fmt = false;
  std::vector<std::int16_t> pcm;
  bool have_data = false;

  while (in && !have_data) {
    in.read(tag, 4);
    if (!in) break;
    const std::uint32_t size = read_u32(in);
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      format = read_u16(in);
      channels = read_u16(in);
      sample_rate = read_u32(in);
      read_u32(in);  // byte rate
      read_u16(in);  // block align
      bits = read_u16(in);
      if (size > 16) in.seekg(size - 16 + (size & 1), std::ios::cur);
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      if (!have_fmt) throw ValidationError("wav data chunk before fmt: " + path);
      pcm.resize(size / 2);
      in.read(reinterpret_cast<char*>(pcm.data()), static_cast<std::streamsize>(size / 2 * 2));
      if (static_cast<std::uint32_t>(in.gcount()) != size / 2 * 2)
        throw IoError("truncated wav data: " + path);
      have_data = true;
    } else {
      in.seekg(size + (size & 1), std::ios::cur);
    }
  }

  if (!have_fmt || !have_data) throw ValidationError("missing fmt/data chunk: " + path);
  if (format != 1) throw ValidationError("only PCM wav supported: " + path);
  if (bits != 16) throw ValidationError("only 16-bit wav supported: " + path);
  if (channels < 1 || channels > 2) throw ValidationError("only mono/stereo wav supported: " + path);
  if (sample_rate < 8000 || sample_rate > 48000)
    throw ValidationError("wav sample rate outside 8-48 kHz: " + path);

  dsp::AudioSignal signal;
  signal.sample_rate = static_cast<int>(sample_rate);
  const std::size_t frames = pcm.size() / channels;
  signal.samples.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    if (channels == 1) {
      signal.samples[i] = pcm[i] / 32768.0;
    } else {
      signal.samples[i] = (pcm[2 * i] / 32768.0 + pcm[2 * i + 1] / 32768.0) / 2.0;
    }
  }
  if (signal.samples.empty()) throw ValidationError("empty wav file: " + path);
  return signal;
}

void write_wav(const std::string& path, const dsp::AudioSignal& signal) {
  if (signal.sample_rate <= 0) throw ValidationError("write_wav: bad sample rate");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write wav file: " + path);

  const std::uint32_t data_size = static_cast<std::uint32_t>(signal.samples.size() * 2);
  out.write("RIFF", 4);
  write_u32(out, 36 + data_size);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  write_u32(out, 16);
  write_u16(out, 1);  // PCM
  write_u16(out, 1);  // mono
  write_u32(out, static_cast<std::uint32_t>(signal.sample_rate));
  write_u32(out, static_cast<std::uint32_t>(signal.sample_rate) * 2);
  write_u16(out, 2);
  write_u16(out, 16);
  out.write("data", 4);
  write_u32(out, data_size);
  for (double s : signal.samples) {
    const double scaled = std::clamp(s, -1.0, 1.0) * 32768.0;
    const std::int16_t v = static_cast<std::int16_t>(
        std::clamp(std::lround(scaled), -32768L, 32767L));
    write_u16(out, static_cast<std::uint16_t>(v));
  }
  if (!out) throw IoError("failed writing wav file: " + path);
}

}  // namespace emova::io
