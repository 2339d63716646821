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

#include "emova/fixture.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "emova/anfis.hpp"
#include "emova/errors.hpp"
#include "emova/image_io.hpp"
#include "emova/rng.hpp"
#include "emova/visual_features.hpp"
#include "emova/wav_io.hpp"

namespace emova::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kRate = 8000;

struct QuadrantPlan {
  anfis::EmotionQuadrant quadrant;
  // Two clips per quadrant at most are distinct; further clips reuse these
  // with a deterministic brightness/level offset.
  double tempo_bpm[2];         // integer envelope lags only
  double chroma[2][3];         // RGB chroma direction per clip
  double intensity_lo, intensity_hi;
  double chroma_amount;
  double level;                // base amplitude
  double tone_hz;
  double mos_valence[2], mos_arousal[2];
};

const QuadrantPlan kPlans[4] = {
    {anfis::EmotionQuadrant::PosHigh,
     {180.0, 150.0},
     {{1.0, 0.05, 0.0}, {1.0, 0.6, 0.0}},
     0.62, 0.82, 0.45, 0.95, 3000.0,
     {7.8, 7.2}, {8.2, 7.6}},
    {anfis::EmotionQuadrant::PosLow,
     {75.0, 60.0},
     {{0.0, 1.0, 0.1}, {0.0, 1.0, 0.65}},
     0.45, 0.62, 0.4, 0.6, 2200.0,
     {7.4, 6.8}, {2.8, 3.4}},
    {anfis::EmotionQuadrant::NegHigh,
     {120.0, 100.0},
     {{0.0, 0.2, 1.0}, {0.45, 0.0, 1.0}},
     0.28, 0.45, 0.4, 0.8, 1200.0,
     {2.2, 3.0}, {7.8, 7.2}},
    {anfis::EmotionQuadrant::NegLow,
     {50.0, 40.0},
     {{0.6, 0.5, 0.7}, {0.5, 0.55, 0.65}},
     0.10, 0.28, 0.1, 0.4, 800.0,
     {2.6, 3.2}, {2.4, 3.0}},
};

// Per-segment amplitude ladder; different slope per clip variant keeps every
// (clip, segment) level distinct inside a quadrant's dictionary.
double ladder(int segment, int total, int variant) {
  const double t = total > 1 ? static_cast<double>(segment) / (total - 1) : 0.0;
  return variant % 2 == 0 ? 0.40 + 0.60 * t : 0.97 - 0.52 * t;
}

vision::RgbImage make_frame(const QuadrantPlan& plan, int variant, double intensity, int side,
                            Rng& rng) {
  // Zero-mean chroma keeps the pixel mean (the intensity plane) exact.
  const double* c = plan.chroma[variant % 2];
  const double mean = (c[0] + c[1] + c[2]) / 3.0;
  double dir[3] = {c[0] - mean, c[1] - mean, c[2] - mean};
  double peak = 0.0;
  for (double d : dir) peak = std::max(peak, std::abs(d));
  if (peak > 0.0)
    for (double& d : dir) d /= peak;

  const double headroom = 1.45 * std::min(intensity, 1.0 - intensity);
  const double amount = std::min(plan.chroma_amount, headroom);

  vision::RgbImage img;
  img.width = side;
  img.height = side;
  img.data.resize(3 * static_cast<std::size_t>(side) * side);
  for (std::size_t p = 0; p < static_cast<std::size_t>(side) * side; ++p) {
    const double jitter = rng.uniform(-0.01, 0.01);
    for (int ch = 0; ch < 3; ++ch) {
      const double v = intensity + amount * dir[ch] * (2.0 / 3.0) + jitter;
      img.data[3 * p + static_cast<std::size_t>(ch)] = std::clamp(v, 0.0, 1.0);
    }
  }
  return img;
}

std::vector<double> make_audio(const QuadrantPlan& plan, int variant, double seconds,
                               double segment_duration) {
  const std::size_t n = static_cast<std::size_t>(std::llround(seconds * kRate));
  const int total_segments = static_cast<int>(seconds / segment_duration + 1e-9);
  std::vector<double> samples(n, 0.0);

  auto segment_level = [&](double t_seconds) {
    int seg = static_cast<int>(t_seconds / segment_duration);
    seg = std::clamp(seg, 0, total_segments - 1);
    return plan.level * ladder(seg, total_segments, variant);
  };

  // Sustained tone, level stepped per segment.
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / kRate;
    samples[i] = 0.25 * segment_level(t) * std::sin(2.0 * M_PI * plan.tone_hz * t);
  }

  // Click bursts every beat, amplitude from the segment the click starts in.
  const double period = 60.0 / plan.tempo_bpm[variant % 2];
  const std::size_t burst = static_cast<std::size_t>(0.02 * kRate);
  for (double t = 0.0; t < seconds; t += period) {
    const std::size_t start = static_cast<std::size_t>(std::llround(t * kRate));
    const double amp = 0.7 * segment_level(t);
    for (std::size_t i = 0; i < burst && start + i < n; ++i) {
      const double env = std::exp(-static_cast<double>(i) / (0.004 * kRate));
      samples[start + i] +=
          amp * env * std::sin(2.0 * M_PI * 2000.0 * static_cast<double>(i) / kRate);
    }
  }
  for (double& s : samples) s = std::clamp(s, -1.0, 1.0);
  return samples;
}

}  // namespace

void write_fixture(const std::string& out_dir, std::uint64_t seed, const FixtureSpec& spec) {
  if (spec.clips_per_quadrant < 1) throw ValidationError("fixture: need at least one clip per quadrant");
  if (spec.clip_seconds < 2.0 * spec.segment_duration)
    throw ValidationError("fixture: clips must cover at least two segments");
  fs::create_directories(out_dir);
  const fs::path base(out_dir);

  const int frames_per_clip =
      static_cast<int>(std::llround(spec.clip_seconds * spec.fps));
  const int segments_per_clip =
      static_cast<int>(spec.clip_seconds / spec.segment_duration + 1e-9);

  json clips = json::array();
  for (int qi = 0; qi < 4; ++qi) {
    const QuadrantPlan& plan = kPlans[qi];
    for (int v = 0; v < spec.clips_per_quadrant; ++v) {
      char name[64];
      std::snprintf(name, sizeof(name), "%s_%d", anfis::quadrant_name(plan.quadrant), v);
      const std::string id(name);
      const fs::path clip_dir = base / id;
      const fs::path frames_dir = clip_dir / "frames";
      fs::create_directories(frames_dir);

      Rng rng(seed * 131 + static_cast<std::uint64_t>(qi) * 8 + static_cast<std::uint64_t>(v));
      // Brightness band split across variants so clip identities differ.
      const double band = (plan.intensity_hi - plan.intensity_lo);
      const double lo = plan.intensity_lo + band * 0.06 * v;

      for (int f = 0; f < frames_per_clip; ++f) {
        const double t_seconds = static_cast<double>(f) / spec.fps;
        int seg = static_cast<int>(t_seconds / spec.segment_duration);
        seg = std::clamp(seg, 0, segments_per_clip - 1);
        const double level = ladder(seg, segments_per_clip, v);
        const double intensity = std::clamp(lo + band * 0.85 * (level - 0.4) / 0.6, 0.02, 0.98);
        const vision::RgbImage frame = make_frame(plan, v, intensity, spec.frame_side, rng);
        char frame_name[32];
        std::snprintf(frame_name, sizeof(frame_name), "%06d.ppm", f);
        io::write_ppm((frames_dir / frame_name).string(), frame);
      }

      dsp::AudioSignal wav;
      wav.sample_rate = kRate;
      wav.samples = make_audio(plan, v, spec.clip_seconds, spec.segment_duration);
      io::write_wav((clip_dir / "audio.wav").string(), wav);

      clips.push_back({{"id", id},
                       {"frames_dir", id + "/frames"},
                       {"audio_path", id + "/audio.wav"},
                       {"fps", spec.fps},
                       {"mos_valence", plan.mos_valence[v % 2]},
                       {"mos_arousal", plan.mos_arousal[v % 2]}});
    }
  }

  json manifest;
  manifest["clips"] = clips;
  const std::string manifest_path = (base / "manifest.json").string();
  std::ofstream out(manifest_path, std::ios::binary);
  if (!out) throw IoError("cannot write " + manifest_path);
  out << manifest.dump(2) << "\n";
  if (!out) throw IoError("failed writing " + manifest_path);
}

}  // namespace emova::pipeline
