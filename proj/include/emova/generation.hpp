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

#pragma once

#include <array>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "emova/anfis.hpp"
#include "emova/audio_features.hpp"
#include "emova/lstm.hpp"
#include "emova/visual_features.hpp"

namespace emova::gen {

struct DictEntry {
  std::array<double, 3> key{};  // z-scored TLR
  audio::AudioSegment segment;
  std::string source_clip;
};

// Ordered store of (normalized feature key, raw audio) pairs for one
// emotion quadrant. Insertion order is clip order, then segment index.
struct SegmentDictionary {
  std::vector<DictEntry> entries;
  audio::FeatureStats stats;
  anfis::EmotionQuadrant quadrant = anfis::EmotionQuadrant::PosHigh;
};

struct ClipSegments {
  std::string clip_id;
  std::vector<audio::AudioSegment> segments;
  std::vector<audio::TlrDescriptor> descriptors;  // one per segment
};

struct Retrieval {
  std::size_t index = 0;
  double mae = 0.0;
};

struct GenerationStep {
  std::array<double, 3> predicted_key{};   // z-scored LSTM output
  audio::TlrDescriptor predicted;          // same, in raw feature units
  std::size_t entry_index = 0;
  double retrieval_mae = 0.0;
};

struct GenerationReport {
  anfis::EmotionScore score;
  anfis::EmotionQuadrant quadrant = anfis::EmotionQuadrant::PosHigh;
  std::vector<GenerationStep> steps;
  double total_duration = 0.0;  // seconds
};

// Read-only view over a trained bundle, as needed for synthesis.
struct GenerationModels {
  const anfis::AnfisModel* valence = nullptr;
  const anfis::AnfisModel* arousal = nullptr;
  std::map<anfis::EmotionQuadrant, const lstm::DeepLstmModel*> lstms;
  std::map<anfis::EmotionQuadrant, const SegmentDictionary*> dictionaries;
  audio::FeatureStats hsi_stats;
  vision::FcmConfig fcm;
  int frame_side = 256;
  int crossfade_samples = 0;
};

SegmentDictionary build_dictionary(const std::vector<ClipSegments>& clips,
                                   const audio::FeatureStats& stats,
                                   anfis::EmotionQuadrant quadrant);

// (1/n) * sum |d_j - f_j|
double mae(const std::vector<double>& d, const std::vector<double>& f);
double mae(const std::array<double, 3>& d, const std::array<double, 3>& f);

// Exhaustive scan for the smallest MAE; ties go to the lowest index.
Retrieval nearest_segment(const SegmentDictionary& dict, const std::array<double, 3>& key);

// Plain concatenation, optionally linear-crossfaded over `crossfade` samples
// at each joint (ramp (i+1)/(F+1)). All segments must share one sample rate.
dsp::AudioSignal assemble_audio(const std::vector<audio::AudioSegment>& segments,
                                int crossfade = 0);

// Full synthesis path: per-frame descriptors, quadrant routing on the mean
// descriptor, LSTM feature prediction, nearest-segment retrieval,
// concatenation.
std::tuple<dsp::AudioSignal, anfis::EmotionQuadrant, GenerationReport> generate(
    const std::vector<vision::RgbImage>& frames, const GenerationModels& models);

}  // namespace emova::gen
