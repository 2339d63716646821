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

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "emova/config.hpp"
#include "emova/generation.hpp"

namespace emova::pipeline {

inline constexpr int kBundleFormatVersion = 1;
inline constexpr int kStoreFormatVersion = 1;
inline constexpr int kInternalSampleRate = 8000;

struct ClipManifest {
  std::string id;
  std::string frames_dir;
  std::string audio_path;
  double fps = 0.0;
  double mos_valence = 5.0;
  double mos_arousal = 5.0;
};

struct DatasetManifest {
  std::vector<ClipManifest> clips;
  nlohmann::json config_overrides;  // optional "config" object
};

// Parses and validates a manifest; relative paths resolve against the
// manifest's directory.
DatasetManifest load_manifest(const std::string& path);

// Cached per-clip extraction results (aligned descriptor/segment triples).
struct ClipFeatures {
  std::string id;
  double fps = 0.0;
  double mos_valence = 5.0;
  double mos_arousal = 5.0;
  anfis::EmotionQuadrant label = anfis::EmotionQuadrant::PosHigh;
  double clip_tempo = 0.0;
  bool clip_tempo_defaulted = false;
  std::vector<vision::HsiDescriptor> hsi;
  std::vector<audio::TlrDescriptor> tlr;
  std::vector<audio::AudioSegment> segments;
};

struct FeatureStore {
  std::vector<ClipFeatures> clips;
  std::string config_hash;
};

FeatureStore ingest(const DatasetManifest& manifest, const PipelineConfig& cfg,
                    bool verbose = false);
void save_store(const FeatureStore& store, const std::string& dir);
FeatureStore load_store(const std::string& dir);

struct ModelBundle {
  int format_version = kBundleFormatVersion;
  anfis::AnfisModel anfis_valence;
  anfis::AnfisModel anfis_arousal;
  std::map<anfis::EmotionQuadrant, lstm::DeepLstmModel> lstms;
  std::map<anfis::EmotionQuadrant, gen::SegmentDictionary> dictionaries;
  audio::FeatureStats hsi_stats;
  audio::FeatureStats tlr_stats;
  PipelineConfig config;
  double anfis_train_accuracy = 0.0;
};

struct TrainSummary {
  double anfis_accuracy = 0.0;
  double anfis_valence_rmse = 0.0;
  double anfis_arousal_rmse = 0.0;
  std::map<anfis::EmotionQuadrant, double> lstm_final_loss;
  std::vector<anfis::EmotionQuadrant> skipped_quadrants;  // no clips, no model
};

// Fits stats, trains the two score regressors on mean clip descriptors,
// routes clips to quadrants by their labels, trains one sequence model per
// represented quadrant, and builds the per-quadrant dictionaries.
ModelBundle train(const FeatureStore& store, const PipelineConfig& cfg, bool verbose = false,
                  TrainSummary* summary = nullptr);

void save_bundle(const ModelBundle& bundle, const std::string& dir);
ModelBundle load_bundle(const std::string& dir);

// Borrowing view used by the synthesis path; bundle must outlive it.
gen::GenerationModels bundle_view(const ModelBundle& bundle);

// Picks one frame per output segment (index round(t * fps), clamped) from a
// directory of numbered frames covering duration frame_count / fps.
std::vector<vision::RgbImage> load_generation_frames(const std::string& frames_dir, double fps,
                                                     double segment_duration);

struct GenerateFilesResult {
  anfis::EmotionQuadrant quadrant = anfis::EmotionQuadrant::PosHigh;
  gen::GenerationReport report;
  std::string wav_path;
  std::string report_path;
};

GenerateFilesResult generate_to_files(const ModelBundle& bundle, const std::string& frames_dir,
                                      double fps, const std::string& out_wav);

struct ClipEvaluation {
  std::string id;
  double spectrogram_mae = 0.0;
};

struct EvaluationResult {
  std::vector<ClipEvaluation> clips;
  double mean_mae = 0.0;
};

// Generates audio for every manifest clip, compares against the original,
// renders both spectrograms under out_dir, and writes a JSON summary.
EvaluationResult evaluate_manifest(const ModelBundle& bundle, const DatasetManifest& manifest,
                                   const std::string& out_dir, bool verbose = false);

// "sample_id,axis,score" CSV to a per-(sample, axis) "mean ± stddev" table.
std::string mos_stats_from_csv(const std::string& csv_path);

}  // namespace emova::pipeline
