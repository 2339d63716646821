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

#include <cstdint>
#include <string>

#include <json.hpp>

#include "emova/audio_features.hpp"
#include "emova/evaluation.hpp"
#include "emova/visual_features.hpp"

namespace emova::pipeline {

// Every tunable of the pipeline, with working defaults. JSON overrides are
// partial: only the keys present change.
struct PipelineConfig {
  double segment_duration = 0.5;  // seconds
  int frame_side = 256;

  vision::FcmConfig fcm;
  audio::OnsetConfig onset;
  audio::TempoConfig tempo;
  audio::LoudnessConfig loudness;
  eval::SpectroParams eval_spectro;

  int anfis_mfs = 4;
  int anfis_epochs = 20;
  double anfis_lr = 0.01;

  int lstm_hidden1 = 100;
  int lstm_hidden2 = 300;
  int lstm_epochs = 600;
  double lstm_lr = 1e-3;
  double lstm_clip = 5.0;
  double lstm_loss_target = 5e-6;

  int crossfade_samples = 0;
  std::uint64_t seed = 0;
};

void apply_overrides(PipelineConfig& cfg, const nlohmann::json& overrides);
PipelineConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const PipelineConfig& cfg);

// Loads a JSON override file onto the defaults.
PipelineConfig load_config_file(const std::string& path);

// FNV-1a of the canonical JSON dump; persisted with feature stores so stale
// extractions are refused at train time.
std::string config_hash(const PipelineConfig& cfg);

}  // namespace emova::pipeline
