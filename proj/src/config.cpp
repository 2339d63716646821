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

#include "emova/config.hpp"

#include <fstream>

#include "emova/errors.hpp"

namespace emova::pipeline {

using nlohmann::json;

namespace {

template <typename T>
void pick(const json& j, const char* key, T& slot) {
  if (j.contains(key)) slot = j.at(key).get<T>();
}

void validate(const PipelineConfig& c) {
  if (c.segment_duration <= 0.0) throw ValidationError("config: segment_duration must be positive");
  if (c.frame_side < 2) throw ValidationError("config: frame_side must be at least 2");
  if (c.fcm.clusters < 1 || c.fcm.fuzzifier <= 1.0 || c.fcm.tol <= 0.0 || c.fcm.max_iter < 1)
    throw ValidationError("config: bad fcm parameters");
  if (c.onset.window < 2 || c.onset.hop < 1 || c.onset.hop > c.onset.window || c.onset.n_mels < 1)
    throw ValidationError("config: bad onset parameters");
  if (c.tempo.min_bpm <= 0.0 || c.tempo.max_bpm <= c.tempo.min_bpm)
    throw ValidationError("config: bad tempo range");
  if (c.tempo.weighting.tau0 <= 0.0 || c.tempo.weighting.sigma_tau <= 0.0)
    throw ValidationError("config: bad tempo weighting");
  if (c.loudness.window < 2 || c.loudness.hop < 1)
    throw ValidationError("config: bad loudness parameters");
  if (c.eval_spectro.window < 2 || c.eval_spectro.hop < 1 || c.eval_spectro.n_mels < 1 ||
      c.eval_spectro.floor_db >= 0.0)
    throw ValidationError("config: bad evaluation spectrogram parameters");
  if (c.anfis_mfs < 2 || c.anfis_epochs < 1 || c.anfis_lr <= 0.0)
    throw ValidationError("config: bad anfis parameters");
  if (c.lstm_hidden1 < 1 || c.lstm_hidden2 < 1 || c.lstm_epochs < 0 || c.lstm_lr <= 0.0 ||
      c.lstm_clip <= 0.0 || c.lstm_loss_target < 0.0)
    throw ValidationError("config: bad lstm parameters");
  if (c.crossfade_samples < 0) throw ValidationError("config: crossfade must be >= 0");
}

}  // namespace

void apply_overrides(PipelineConfig& target, const json& overrides) {
  if (!overrides.is_object()) throw ValidationError("config overrides must be a JSON object");
  PipelineConfig cfg = target;  // commit only after validation
  pick(overrides, "segment_duration", cfg.segment_duration);
  pick(overrides, "frame_side", cfg.frame_side);
  pick(overrides, "crossfade_samples", cfg.crossfade_samples);
  pick(overrides, "seed", cfg.seed);
  if (overrides.contains("fcm")) {
    const json& j = overrides.at("fcm");
    pick(j, "clusters", cfg.fcm.clusters);
    pick(j, "fuzzifier", cfg.fcm.fuzzifier);
    pick(j, "tol", cfg.fcm.tol);
    pick(j, "max_iter", cfg.fcm.max_iter);
    pick(j, "max_points", cfg.fcm.max_points);
  }
  if (overrides.contains("onset")) {
    const json& j = overrides.at("onset");
    pick(j, "window", cfg.onset.window);
    pick(j, "hop", cfg.onset.hop);
    pick(j, "n_mels", cfg.onset.n_mels);
    pick(j, "smooth_sigma", cfg.onset.smooth_sigma);
    pick(j, "floor_db", cfg.onset.floor_db);
  }
  if (overrides.contains("tempo")) {
    const json& j = overrides.at("tempo");
    pick(j, "tau0", cfg.tempo.weighting.tau0);
    pick(j, "sigma_tau", cfg.tempo.weighting.sigma_tau);
    pick(j, "min_bpm", cfg.tempo.min_bpm);
    pick(j, "max_bpm", cfg.tempo.max_bpm);
    pick(j, "default_bpm", cfg.tempo.default_bpm);
  }
  if (overrides.contains("loudness")) {
    const json& j = overrides.at("loudness");
    pick(j, "window", cfg.loudness.window);
    pick(j, "hop", cfg.loudness.hop);
    pick(j, "silence_floor_db", cfg.loudness.silence_floor_db);
  }
  if (overrides.contains("eval")) {
    const json& j = overrides.at("eval");
    pick(j, "window", cfg.eval_spectro.window);
    pick(j, "hop", cfg.eval_spectro.hop);
    pick(j, "n_mels", cfg.eval_spectro.n_mels);
    pick(j, "floor_db", cfg.eval_spectro.floor_db);
  }
  if (overrides.contains("anfis")) {
    const json& j = overrides.at("anfis");
    pick(j, "n_mfs", cfg.anfis_mfs);
    pick(j, "epochs", cfg.anfis_epochs);
    pick(j, "learning_rate", cfg.anfis_lr);
  }
  if (overrides.contains("lstm")) {
    const json& j = overrides.at("lstm");
    pick(j, "hidden1", cfg.lstm_hidden1);
    pick(j, "hidden2", cfg.lstm_hidden2);
    pick(j, "epochs", cfg.lstm_epochs);
    pick(j, "learning_rate", cfg.lstm_lr);
    pick(j, "grad_clip_norm", cfg.lstm_clip);
    pick(j, "loss_target", cfg.lstm_loss_target);
  }
  validate(cfg);
  target = cfg;
}

PipelineConfig config_from_json(const json& j) {
  PipelineConfig cfg;
  apply_overrides(cfg, j);
  return cfg;
}

json config_to_json(const PipelineConfig& c) {
  json j;
  j["segment_duration"] = c.segment_duration;
  j["frame_side"] = c.frame_side;
  j["crossfade_samples"] = c.crossfade_samples;
  j["seed"] = c.seed;
  j["fcm"] = {{"clusters", c.fcm.clusters},
              {"fuzzifier", c.fcm.fuzzifier},
              {"tol", c.fcm.tol},
              {"max_iter", c.fcm.max_iter},
              {"max_points", c.fcm.max_points}};
  j["onset"] = {{"window", c.onset.window},
                {"hop", c.onset.hop},
                {"n_mels", c.onset.n_mels},
                {"smooth_sigma", c.onset.smooth_sigma},
                {"floor_db", c.onset.floor_db}};
  j["tempo"] = {{"tau0", c.tempo.weighting.tau0},
                {"sigma_tau", c.tempo.weighting.sigma_tau},
                {"min_bpm", c.tempo.min_bpm},
                {"max_bpm", c.tempo.max_bpm},
                {"default_bpm", c.tempo.default_bpm}};
  j["loudness"] = {{"window", c.loudness.window},
                   {"hop", c.loudness.hop},
                   {"silence_floor_db", c.loudness.silence_floor_db}};
  j["eval"] = {{"window", c.eval_spectro.window},
               {"hop", c.eval_spectro.hop},
               {"n_mels", c.eval_spectro.n_mels},
               {"floor_db", c.eval_spectro.floor_db}};
  j["anfis"] = {{"n_mfs", c.anfis_mfs}, {"epochs", c.anfis_epochs}, {"learning_rate", c.anfis_lr}};
  j["lstm"] = {{"hidden1", c.lstm_hidden1},   {"hidden2", c.lstm_hidden2},
               {"epochs", c.lstm_epochs},     {"learning_rate", c.lstm_lr},
               {"grad_clip_norm", c.lstm_clip}, {"loss_target", c.lstm_loss_target}};
  return j;
}

PipelineConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("config file " + path + ": " + e.what());
  }
  return config_from_json(j);
}

std::string config_hash(const PipelineConfig& cfg) {
  const std::string dump = config_to_json(cfg).dump();
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace emova::pipeline
