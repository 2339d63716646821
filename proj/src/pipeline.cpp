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

#include "emova/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "emova/errors.hpp"
#include "emova/evaluation.hpp"
#include "emova/image_io.hpp"
#include "emova/wav_io.hpp"

namespace emova::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---- little-endian binary blob helpers -------------------------------------

void put_u32(std::ostream& out, std::uint32_t v) {
  const std::uint8_t b[4] = {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8),
                             static_cast<std::uint8_t>(v >> 16),
                             static_cast<std::uint8_t>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in, const std::string& what) {
  std::uint8_t b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw IoError("truncated blob while reading " + what);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  put_u32(out, static_cast<std::uint32_t>(v));
  put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

std::uint64_t get_u64(std::istream& in, const std::string& what) {
  const std::uint64_t lo = get_u32(in, what);
  const std::uint64_t hi = get_u32(in, what);
  return lo | (hi << 32);
}

void put_doubles(std::ostream& out, const double* data, std::size_t count) {
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, &data[i], 8);
    put_u64(out, bits);
  }
}

void get_doubles(std::istream& in, double* data, std::size_t count, const std::string& what) {
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t bits = get_u64(in, what);
    std::memcpy(&data[i], &bits, 8);
  }
}

void check_magic(std::istream& in, const char* magic, const std::string& path) {
  char buf[4];
  in.read(buf, 4);
  if (!in || std::memcmp(buf, magic, 4) != 0)
    throw ValidationError("bad magic in " + path);
}

// ---- stats / quadrant json helpers -----------------------------------------

json stats_to_json(const audio::FeatureStats& s) {
  return json{{"mean", {s.mean[0], s.mean[1], s.mean[2]}},
              {"std", {s.std[0], s.std[1], s.std[2]}}};
}

audio::FeatureStats stats_from_json(const json& j) {
  audio::FeatureStats s;
  for (std::size_t i = 0; i < 3; ++i) {
    s.mean[i] = j.at("mean").at(i).get<double>();
    s.std[i] = j.at("std").at(i).get<double>();
  }
  return s;
}

json wrap_json_errors(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
  return j;
}

// ---- anfis / lstm / dictionary blobs ---------------------------------------

void write_anfis_blob(const std::string& path, const anfis::AnfisModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out.write("EVAN", 4);
  put_u32(out, 1);
  put_u32(out, static_cast<std::uint32_t>(model.n_inputs));
  put_u32(out, static_cast<std::uint32_t>(model.mfs.front().size()));
  for (const auto& row : model.mfs)
    for (const auto& mf : row) {
      const double p[3] = {mf.a, mf.b, mf.c};
      put_doubles(out, p, 3);
    }
  for (const auto& row : model.consequents) put_doubles(out, row.data(), row.size());
  if (!out) throw IoError("failed writing " + path);
}

anfis::AnfisModel read_anfis_blob(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("missing bundle component: " + path);
  check_magic(in, "EVAN", path);
  if (get_u32(in, path) != 1) throw ValidationError("unsupported blob version in " + path);
  const std::uint32_t n_inputs = get_u32(in, path);
  const std::uint32_t n_mfs = get_u32(in, path);
  if (n_inputs == 0 || n_mfs < 2) throw ValidationError("bad dimensions in " + path);

  std::vector<std::array<double, 2>> ranges(n_inputs, {0.0, 1.0});
  anfis::AnfisModel model = anfis::grid_partition_init(ranges, static_cast<int>(n_mfs));
  for (auto& row : model.mfs)
    for (auto& mf : row) {
      double p[3];
      get_doubles(in, p, 3, path);
      mf.a = p[0];
      mf.b = p[1];
      mf.c = p[2];
    }
  for (auto& row : model.consequents) get_doubles(in, row.data(), row.size(), path);
  return model;
}

void write_lstm_blob(const std::string& path, const lstm::DeepLstmModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out.write("EVLM", 4);
  put_u32(out, 1);
  put_u32(out, static_cast<std::uint32_t>(model.input_size));
  put_u32(out, static_cast<std::uint32_t>(model.layer1.hidden_size));
  put_u32(out, static_cast<std::uint32_t>(model.layer2.hidden_size));
  put_u32(out, static_cast<std::uint32_t>(model.output_size));
  auto params = lstm::model_params(const_cast<lstm::DeepLstmModel&>(model));
  for (const auto& p : params) {
    put_u64(out, p.values->size());
    put_doubles(out, p.values->data(), p.values->size());
  }
  if (!out) throw IoError("failed writing " + path);
}

lstm::DeepLstmModel read_lstm_blob(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("missing bundle component: " + path);
  check_magic(in, "EVLM", path);
  if (get_u32(in, path) != 1) throw ValidationError("unsupported blob version in " + path);
  const int input = static_cast<int>(get_u32(in, path));
  const int h1 = static_cast<int>(get_u32(in, path));
  const int h2 = static_cast<int>(get_u32(in, path));
  const int out_size = static_cast<int>(get_u32(in, path));
  lstm::DeepLstmModel model = lstm::make_deep_lstm(input, h1, h2, out_size, 0);
  for (auto& p : lstm::model_params(model)) {
    const std::uint64_t len = get_u64(in, path);
    if (len != p.values->size())
      throw ValidationError("parameter shape mismatch in " + path + " at " + p.name);
    get_doubles(in, p.values->data(), p.values->size(), path);
  }
  return model;
}

void write_dictionary(const std::string& index_path, const std::string& blob_path,
                      const gen::SegmentDictionary& dict) {
  std::ofstream blob(blob_path, std::ios::binary);
  if (!blob) throw IoError("cannot write " + blob_path);
  blob.write("EVDB", 4);
  put_u32(blob, 1);
  std::uint64_t total = 0;
  for (const auto& e : dict.entries) total += e.segment.samples.size();
  put_u64(blob, total);

  json entries = json::array();
  std::uint64_t offset = 0;
  for (const auto& e : dict.entries) {
    put_doubles(blob, e.segment.samples.data(), e.segment.samples.size());
    entries.push_back({{"key", {e.key[0], e.key[1], e.key[2]}},
                       {"source_clip", e.source_clip},
                       {"segment_index", e.segment.index},
                       {"offset", offset},
                       {"length", e.segment.samples.size()},
                       {"sample_rate", e.segment.sample_rate}});
    offset += e.segment.samples.size();
  }
  if (!blob) throw IoError("failed writing " + blob_path);

  json index;
  index["format_version"] = 1;
  index["quadrant"] = anfis::quadrant_name(dict.quadrant);
  index["stats"] = stats_to_json(dict.stats);
  index["entries"] = entries;
  std::ofstream out(index_path, std::ios::binary);
  if (!out) throw IoError("cannot write " + index_path);
  out << index.dump(2) << "\n";
  if (!out) throw IoError("failed writing " + index_path);
}

gen::SegmentDictionary read_dictionary(const std::string& index_path,
                                       const std::string& blob_path) {
  const json index = wrap_json_errors(index_path);
  try {
    if (index.at("format_version").get<int>() != 1)
      throw ValidationError("unsupported dictionary format in " + index_path);

    std::ifstream blob(blob_path, std::ios::binary);
    if (!blob) throw IoError("missing bundle component: " + blob_path);
    check_magic(blob, "EVDB", blob_path);
    if (get_u32(blob, blob_path) != 1)
      throw ValidationError("unsupported blob version in " + blob_path);
    const std::uint64_t total = get_u64(blob, blob_path);
    std::vector<double> samples(total);
    get_doubles(blob, samples.data(), total, blob_path);

    gen::SegmentDictionary dict;
    dict.quadrant = anfis::quadrant_from_name(index.at("quadrant").get<std::string>());
    dict.stats = stats_from_json(index.at("stats"));
    for (const auto& e : index.at("entries")) {
      gen::DictEntry entry;
      for (std::size_t i = 0; i < 3; ++i) entry.key[i] = e.at("key").at(i).get<double>();
      entry.source_clip = e.at("source_clip").get<std::string>();
      entry.segment.index = e.at("segment_index").get<int>();
      entry.segment.sample_rate = e.at("sample_rate").get<int>();
      const std::uint64_t offset = e.at("offset").get<std::uint64_t>();
      const std::uint64_t length = e.at("length").get<std::uint64_t>();
      if (offset + length > total)
        throw ValidationError("dictionary entry outside blob in " + index_path);
      entry.segment.samples.assign(samples.begin() + static_cast<std::ptrdiff_t>(offset),
                                   samples.begin() + static_cast<std::ptrdiff_t>(offset + length));
      entry.segment.duration =
          static_cast<double>(length) / static_cast<double>(entry.segment.sample_rate);
      dict.entries.push_back(std::move(entry));
    }
    if (dict.entries.empty()) throw ValidationError("empty dictionary in " + index_path);
    return dict;
  } catch (const json::exception& e) {
    throw ValidationError(index_path + ": " + e.what());
  }
}

std::uint64_t quadrant_seed(std::uint64_t base, anfis::EmotionQuadrant q) {
  return base + 1 + static_cast<std::uint64_t>(q);
}

}  // namespace

DatasetManifest load_manifest(const std::string& path) {
  const json j = wrap_json_errors(path);
  const fs::path base = fs::path(path).parent_path();

  DatasetManifest manifest;
  try {
    if (j.contains("config")) manifest.config_overrides = j.at("config");
    std::map<std::string, std::size_t> seen;
    for (const auto& c : j.at("clips")) {
      ClipManifest clip;
      clip.id = c.at("id").get<std::string>();
      clip.frames_dir = (base / c.at("frames_dir").get<std::string>()).string();
      clip.audio_path = (base / c.at("audio_path").get<std::string>()).string();
      clip.fps = c.at("fps").get<double>();
      clip.mos_valence = c.at("mos_valence").get<double>();
      clip.mos_arousal = c.at("mos_arousal").get<double>();
      const auto [it, inserted] = seen.emplace(clip.id, manifest.clips.size());
      if (!inserted)
        throw ValidationError("duplicate clip id '" + clip.id + "' at manifest entries " +
                              std::to_string(it->second) + " and " +
                              std::to_string(manifest.clips.size()));
      if (clip.fps <= 0.0) throw ValidationError("clip " + clip.id + ": fps must be positive");
      if (clip.mos_valence < 1.0 || clip.mos_valence > 9.0 || clip.mos_arousal < 1.0 ||
          clip.mos_arousal > 9.0)
        throw ValidationError("clip " + clip.id + ": MOS scores must lie in [1, 9]");
      if (!fs::exists(clip.frames_dir))
        throw IoError("clip " + clip.id + ": missing frames dir " + clip.frames_dir);
      if (!fs::exists(clip.audio_path))
        throw IoError("clip " + clip.id + ": missing audio file " + clip.audio_path);
      manifest.clips.push_back(std::move(clip));
    }
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
  if (manifest.clips.empty()) throw ValidationError("manifest has no clips: " + path);
  return manifest;
}

FeatureStore ingest(const DatasetManifest& manifest, const PipelineConfig& cfg, bool verbose) {
  FeatureStore store;
  store.config_hash = config_hash(cfg);

  for (const auto& clip : manifest.clips) {
    ClipFeatures features;
    features.id = clip.id;
    features.fps = clip.fps;
    features.mos_valence = clip.mos_valence;
    features.mos_arousal = clip.mos_arousal;
    features.label = anfis::quadrant_from_scores(clip.mos_valence, clip.mos_arousal);

    dsp::AudioSignal raw;
    try {
      raw = io::read_wav(clip.audio_path);
    } catch (const IoError& e) {
      throw IoError("clip " + clip.id + ": " + e.what());
    }
    const dsp::AudioSignal at8k = raw.sample_rate == kInternalSampleRate
                                      ? raw
                                      : dsp::resample(raw, kInternalSampleRate);

    auto segments = audio::segment_audio(at8k, cfg.segment_duration);
    const audio::TempoEstimate clip_tempo = audio::tempo(at8k, cfg.tempo, cfg.onset);
    features.clip_tempo = clip_tempo.bpm;
    features.clip_tempo_defaulted = clip_tempo.defaulted;

    const std::vector<std::string> frame_files = io::list_frame_files(clip.frames_dir);
    if (frame_files.empty())
      throw ValidationError("clip " + clip.id + ": no frames in " + clip.frames_dir);

    const double audio_duration = at8k.duration_seconds();
    const double frame_duration = static_cast<double>(frame_files.size()) / clip.fps;
    std::size_t usable = segments.size();
    if (std::abs(audio_duration - frame_duration) > cfg.segment_duration) {
      const std::size_t by_frames =
          static_cast<std::size_t>(frame_duration / cfg.segment_duration + 1e-9);
      usable = std::min(usable, by_frames);
      std::cerr << "warning: clip " << clip.id << " audio (" << audio_duration << " s) and frames ("
                << frame_duration << " s) disagree; truncating to " << usable << " segments\n";
      if (usable == 0)
        throw ValidationError("clip " + clip.id + ": frames cover less than one segment");
      segments.resize(usable);
    }

    std::map<std::size_t, vision::HsiDescriptor> frame_cache;
    for (const auto& segment : segments) {
      const double start_time = static_cast<double>(segment.index) * cfg.segment_duration;
      const std::size_t frame_index = std::min(
          static_cast<std::size_t>(std::max(0.0, std::round(start_time * clip.fps))),
          frame_files.size() - 1);
      auto cached = frame_cache.find(frame_index);
      if (cached == frame_cache.end()) {
        const vision::RgbImage img = io::read_ppm(frame_files[frame_index]);
        const auto descriptor =
            vision::clip_hsi_descriptors({img}, cfg.fcm, cfg.frame_side).front();
        cached = frame_cache.emplace(frame_index, descriptor).first;
      }
      features.hsi.push_back(cached->second);
      features.tlr.push_back(
          audio::extract_tlr(segment, features.clip_tempo, cfg.tempo, cfg.onset, cfg.loudness));
    }
    features.segments = std::move(segments);

    if (verbose)
      std::cerr << "ingested clip " << clip.id << ": " << features.segments.size()
                << " segments, label " << anfis::quadrant_name(features.label) << ", tempo "
                << features.clip_tempo << (features.clip_tempo_defaulted ? " (defaulted)" : "")
                << "\n";
    store.clips.push_back(std::move(features));
  }
  return store;
}

void save_store(const FeatureStore& store, const std::string& dir) {
  fs::create_directories(dir);
  const std::string blob_path = (fs::path(dir) / "segments.bin").string();
  std::ofstream blob(blob_path, std::ios::binary);
  if (!blob) throw IoError("cannot write " + blob_path);
  blob.write("EVSG", 4);
  put_u32(blob, 1);
  std::uint64_t total = 0;
  for (const auto& clip : store.clips)
    for (const auto& seg : clip.segments) total += seg.samples.size();
  put_u64(blob, total);

  json clips = json::array();
  std::uint64_t offset = 0;
  for (const auto& clip : store.clips) {
    json hsi = json::array();
    for (const auto& d : clip.hsi) hsi.push_back({d.values[0], d.values[1], d.values[2]});
    json tlr = json::array();
    for (const auto& d : clip.tlr) tlr.push_back({d.tempo, d.loudness, d.rhythm});
    json segs = json::array();
    for (const auto& seg : clip.segments) {
      put_doubles(blob, seg.samples.data(), seg.samples.size());
      segs.push_back({{"offset", offset},
                      {"length", seg.samples.size()},
                      {"index", seg.index},
                      {"sample_rate", seg.sample_rate}});
      offset += seg.samples.size();
    }
    clips.push_back({{"id", clip.id},
                     {"fps", clip.fps},
                     {"mos_valence", clip.mos_valence},
                     {"mos_arousal", clip.mos_arousal},
                     {"label", anfis::quadrant_name(clip.label)},
                     {"clip_tempo", clip.clip_tempo},
                     {"clip_tempo_defaulted", clip.clip_tempo_defaulted},
                     {"hsi", hsi},
                     {"tlr", tlr},
                     {"segments", segs}});
  }
  if (!blob) throw IoError("failed writing " + blob_path);

  json root;
  root["format_version"] = kStoreFormatVersion;
  root["config_hash"] = store.config_hash;
  root["clips"] = clips;
  const std::string index_path = (fs::path(dir) / "store.json").string();
  std::ofstream out(index_path, std::ios::binary);
  if (!out) throw IoError("cannot write " + index_path);
  out << root.dump(2) << "\n";
  if (!out) throw IoError("failed writing " + index_path);
}

FeatureStore load_store(const std::string& dir) {
  const std::string index_path = (fs::path(dir) / "store.json").string();
  const std::string blob_path = (fs::path(dir) / "segments.bin").string();
  const json root = wrap_json_errors(index_path);

  std::ifstream blob(blob_path, std::ios::binary);
  if (!blob) throw IoError("missing store component: " + blob_path);
  check_magic(blob, "EVSG", blob_path);
  if (get_u32(blob, blob_path) != 1)
    throw ValidationError("unsupported blob version in " + blob_path);
  const std::uint64_t total = get_u64(blob, blob_path);
  std::vector<double> samples(total);
  get_doubles(blob, samples.data(), total, blob_path);

  FeatureStore store;
  try {
    if (root.at("format_version").get<int>() != kStoreFormatVersion)
      throw ValidationError("unsupported store format_version in " + index_path);
    store.config_hash = root.at("config_hash").get<std::string>();
    for (const auto& c : root.at("clips")) {
      ClipFeatures clip;
      clip.id = c.at("id").get<std::string>();
      clip.fps = c.at("fps").get<double>();
      clip.mos_valence = c.at("mos_valence").get<double>();
      clip.mos_arousal = c.at("mos_arousal").get<double>();
      clip.label = anfis::quadrant_from_name(c.at("label").get<std::string>());
      clip.clip_tempo = c.at("clip_tempo").get<double>();
      clip.clip_tempo_defaulted = c.at("clip_tempo_defaulted").get<bool>();
      for (const auto& d : c.at("hsi")) {
        vision::HsiDescriptor h;
        for (std::size_t i = 0; i < 3; ++i) h.values[i] = d.at(i).get<double>();
        clip.hsi.push_back(h);
      }
      for (const auto& d : c.at("tlr"))
        clip.tlr.push_back({d.at(0).get<double>(), d.at(1).get<double>(), d.at(2).get<double>()});
      for (const auto& s : c.at("segments")) {
        audio::AudioSegment seg;
        seg.index = s.at("index").get<int>();
        seg.sample_rate = s.at("sample_rate").get<int>();
        const std::uint64_t offset = s.at("offset").get<std::uint64_t>();
        const std::uint64_t length = s.at("length").get<std::uint64_t>();
        if (offset + length > total)
          throw ValidationError("segment outside blob in " + index_path);
        seg.samples.assign(samples.begin() + static_cast<std::ptrdiff_t>(offset),
                           samples.begin() + static_cast<std::ptrdiff_t>(offset + length));
        seg.duration = static_cast<double>(length) / seg.sample_rate;
        clip.segments.push_back(std::move(seg));
      }
      if (clip.hsi.size() != clip.segments.size() || clip.tlr.size() != clip.segments.size())
        throw ValidationError("clip " + clip.id + ": descriptor/segment counts disagree");
      store.clips.push_back(std::move(clip));
    }
  } catch (const json::exception& e) {
    throw ValidationError(index_path + ": " + e.what());
  }
  return store;
}

ModelBundle train(const FeatureStore& store, const PipelineConfig& cfg, bool verbose,
                  TrainSummary* summary) {
  if (store.clips.empty()) throw ValidationError("train: empty feature store");
  if (store.config_hash != config_hash(cfg))
    throw ValidationError("train: feature store was extracted under a different config; re-ingest");

  ModelBundle bundle;
  bundle.config = cfg;

  std::vector<std::array<double, 3>> all_hsi;
  std::vector<audio::TlrDescriptor> all_tlr;
  for (const auto& clip : store.clips) {
    for (const auto& d : clip.hsi) all_hsi.push_back(d.values);
    for (const auto& d : clip.tlr) all_tlr.push_back(d);
  }
  bundle.hsi_stats = audio::fit_stats(all_hsi);
  bundle.tlr_stats = audio::fit_stats(all_tlr);

  // Score regressors on the mean descriptor of each clip.
  std::vector<std::vector<double>> anfis_inputs;
  std::vector<double> valence_targets, arousal_targets;
  for (const auto& clip : store.clips) {
    std::array<double, 3> mean{};
    for (const auto& d : clip.hsi)
      for (std::size_t i = 0; i < 3; ++i) mean[i] += d.values[i];
    for (auto& m : mean) m /= static_cast<double>(clip.hsi.size());
    anfis_inputs.push_back({mean[0], mean[1], mean[2]});
    valence_targets.push_back(clip.mos_valence);
    arousal_targets.push_back(clip.mos_arousal);
  }
  std::vector<std::array<double, 2>> ranges(3, {1e300, -1e300});
  for (const auto& x : anfis_inputs)
    for (std::size_t i = 0; i < 3; ++i) {
      ranges[i][0] = std::min(ranges[i][0], x[i]);
      ranges[i][1] = std::max(ranges[i][1], x[i]);
    }

  bundle.anfis_valence = anfis::grid_partition_init(ranges, cfg.anfis_mfs);
  bundle.anfis_arousal = anfis::grid_partition_init(ranges, cfg.anfis_mfs);
  const auto valence_trace = anfis::train_hybrid(bundle.anfis_valence, anfis_inputs,
                                                 valence_targets, cfg.anfis_epochs, cfg.anfis_lr);
  const auto arousal_trace = anfis::train_hybrid(bundle.anfis_arousal, anfis_inputs,
                                                 arousal_targets, cfg.anfis_epochs, cfg.anfis_lr);

  std::size_t agree = 0;
  for (std::size_t i = 0; i < anfis_inputs.size(); ++i) {
    const double v = std::clamp(anfis::infer(bundle.anfis_valence, anfis_inputs[i]), 1.0, 9.0);
    const double a = std::clamp(anfis::infer(bundle.anfis_arousal, anfis_inputs[i]), 1.0, 9.0);
    if (anfis::quadrant_from_scores(v, a) == store.clips[i].label) ++agree;
  }
  bundle.anfis_train_accuracy =
      static_cast<double>(agree) / static_cast<double>(anfis_inputs.size());

  if (verbose)
    std::cerr << "anfis: train accuracy " << bundle.anfis_train_accuracy * 100.0 << "%, rmse v/a "
              << valence_trace.rmse_trace.back() << "/" << arousal_trace.rmse_trace.back() << "\n";
  if (summary) {
    summary->anfis_accuracy = bundle.anfis_train_accuracy;
    summary->anfis_valence_rmse = valence_trace.rmse_trace.back();
    summary->anfis_arousal_rmse = arousal_trace.rmse_trace.back();
  }

  // One sequence model and one dictionary per represented quadrant.
  for (anfis::EmotionQuadrant q : anfis::kAllQuadrants) {
    std::vector<const ClipFeatures*> members;
    for (const auto& clip : store.clips)
      if (clip.label == q) members.push_back(&clip);
    if (members.empty()) {
      std::cerr << "notice: no clips labeled " << anfis::quadrant_name(q)
                << "; that quadrant gets no model\n";
      if (summary) summary->skipped_quadrants.push_back(q);
      continue;
    }

    std::vector<std::pair<lstm::Sequence, lstm::Sequence>> sequences;
    std::vector<gen::ClipSegments> dict_clips;
    for (const ClipFeatures* clip : members) {
      lstm::Sequence inputs, targets;
      for (std::size_t i = 0; i < clip->segments.size(); ++i) {
        const auto zx = audio::normalize(clip->hsi[i].values, bundle.hsi_stats);
        const auto zy = audio::normalize(clip->tlr[i], bundle.tlr_stats);
        inputs.push_back({zx[0], zx[1], zx[2]});
        targets.push_back({zy[0], zy[1], zy[2]});
      }
      sequences.emplace_back(std::move(inputs), std::move(targets));
      dict_clips.push_back({clip->id, clip->segments, clip->tlr});
    }

    lstm::DeepLstmModel model = lstm::make_deep_lstm(3, cfg.lstm_hidden1, cfg.lstm_hidden2, 3,
                                                     quadrant_seed(cfg.seed, q));
    lstm::TrainConfig train_cfg;
    train_cfg.epochs = cfg.lstm_epochs;
    train_cfg.learning_rate = cfg.lstm_lr;
    train_cfg.grad_clip_norm = cfg.lstm_clip;
    train_cfg.seed = quadrant_seed(cfg.seed, q);
    train_cfg.loss_target = cfg.lstm_loss_target;
    const auto trace = lstm::bptt_train(model, sequences, train_cfg);

    if (verbose)
      std::cerr << "lstm " << anfis::quadrant_name(q) << ": " << members.size() << " clips, "
                << trace.epoch_loss.size() << " epochs, final loss "
                << (trace.epoch_loss.empty() ? 0.0 : trace.epoch_loss.back()) << "\n";
    if (summary)
      summary->lstm_final_loss[q] = trace.epoch_loss.empty() ? 0.0 : trace.epoch_loss.back();

    bundle.lstms.emplace(q, std::move(model));
    bundle.dictionaries.emplace(q, gen::build_dictionary(dict_clips, bundle.tlr_stats, q));
  }
  return bundle;
}

void save_bundle(const ModelBundle& bundle, const std::string& dir) {
  fs::create_directories(dir);
  const fs::path base(dir);

  write_anfis_blob((base / "anfis_valence.bin").string(), bundle.anfis_valence);
  write_anfis_blob((base / "anfis_arousal.bin").string(), bundle.anfis_arousal);

  json lstms = json::object();
  for (const auto& [q, model] : bundle.lstms) {
    const std::string name = std::string("lstm_") + anfis::quadrant_name(q) + ".bin";
    write_lstm_blob((base / name).string(), model);
    lstms[anfis::quadrant_name(q)] = name;
  }
  json dicts = json::object();
  for (const auto& [q, dict] : bundle.dictionaries) {
    const std::string index_name = std::string("dict_") + anfis::quadrant_name(q) + ".json";
    const std::string blob_name = std::string("dict_") + anfis::quadrant_name(q) + ".bin";
    write_dictionary((base / index_name).string(), (base / blob_name).string(), dict);
    dicts[anfis::quadrant_name(q)] = {{"index", index_name}, {"blob", blob_name}};
  }

  json root;
  root["format_version"] = bundle.format_version;
  root["config"] = config_to_json(bundle.config);
  root["hsi_stats"] = stats_to_json(bundle.hsi_stats);
  root["tlr_stats"] = stats_to_json(bundle.tlr_stats);
  root["anfis_train_accuracy"] = bundle.anfis_train_accuracy;
  root["anfis"] = {{"valence", "anfis_valence.bin"}, {"arousal", "anfis_arousal.bin"}};
  root["lstms"] = lstms;
  root["dictionaries"] = dicts;

  const std::string index_path = (base / "bundle.json").string();
  std::ofstream out(index_path, std::ios::binary);
  if (!out) throw IoError("cannot write " + index_path);
  out << root.dump(2) << "\n";
  if (!out) throw IoError("failed writing " + index_path);
}

ModelBundle load_bundle(const std::string& dir) {
  const fs::path base(dir);
  const std::string index_path = (base / "bundle.json").string();
  const json root = wrap_json_errors(index_path);

  ModelBundle bundle;
  try {
    bundle.format_version = root.at("format_version").get<int>();
    if (bundle.format_version != kBundleFormatVersion)
      throw ValidationError("bundle format_version " + std::to_string(bundle.format_version) +
                            " is not supported (migration required)");
    bundle.config = config_from_json(root.at("config"));
    bundle.hsi_stats = stats_from_json(root.at("hsi_stats"));
    bundle.tlr_stats = stats_from_json(root.at("tlr_stats"));
    bundle.anfis_train_accuracy = root.at("anfis_train_accuracy").get<double>();
    bundle.anfis_valence =
        read_anfis_blob((base / root.at("anfis").at("valence").get<std::string>()).string());
    bundle.anfis_arousal =
        read_anfis_blob((base / root.at("anfis").at("arousal").get<std::string>()).string());
    for (const auto& [name, file] : root.at("lstms").items()) {
      bundle.lstms.emplace(anfis::quadrant_from_name(name),
                           read_lstm_blob((base / file.get<std::string>()).string()));
    }
    for (const auto& [name, refs] : root.at("dictionaries").items()) {
      bundle.dictionaries.emplace(
          anfis::quadrant_from_name(name),
          read_dictionary((base / refs.at("index").get<std::string>()).string(),
                          (base / refs.at("blob").get<std::string>()).string()));
    }
  } catch (const json::exception& e) {
    throw ValidationError(index_path + ": " + e.what());
  }
  for (const auto& [q, model] : bundle.lstms)
    if (bundle.dictionaries.find(q) == bundle.dictionaries.end())
      throw ValidationError(std::string("bundle has a model but no dictionary for ") +
                            anfis::quadrant_name(q));
  return bundle;
}

gen::GenerationModels bundle_view(const ModelBundle& bundle) {
  gen::GenerationModels view;
  view.valence = &bundle.anfis_valence;
  view.arousal = &bundle.anfis_arousal;
  for (const auto& [q, model] : bundle.lstms) view.lstms[q] = &model;
  for (const auto& [q, dict] : bundle.dictionaries) view.dictionaries[q] = &dict;
  view.hsi_stats = bundle.hsi_stats;
  view.fcm = bundle.config.fcm;
  view.frame_side = bundle.config.frame_side;
  view.crossfade_samples = bundle.config.crossfade_samples;
  return view;
}

std::vector<vision::RgbImage> load_generation_frames(const std::string& frames_dir, double fps,
                                                     double segment_duration) {
  if (fps <= 0.0) throw ValidationError("fps must be positive");
  const std::vector<std::string> files = io::list_frame_files(frames_dir);
  if (files.empty()) throw ValidationError("no frames in " + frames_dir);

  const double frame_duration = static_cast<double>(files.size()) / fps;
  const std::size_t steps =
      static_cast<std::size_t>(frame_duration / segment_duration + 1e-9);
  if (steps == 0)
    throw ValidationError("frames in " + frames_dir + " cover less than one output segment");

  std::vector<vision::RgbImage> frames;
  frames.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    const double start_time = static_cast<double>(t) * segment_duration;
    const std::size_t idx =
        std::min(static_cast<std::size_t>(std::max(0.0, std::round(start_time * fps))),
                 files.size() - 1);
    frames.push_back(io::read_ppm(files[idx]));
  }
  return frames;
}

GenerateFilesResult generate_to_files(const ModelBundle& bundle, const std::string& frames_dir,
                                      double fps, const std::string& out_wav) {
  const auto frames =
      load_generation_frames(frames_dir, fps, bundle.config.segment_duration);
  const auto [signal, quadrant, report] = gen::generate(frames, bundle_view(bundle));

  io::write_wav(out_wav, signal);

  json steps = json::array();
  for (const auto& step : report.steps) {
    steps.push_back({{"predicted",
                      {{"tempo", step.predicted.tempo},
                       {"loudness", step.predicted.loudness},
                       {"rhythm", step.predicted.rhythm}}},
                     {"predicted_key", {step.predicted_key[0], step.predicted_key[1],
                                        step.predicted_key[2]}},
                     {"entry_index", step.entry_index},
                     {"retrieval_mae", step.retrieval_mae}});
  }
  json j;
  j["quadrant"] = anfis::quadrant_name(quadrant);
  j["score"] = {{"valence", report.score.valence}, {"arousal", report.score.arousal}};
  j["total_duration"] = report.total_duration;
  j["steps"] = steps;

  std::string report_path = out_wav;
  if (report_path.size() > 4 && report_path.substr(report_path.size() - 4) == ".wav")
    report_path.resize(report_path.size() - 4);
  report_path += ".report.json";
  std::ofstream out(report_path, std::ios::binary);
  if (!out) throw IoError("cannot write " + report_path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("failed writing " + report_path);

  GenerateFilesResult result;
  result.quadrant = quadrant;
  result.report = report;
  result.wav_path = out_wav;
  result.report_path = report_path;
  return result;
}

EvaluationResult evaluate_manifest(const ModelBundle& bundle, const DatasetManifest& manifest,
                                   const std::string& out_dir, bool verbose) {
  fs::create_directories(out_dir);
  const fs::path base(out_dir);

  EvaluationResult result;
  double sum = 0.0;
  json clips = json::array();
  for (const auto& clip : manifest.clips) {
    try {
      const auto frames =
          load_generation_frames(clip.frames_dir, clip.fps, bundle.config.segment_duration);
      const auto [generated, quadrant, report] = gen::generate(frames, bundle_view(bundle));
      const dsp::AudioSignal original = io::read_wav(clip.audio_path);

      const eval::EvalReport er =
          eval::spectrogram_mae(original, generated, bundle.config.eval_spectro);

      io::write_wav((base / (clip.id + "_generated.wav")).string(), generated);
      eval::render_spectrogram(eval::mel_db_spectrogram(original, bundle.config.eval_spectro),
                               (base / (clip.id + "_target.pgm")).string());
      eval::render_spectrogram(eval::mel_db_spectrogram(generated, bundle.config.eval_spectro),
                               (base / (clip.id + "_generated.pgm")).string());

      result.clips.push_back({clip.id, er.spectrogram_mae});
      sum += er.spectrogram_mae;
      clips.push_back({{"id", clip.id},
                       {"spectrogram_mae", er.spectrogram_mae},
                       {"duration_compared", er.duration_compared},
                       {"quadrant", anfis::quadrant_name(quadrant)}});
      if (verbose)
        std::cerr << "evaluated " << clip.id << ": mae " << er.spectrogram_mae << "\n";
    } catch (const ValidationError& e) {
      throw ValidationError("clip " + clip.id + ": " + e.what());
    } catch (const IoError& e) {
      throw IoError("clip " + clip.id + ": " + e.what());
    }
  }
  result.mean_mae = sum / static_cast<double>(result.clips.size());

  json j;
  j["clips"] = clips;
  j["mean_mae"] = result.mean_mae;
  const std::string summary_path = (base / "summary.json").string();
  std::ofstream out(summary_path, std::ios::binary);
  if (!out) throw IoError("cannot write " + summary_path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("failed writing " + summary_path);
  return result;
}

std::string mos_stats_from_csv(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw IoError("cannot open " + csv_path);

  std::string line;
  if (!std::getline(in, line)) throw ValidationError(csv_path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "sample_id,axis,score")
    throw ValidationError(csv_path + ": line 1: header must be 'sample_id,axis,score'");

  std::map<std::pair<std::string, std::string>, std::vector<double>> groups;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t c1 = line.find(',');
    const std::size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos || line.find(',', c2 + 1) != std::string::npos)
      throw ValidationError(csv_path + ": line " + std::to_string(line_no) +
                            ": expected 'sample_id,axis,score'");
    const std::string id = line.substr(0, c1);
    const std::string axis = line.substr(c1 + 1, c2 - c1 - 1);
    if (axis != "valence" && axis != "arousal")
      throw ValidationError(csv_path + ": line " + std::to_string(line_no) +
                            ": axis must be 'valence' or 'arousal'");
    double score = 0.0;
    try {
      std::size_t used = 0;
      score = std::stod(line.substr(c2 + 1), &used);
      if (used != line.size() - c2 - 1) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw ValidationError(csv_path + ": line " + std::to_string(line_no) +
                            ": score is not a number");
    }
    if (score < 1.0 || score > 9.0)
      throw ValidationError(csv_path + ": line " + std::to_string(line_no) +
                            ": score outside [1, 9]");
    groups[{id, axis}].push_back(score);
  }
  if (groups.empty()) throw ValidationError(csv_path + ": no score rows");

  std::ostringstream out;
  out << "sample_id,axis,mos\n";
  for (const auto& [key, scores] : groups) {
    eval::MosSample sample;
    sample.scores = scores;
    const double mean = eval::mos_mean(sample);
    const double stddev = scores.size() >= 2 ? std::sqrt(eval::mos_variance(sample)) : 0.0;
    out << key.first << "," << key.second << "," << eval::format_mos(mean, stddev) << "\n";
  }
  return out.str();
}

}  // namespace emova::pipeline
