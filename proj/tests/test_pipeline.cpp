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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "emova/errors.hpp"
#include "emova/fixture.hpp"
#include "emova/pipeline.hpp"

using namespace emova;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const char* name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string sub(const std::string& name) const { return (path / name).string(); }
};

// Small models keep the suite quick; the planted mapping still holds.
pipeline::PipelineConfig quick_config() {
  pipeline::PipelineConfig cfg;
  cfg.lstm_hidden1 = 12;
  cfg.lstm_hidden2 = 16;
  cfg.lstm_epochs = 60;
  cfg.lstm_loss_target = 1e-4;
  cfg.anfis_epochs = 3;
  return cfg;
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("config: overrides, validation, hashing") {
  pipeline::PipelineConfig cfg;
  pipeline::apply_overrides(cfg, nlohmann::json::parse(R"({
    "segment_duration": 0.25,
    "lstm": {"hidden1": 8, "epochs": 10},
    "anfis": {"epochs": 2}
  })"));
  CHECK(cfg.segment_duration == 0.25);
  CHECK(cfg.lstm_hidden1 == 8);
  CHECK(cfg.lstm_hidden2 == 300);  // untouched default
  CHECK(cfg.lstm_epochs == 10);
  CHECK(cfg.anfis_epochs == 2);

  CHECK_THROWS_AS(
      pipeline::apply_overrides(cfg, nlohmann::json::parse(R"({"segment_duration": -1})")),
      ValidationError);

  const auto h1 = pipeline::config_hash(cfg);
  CHECK(h1.size() == 16);
  pipeline::PipelineConfig other = cfg;
  other.lstm_epochs = 11;
  CHECK(pipeline::config_hash(other) != h1);
  CHECK(pipeline::config_hash(cfg) == h1);

  const auto round = pipeline::config_from_json(pipeline::config_to_json(cfg));
  CHECK(pipeline::config_hash(round) == h1);
}

TEST_CASE("fixture: deterministic bytes and the planted audio-visual mapping") {
  TempDir tmp("emova_fixture_test");
  pipeline::FixtureSpec spec;
  spec.clips_per_quadrant = 1;
  pipeline::write_fixture(tmp.sub("a"), 7, spec);
  pipeline::write_fixture(tmp.sub("b"), 7, spec);

  // Same seed, same bytes.
  for (const auto& entry : fs::recursive_directory_iterator(tmp.sub("a"))) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), tmp.sub("a"));
    CHECK(read_bytes(entry.path()) == read_bytes(fs::path(tmp.sub("b")) / rel));
  }

  const auto manifest = pipeline::load_manifest(tmp.sub("a") + "/manifest.json");
  CHECK(manifest.clips.size() == 4);

  // Run the extractors: the bright/loud plant must be visible in features.
  auto store = pipeline::ingest(manifest, pipeline::PipelineConfig{}, false);
  REQUIRE(store.clips.size() == 4);
  double high_intensity = 0.0, low_intensity = 0.0;
  double high_loudness = 0.0, low_loudness = 0.0;
  double high_tempo = 0.0, low_tempo = 0.0;
  for (const auto& clip : store.clips) {
    double intensity = 0.0, loud = 0.0;
    for (const auto& d : clip.hsi) intensity += d.values[2];
    for (const auto& d : clip.tlr) loud += d.loudness;
    intensity /= static_cast<double>(clip.hsi.size());
    loud /= static_cast<double>(clip.tlr.size());
    if (clip.id == "pos_high_0") {
      high_intensity = intensity;
      high_loudness = loud;
      high_tempo = clip.clip_tempo;
    }
    if (clip.id == "neg_low_0") {
      low_intensity = intensity;
      low_loudness = loud;
      low_tempo = clip.clip_tempo;
    }
  }
  CHECK(high_intensity > low_intensity + 0.2);
  CHECK(high_loudness > low_loudness + 6.0);
  CHECK(high_tempo > low_tempo + 50.0);
}

TEST_CASE("manifest validation: duplicates, ranges, missing files") {
  TempDir tmp("emova_manifest_test");
  pipeline::FixtureSpec spec;
  spec.clips_per_quadrant = 1;
  pipeline::write_fixture(tmp.sub("fxt"), 0, spec);

  auto j = nlohmann::json::parse(read_bytes(tmp.sub("fxt") + "/manifest.json"));
  auto dup = j;
  dup["clips"].push_back(dup["clips"][0]);
  std::ofstream(tmp.sub("fxt") + "/dup.json") << dup.dump();
  try {
    pipeline::load_manifest(tmp.sub("fxt") + "/dup.json");
    FAIL("expected duplicate-id rejection");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("pos_high_0") != std::string::npos);
  }

  auto bad_mos = j;
  bad_mos["clips"][0]["mos_valence"] = 11.0;
  std::ofstream(tmp.sub("fxt") + "/bad_mos.json") << bad_mos.dump();
  CHECK_THROWS_AS(pipeline::load_manifest(tmp.sub("fxt") + "/bad_mos.json"), ValidationError);

  auto missing = j;
  missing["clips"][0]["audio_path"] = "nowhere.wav";
  std::ofstream(tmp.sub("fxt") + "/missing.json") << missing.dump();
  CHECK_THROWS_AS(pipeline::load_manifest(tmp.sub("fxt") + "/missing.json"), IoError);
}

TEST_CASE("ingest alignment and store round trip") {
  TempDir tmp("emova_ingest_test");
  pipeline::FixtureSpec spec;
  spec.clips_per_quadrant = 1;
  pipeline::write_fixture(tmp.sub("fxt"), 3, spec);
  const auto manifest = pipeline::load_manifest(tmp.sub("fxt") + "/manifest.json");
  const auto cfg = quick_config();
  const auto store = pipeline::ingest(manifest, cfg, false);

  for (const auto& clip : store.clips) {
    CHECK(clip.segments.size() == 12);  // 6 s at 0.5 s segments
    CHECK(clip.hsi.size() == clip.segments.size());
    CHECK(clip.tlr.size() == clip.segments.size());
    for (std::size_t i = 0; i < clip.segments.size(); ++i)
      CHECK(clip.segments[i].index == static_cast<int>(i));
  }

  pipeline::save_store(store, tmp.sub("store"));
  const auto loaded = pipeline::load_store(tmp.sub("store"));
  CHECK(loaded.config_hash == store.config_hash);
  REQUIRE(loaded.clips.size() == store.clips.size());
  for (std::size_t c = 0; c < store.clips.size(); ++c) {
    const auto& a = store.clips[c];
    const auto& b = loaded.clips[c];
    CHECK(a.id == b.id);
    CHECK(a.label == b.label);
    CHECK(a.clip_tempo == b.clip_tempo);
    for (std::size_t i = 0; i < a.segments.size(); ++i) {
      CHECK(a.segments[i].samples == b.segments[i].samples);
      CHECK(a.hsi[i].values == b.hsi[i].values);
      CHECK(a.tlr[i].tempo == b.tlr[i].tempo);
      CHECK(a.tlr[i].loudness == b.tlr[i].loudness);
      CHECK(a.tlr[i].rhythm == b.tlr[i].rhythm);
    }
  }

  // A second ingest of the same inputs is byte-identical on disk.
  pipeline::save_store(pipeline::ingest(manifest, cfg, false), tmp.sub("store2"));
  CHECK(read_bytes(tmp.sub("store") + "/store.json") ==
        read_bytes(tmp.sub("store2") + "/store.json"));
  CHECK(read_bytes(tmp.sub("store") + "/segments.bin") ==
        read_bytes(tmp.sub("store2") + "/segments.bin"));
}

TEST_CASE("train guards: empty store, stale config hash, missing quadrants") {
  TempDir tmp("emova_train_test");
  CHECK_THROWS_AS(pipeline::train(pipeline::FeatureStore{}, quick_config()), ValidationError);

  pipeline::FixtureSpec spec;
  spec.clips_per_quadrant = 1;
  pipeline::write_fixture(tmp.sub("fxt"), 5, spec);
  const auto manifest = pipeline::load_manifest(tmp.sub("fxt") + "/manifest.json");
  const auto cfg = quick_config();
  auto store = pipeline::ingest(manifest, cfg, false);

  auto other = cfg;
  other.lstm_epochs += 1;
  CHECK_THROWS_AS(pipeline::train(store, other), ValidationError);

  // Keep only the two positive-valence clips: negatives get no models.
  store.clips.erase(std::remove_if(store.clips.begin(), store.clips.end(),
                                   [](const pipeline::ClipFeatures& c) {
                                     return c.label != anfis::EmotionQuadrant::PosHigh &&
                                            c.label != anfis::EmotionQuadrant::PosLow;
                                   }),
                    store.clips.end());
  pipeline::TrainSummary summary;
  const auto bundle = pipeline::train(store, cfg, false, &summary);
  CHECK(bundle.lstms.size() == 2);
  CHECK(bundle.dictionaries.size() == 2);
  CHECK(summary.skipped_quadrants.size() == 2);
  CHECK(bundle.lstms.count(anfis::EmotionQuadrant::PosHigh) == 1);
  CHECK(bundle.lstms.count(anfis::EmotionQuadrant::NegLow) == 0);

  // Generating for an uncovered quadrant names it.
  const auto frames = pipeline::load_generation_frames(tmp.sub("fxt") + "/neg_low_0/frames", 2.0,
                                                       cfg.segment_duration);
  try {
    gen::generate(frames, pipeline::bundle_view(bundle));
    FAIL("expected missing-model failure");
  } catch (const ValidationError& e) {
    const std::string what = e.what();
    CHECK(what.find("neg_") != std::string::npos);
  }
}

TEST_CASE("bundle round trip preserves every parameter bit-exactly") {
  TempDir tmp("emova_bundle_test");
  pipeline::FixtureSpec spec;
  spec.clips_per_quadrant = 1;
  pipeline::write_fixture(tmp.sub("fxt"), 11, spec);
  const auto manifest = pipeline::load_manifest(tmp.sub("fxt") + "/manifest.json");
  const auto cfg = quick_config();
  const auto store = pipeline::ingest(manifest, cfg, false);
  const auto bundle = pipeline::train(store, cfg, false);
  pipeline::save_bundle(bundle, tmp.sub("bundle"));
  const auto loaded = pipeline::load_bundle(tmp.sub("bundle"));

  CHECK(loaded.format_version == pipeline::kBundleFormatVersion);
  CHECK(loaded.anfis_train_accuracy == bundle.anfis_train_accuracy);
  CHECK(loaded.hsi_stats.mean == bundle.hsi_stats.mean);
  CHECK(loaded.hsi_stats.std == bundle.hsi_stats.std);
  CHECK(loaded.tlr_stats.mean == bundle.tlr_stats.mean);

  for (std::size_t j = 0; j < bundle.anfis_valence.mfs.size(); ++j)
    for (std::size_t q = 0; q < bundle.anfis_valence.mfs[j].size(); ++q) {
      CHECK(loaded.anfis_valence.mfs[j][q].a == bundle.anfis_valence.mfs[j][q].a);
      CHECK(loaded.anfis_valence.mfs[j][q].b == bundle.anfis_valence.mfs[j][q].b);
      CHECK(loaded.anfis_valence.mfs[j][q].c == bundle.anfis_valence.mfs[j][q].c);
    }
  CHECK(loaded.anfis_valence.consequents == bundle.anfis_valence.consequents);
  CHECK(loaded.anfis_arousal.consequents == bundle.anfis_arousal.consequents);

  REQUIRE(loaded.lstms.size() == bundle.lstms.size());
  for (const auto& [q, model] : bundle.lstms) {
    auto& reloaded = const_cast<lstm::DeepLstmModel&>(loaded.lstms.at(q));
    auto& original = const_cast<lstm::DeepLstmModel&>(model);
    auto pa = lstm::model_params(original);
    auto pb = lstm::model_params(reloaded);
    for (std::size_t p = 0; p < pa.size(); ++p) CHECK(*pa[p].values == *pb[p].values);
  }
  for (const auto& [q, dict] : bundle.dictionaries) {
    const auto& other = loaded.dictionaries.at(q);
    REQUIRE(other.entries.size() == dict.entries.size());
    for (std::size_t i = 0; i < dict.entries.size(); ++i) {
      CHECK(other.entries[i].key == dict.entries[i].key);
      CHECK(other.entries[i].segment.samples == dict.entries[i].segment.samples);
      CHECK(other.entries[i].source_clip == dict.entries[i].source_clip);
    }
  }

  // Identical inference through the round trip.
  const auto frames = pipeline::load_generation_frames(tmp.sub("fxt") + "/pos_high_0/frames", 2.0,
                                                       cfg.segment_duration);
  const auto [wav_a, qa, ra] = gen::generate(frames, pipeline::bundle_view(bundle));
  const auto [wav_b, qb, rb] = gen::generate(frames, pipeline::bundle_view(loaded));
  CHECK(wav_a.samples == wav_b.samples);
  CHECK(qa == qb);

  // Unknown format version and corrupted index must not load.
  auto j = nlohmann::json::parse(read_bytes(tmp.sub("bundle") + "/bundle.json"));
  j["format_version"] = 99;
  std::ofstream(tmp.sub("bundle") + "/bundle.json") << j.dump();
  CHECK_THROWS_AS(pipeline::load_bundle(tmp.sub("bundle")), ValidationError);
  std::ofstream(tmp.sub("bundle") + "/bundle.json") << "{ corrupted";
  CHECK_THROWS_AS(pipeline::load_bundle(tmp.sub("bundle")), ValidationError);
}

TEST_CASE("generation frame selection follows segment boundaries") {
  TempDir tmp("emova_frames_test");
  pipeline::FixtureSpec spec;
  spec.clips_per_quadrant = 1;
  spec.fps = 4.0;  // two frames per segment; only boundary frames are used
  pipeline::write_fixture(tmp.sub("fxt"), 1, spec);

  const auto frames =
      pipeline::load_generation_frames(tmp.sub("fxt") + "/pos_high_0/frames", 4.0, 0.5);
  CHECK(frames.size() == 12);

  CHECK_THROWS_AS(pipeline::load_generation_frames(tmp.sub("fxt"), 4.0, 0.5), ValidationError);
  CHECK_THROWS_AS(
      pipeline::load_generation_frames(tmp.sub("fxt") + "/pos_high_0/frames", -1.0, 0.5),
      ValidationError);
}

TEST_CASE("ingest truncates on frame/audio duration mismatch") {
  TempDir tmp("emova_mismatch_test");
  pipeline::FixtureSpec spec;
  spec.clips_per_quadrant = 1;
  pipeline::write_fixture(tmp.sub("fxt"), 2, spec);

  // Drop frames beyond 2 s from one clip: 12 -> 4 frames at 2 fps.
  const fs::path frames = fs::path(tmp.sub("fxt")) / "pos_low_0" / "frames";
  for (int f = 4; f < 12; ++f) {
    char name[32];
    std::snprintf(name, sizeof(name), "%06d.ppm", f);
    fs::remove(frames / name);
  }

  const auto manifest = pipeline::load_manifest(tmp.sub("fxt") + "/manifest.json");
  const auto store = pipeline::ingest(manifest, quick_config(), false);
  for (const auto& clip : store.clips) {
    if (clip.id == "pos_low_0") {
      CHECK(clip.segments.size() == 4);  // truncated to the frames' 2 s
      CHECK(clip.hsi.size() == 4);
    } else {
      CHECK(clip.segments.size() == 12);
    }
  }
}

TEST_CASE("evaluation of a single-clip manifest has mean equal to its row") {
  TempDir tmp("emova_eval_test");
  pipeline::FixtureSpec spec;
  spec.clips_per_quadrant = 1;
  pipeline::write_fixture(tmp.sub("fxt"), 9, spec);
  const auto manifest = pipeline::load_manifest(tmp.sub("fxt") + "/manifest.json");
  const auto cfg = quick_config();
  const auto bundle = pipeline::train(pipeline::ingest(manifest, cfg, false), cfg, false);

  pipeline::DatasetManifest single;
  single.clips.push_back(manifest.clips.front());
  const auto result = pipeline::evaluate_manifest(bundle, single, tmp.sub("report"));
  REQUIRE(result.clips.size() == 1);
  CHECK(result.mean_mae == result.clips.front().spectrogram_mae);
  CHECK(result.mean_mae >= 0.0);
  CHECK(result.mean_mae <= 1.0);
  CHECK(fs::exists(tmp.sub("report") + "/summary.json"));
  CHECK(fs::exists(tmp.sub("report") + "/" + single.clips.front().id + "_target.pgm"));
  CHECK(fs::exists(tmp.sub("report") + "/" + single.clips.front().id + "_generated.csv"));

  // Determinism of the whole evaluation output.
  const auto again = pipeline::evaluate_manifest(bundle, single, tmp.sub("report2"));
  CHECK(again.mean_mae == result.mean_mae);
  CHECK(read_bytes(tmp.sub("report") + "/summary.json") ==
        read_bytes(tmp.sub("report2") + "/summary.json"));
}

TEST_CASE("MOS statistics command formatting and errors") {
  TempDir tmp("emova_mos_test");
  std::ofstream(tmp.sub("scores.csv"))
      << "sample_id,axis,score\n"
      << "s1,valence,6\ns1,valence,7\ns1,valence,8\n"
      << "s1,arousal,6\ns1,arousal,6\ns1,arousal,6\ns1,arousal,6\ns1,arousal,6\ns1,arousal,6\ns1,arousal,6\n"
      << "s2,valence,4.5\n";
  const auto table = pipeline::mos_stats_from_csv(tmp.sub("scores.csv"));
  CHECK(table.find("s1,valence,7.00 ± 1.00") != std::string::npos);
  CHECK(table.find("s1,arousal,6.00 ± 0.00") != std::string::npos);
  CHECK(table.find("s2,valence,4.50 ± 0.00") != std::string::npos);

  std::ofstream(tmp.sub("bad.csv")) << "sample_id,axis,score\ns1,valence\n";
  try {
    pipeline::mos_stats_from_csv(tmp.sub("bad.csv"));
    FAIL("expected parse failure");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }

  std::ofstream(tmp.sub("axis.csv")) << "sample_id,axis,score\ns1,sideways,5\n";
  CHECK_THROWS_AS(pipeline::mos_stats_from_csv(tmp.sub("axis.csv")), ValidationError);
  std::ofstream(tmp.sub("header.csv")) << "id,axis,score\n";
  CHECK_THROWS_AS(pipeline::mos_stats_from_csv(tmp.sub("header.csv")), ValidationError);
}
