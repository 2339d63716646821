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

#include <cmath>

#include "emova/errors.hpp"
#include "emova/generation.hpp"
#include "emova/rng.hpp"
#include "oracles.hpp"

using namespace emova;

namespace {

gen::ClipSegments make_clip(const std::string& id, double bpm, double seconds) {
  const auto sig = oracles::click_track(bpm, seconds, 8000, 0.8, 0.2);
  gen::ClipSegments clip;
  clip.clip_id = id;
  clip.segments = audio::segment_audio(sig, 0.5);
  const double clip_bpm = audio::tempo(sig).bpm;
  for (const auto& seg : clip.segments)
    clip.descriptors.push_back(audio::extract_tlr(seg, clip_bpm));
  return clip;
}

}  // namespace

TEST_CASE("dictionary construction preserves slices and order") {
  const auto clip = make_clip("clip-a", 120.0, 6.0);
  const auto stats = audio::fit_stats(clip.descriptors);
  const auto dict = gen::build_dictionary({clip}, stats, anfis::EmotionQuadrant::PosHigh);
  REQUIRE(dict.entries.size() == 12);

  const auto source = oracles::click_track(120.0, 6.0, 8000, 0.8, 0.2);
  for (std::size_t i = 0; i < dict.entries.size(); ++i) {
    const auto& entry = dict.entries[i];
    CHECK(entry.source_clip == "clip-a");
    REQUIRE(entry.segment.samples.size() == 4000);
    for (std::size_t s = 0; s < 4000; ++s)
      CHECK(entry.segment.samples[s] == source.samples[i * 4000 + s]);
  }

  // Keys fitted on the same corpus are centered. A constant dimension hits
  // the 1e-8 std floor, which magnifies float residue, hence the tolerance.
  std::array<double, 3> mean{};
  for (const auto& entry : dict.entries)
    for (std::size_t j = 0; j < 3; ++j) mean[j] += entry.key[j];
  for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(mean[j] / 12.0) < 1e-6);

  CHECK_THROWS_AS(gen::build_dictionary({}, stats, anfis::EmotionQuadrant::PosLow),
                  ValidationError);
}

TEST_CASE("mean absolute error") {
  const std::vector<double> d{1.0, 2.0, 3.0};
  CHECK(gen::mae(d, std::vector<double>{1.0, 2.0, 3.0}) == 0.0);
  CHECK(gen::mae(d, std::vector<double>{2.0, 2.0, 5.0}) == doctest::Approx(1.0));
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> a(4), b(4);
    for (double& v : a) v = rng.uniform(-3.0, 3.0);
    for (double& v : b) v = rng.uniform(-3.0, 3.0);
    CHECK(gen::mae(a, b) == doctest::Approx(gen::mae(b, a)));
    CHECK(gen::mae(a, b) >= 0.0);
  }
  CHECK_THROWS_AS(gen::mae(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}),
                  ValidationError);
}

TEST_CASE("nearest segment: exact hits, ties, brute-force equivalence") {
  Rng rng(23);
  gen::SegmentDictionary dict;
  dict.quadrant = anfis::EmotionQuadrant::NegLow;
  for (int i = 0; i < 100; ++i) {
    gen::DictEntry entry;
    entry.key = {rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
    entry.segment.sample_rate = 8000;
    entry.segment.samples.assign(8, static_cast<double>(i) / 100.0);
    dict.entries.push_back(entry);
  }

  for (std::size_t i = 0; i < dict.entries.size(); ++i) {
    const auto hit = gen::nearest_segment(dict, dict.entries[i].key);
    CHECK(hit.mae == 0.0);
    // Duplicate keys resolve to the first occurrence.
    bool first_duplicate = true;
    for (std::size_t j = 0; j < i; ++j)
      if (dict.entries[j].key == dict.entries[i].key) first_duplicate = false;
    if (first_duplicate) CHECK(hit.index == i);
  }

  for (int probe = 0; probe < 300; ++probe) {
    const std::array<double, 3> q{rng.uniform(-2.5, 2.5), rng.uniform(-2.5, 2.5),
                                  rng.uniform(-2.5, 2.5)};
    const auto hit = gen::nearest_segment(dict, q);
    std::size_t best = 0;
    double best_mae = gen::mae(q, dict.entries[0].key);
    for (std::size_t i = 1; i < dict.entries.size(); ++i) {
      const double m = gen::mae(q, dict.entries[i].key);
      if (m < best_mae) {
        best_mae = m;
        best = i;
      }
    }
    CHECK(hit.index == best);
    CHECK(hit.mae == doctest::Approx(best_mae));
  }

  gen::SegmentDictionary tie;
  tie.entries.resize(2);
  tie.entries[0].key = {1.0, 0.0, 0.0};
  tie.entries[1].key = {-1.0, 0.0, 0.0};
  CHECK(gen::nearest_segment(tie, {0.0, 0.0, 0.0}).index == 0);

  gen::SegmentDictionary empty;
  CHECK_THROWS_AS(gen::nearest_segment(empty, {0.0, 0.0, 0.0}), ValidationError);
}

TEST_CASE("audio assembly: identity, concatenation, crossfade ramp") {
  audio::AudioSegment a;
  a.sample_rate = 8000;
  a.samples.assign(8000, 0.0);
  audio::AudioSegment b = a;
  b.samples.assign(8000, 1.0);

  const auto single = gen::assemble_audio({a});
  CHECK(single.samples == a.samples);

  const auto joined = gen::assemble_audio({a, b});
  REQUIRE(joined.samples.size() == 16000);
  for (std::size_t i = 0; i < 8000; ++i) CHECK(joined.samples[i] == 0.0);
  for (std::size_t i = 8000; i < 16000; ++i) CHECK(joined.samples[i] == 1.0);

  const int fade = 80;
  const auto faded = gen::assemble_audio({a, b}, fade);
  REQUIRE(faded.samples.size() == 16000 - 80);  // 2 s minus 10 ms
  double prev = -1.0;
  for (int i = 0; i < fade; ++i) {
    const double expected = static_cast<double>(i + 1) / (fade + 1);
    const double got = faded.samples[static_cast<std::size_t>(8000 - fade + i)];
    CHECK(got == doctest::Approx(expected).epsilon(1e-12));
    CHECK(got > prev);
    prev = got;
  }

  audio::AudioSegment other_rate = b;
  other_rate.sample_rate = 16000;
  CHECK_THROWS_AS(gen::assemble_audio({a, other_rate}), ValidationError);
}

TEST_CASE("generate routes, retrieves, concatenates, and stays deterministic") {
  // Constant-output classifiers pin the quadrant.
  auto valence = anfis::grid_partition_init({{0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}}, 2);
  auto arousal = valence;
  for (auto& row : valence.consequents) row = {0.0, 0.0, 0.0, 8.0};
  for (auto& row : arousal.consequents) row = {0.0, 0.0, 0.0, 7.0};

  const auto clip = make_clip("train-clip", 120.0, 6.0);
  const auto stats = audio::fit_stats(clip.descriptors);
  const auto dict = gen::build_dictionary({clip}, stats, anfis::EmotionQuadrant::PosHigh);
  const auto model = lstm::make_deep_lstm(3, 4, 5, 3, 9);

  gen::GenerationModels models;
  models.valence = &valence;
  models.arousal = &arousal;
  models.lstms[anfis::EmotionQuadrant::PosHigh] = &model;
  models.dictionaries[anfis::EmotionQuadrant::PosHigh] = &dict;
  models.hsi_stats = audio::FeatureStats{};
  models.frame_side = 16;

  std::vector<vision::RgbImage> frames;
  for (int f = 0; f < 3; ++f) {
    vision::RgbImage img;
    img.width = 16;
    img.height = 16;
    img.data.assign(3 * 256, 0.2 + 0.2 * f);
    frames.push_back(img);
  }

  const auto [audio_out, quadrant, report] = gen::generate(frames, models);
  CHECK(quadrant == anfis::EmotionQuadrant::PosHigh);
  CHECK(report.steps.size() == 3);
  CHECK(audio_out.samples.size() == 3 * 4000);
  CHECK(report.total_duration == doctest::Approx(1.5));

  const auto [again, q2, r2] = gen::generate(frames, models);
  CHECK(again.samples == audio_out.samples);
  CHECK(q2 == quadrant);
  REQUIRE(r2.steps.size() == report.steps.size());
  for (std::size_t s = 0; s < report.steps.size(); ++s)
    CHECK(r2.steps[s].entry_index == report.steps[s].entry_index);

  // Single frame in, one segment out.
  const auto [one_seg, q3, r3] = gen::generate({frames[0]}, models);
  CHECK(one_seg.samples.size() == 4000);
  CHECK(r3.steps.size() == 1);

  // Remove the routed quadrant: the error names it.
  models.lstms.clear();
  try {
    gen::generate(frames, models);
    FAIL("expected a missing-model error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("pos_high") != std::string::npos);
  }
}
