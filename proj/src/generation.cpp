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

#include "emova/generation.hpp"

#include <cmath>

#include "emova/errors.hpp"

namespace emova::gen {

SegmentDictionary build_dictionary(const std::vector<ClipSegments>& clips,
                                   const audio::FeatureStats& stats,
                                   anfis::EmotionQuadrant quadrant) {
  SegmentDictionary dict;
  dict.stats = stats;
  dict.quadrant = quadrant;
  for (const auto& clip : clips) {
    if (clip.segments.size() != clip.descriptors.size())
      throw ValidationError("build_dictionary: clip '" + clip.clip_id +
                            "' has mismatched segment/descriptor counts");
    for (std::size_t i = 0; i < clip.segments.size(); ++i) {
      DictEntry entry;
      entry.key = audio::normalize(clip.descriptors[i], stats);
      entry.segment = clip.segments[i];
      entry.source_clip = clip.clip_id;
      dict.entries.push_back(std::move(entry));
    }
  }
  if (dict.entries.empty()) throw ValidationError("build_dictionary: empty corpus");
  return dict;
}

double mae(const std::vector<double>& d, const std::vector<double>& f) {
  if (d.size() != f.size() || d.empty()) throw ValidationError("mae: dimension mismatch");
  double acc = 0.0;
  for (std::size_t j = 0; j < d.size(); ++j) acc += std::abs(d[j] - f[j]);
  return acc / static_cast<double>(d.size());
}

double mae(const std::array<double, 3>& d, const std::array<double, 3>& f) {
  return (std::abs(d[0] - f[0]) + std::abs(d[1] - f[1]) + std::abs(d[2] - f[2])) / 3.0;
}

Retrieval nearest_segment(const SegmentDictionary& dict, const std::array<double, 3>& key) {
  if (dict.entries.empty()) throw ValidationError("nearest_segment: empty dictionary");
  Retrieval best{0, mae(key, dict.entries.front().key)};
  for (std::size_t i = 1; i < dict.entries.size(); ++i) {
    const double m = mae(key, dict.entries[i].key);
    if (m < best.mae) best = {i, m};
  }
  return best;
}

dsp::AudioSignal assemble_audio(const std::vector<audio::AudioSegment>& segments, int crossfade) {
  if (segments.empty()) throw ValidationError("assemble_audio: no segments");
  if (crossfade < 0) throw ValidationError("assemble_audio: negative crossfade");
  const int rate = segments.front().sample_rate;
  for (const auto& seg : segments) {
    if (seg.sample_rate != rate)
      throw ValidationError("assemble_audio: segments carry mixed sample rates");
    if (static_cast<std::size_t>(crossfade) > seg.samples.size())
      throw ValidationError("assemble_audio: crossfade longer than a segment");
  }

  dsp::AudioSignal out;
  out.sample_rate = rate;
  out.samples = segments.front().samples;
  for (std::size_t s = 1; s < segments.size(); ++s) {
    const auto& next = segments[s].samples;
    const std::size_t f = static_cast<std::size_t>(crossfade);
    const std::size_t tail = out.samples.size() - f;
    for (std::size_t i = 0; i < f; ++i) {
      const double r = static_cast<double>(i + 1) / static_cast<double>(f + 1);
      out.samples[tail + i] = out.samples[tail + i] * (1.0 - r) + next[i] * r;
    }
    out.samples.insert(out.samples.end(), next.begin() + static_cast<std::ptrdiff_t>(f),
                       next.end());
  }
  return out;
}

std::tuple<dsp::AudioSignal, anfis::EmotionQuadrant, GenerationReport> generate(
    const std::vector<vision::RgbImage>& frames, const GenerationModels& models) {
  if (frames.empty()) throw ValidationError("generate: no frames");
  if (models.valence == nullptr || models.arousal == nullptr)
    throw ValidationError("generate: classifier models missing");

  const std::vector<vision::HsiDescriptor> descriptors =
      vision::clip_hsi_descriptors(frames, models.fcm, models.frame_side);

  vision::HsiDescriptor mean_desc;
  for (const auto& d : descriptors)
    for (std::size_t i = 0; i < 3; ++i) mean_desc.values[i] += d.values[i];
  for (std::size_t i = 0; i < 3; ++i)
    mean_desc.values[i] /= static_cast<double>(descriptors.size());

  const auto [score, quadrant] =
      anfis::classify_quadrant(*models.valence, *models.arousal, mean_desc);

  const auto lstm_it = models.lstms.find(quadrant);
  const auto dict_it = models.dictionaries.find(quadrant);
  if (lstm_it == models.lstms.end() || dict_it == models.dictionaries.end())
    throw ValidationError(std::string("generate: no trained model for quadrant '") +
                          anfis::quadrant_name(quadrant) + "'");
  const SegmentDictionary& dict = *dict_it->second;

  lstm::Sequence inputs;
  inputs.reserve(descriptors.size());
  for (const auto& d : descriptors) {
    const auto z = audio::normalize(d.values, models.hsi_stats);
    inputs.push_back({z[0], z[1], z[2]});
  }
  const lstm::Sequence predicted = lstm::forward(*lstm_it->second, inputs);

  GenerationReport report;
  report.score = score;
  report.quadrant = quadrant;
  std::vector<audio::AudioSegment> chosen;
  chosen.reserve(predicted.size());
  for (const auto& p : predicted) {
    const std::array<double, 3> key{p[0], p[1], p[2]};
    const Retrieval hit = nearest_segment(dict, key);
    chosen.push_back(dict.entries[hit.index].segment);

    GenerationStep step;
    step.predicted_key = key;
    step.predicted = audio::denormalize(key, dict.stats);
    step.entry_index = hit.index;
    step.retrieval_mae = hit.mae;
    report.steps.push_back(step);
  }

  dsp::AudioSignal out = assemble_audio(chosen, models.crossfade_samples);
  report.total_duration = out.duration_seconds();
  return {std::move(out), quadrant, std::move(report)};
}

}  // namespace emova::gen
