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

#include "emova/audio_features.hpp"
#include "emova/errors.hpp"
#include "emova/rng.hpp"
#include "oracles.hpp"

using namespace emova;

namespace {

dsp::AudioSignal silence(double seconds, int rate = 8000) {
  dsp::AudioSignal s;
  s.sample_rate = rate;
  s.samples.assign(static_cast<std::size_t>(seconds * rate), 0.0);
  return s;
}

dsp::AudioSignal sine(double hz, double seconds, int rate = 8000, double amp = 1.0) {
  dsp::AudioSignal s;
  s.sample_rate = rate;
  const std::size_t n = static_cast<std::size_t>(std::llround(seconds * rate));
  s.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    s.samples[i] = amp * std::sin(2.0 * M_PI * hz * static_cast<double>(i) / rate);
  return s;
}

audio::AudioSegment as_segment(const dsp::AudioSignal& sig) {
  audio::AudioSegment seg;
  seg.samples = sig.samples;
  seg.sample_rate = sig.sample_rate;
  seg.index = 0;
  seg.duration = sig.duration_seconds();
  return seg;
}

}  // namespace

TEST_CASE("segment_audio counts, remainder policy, exact reconstruction") {
  const auto six = oracles::click_track(120.0, 6.0);
  const auto segments = audio::segment_audio(six, 0.5);
  CHECK(segments.size() == 12);

  dsp::AudioSignal longer = six;
  longer.samples.resize(longer.samples.size() + 2400, 0.25);  // 6.3 s total
  const auto dropped = audio::segment_audio(longer, 0.5);
  CHECK(dropped.size() == 12);

  std::vector<double> rebuilt;
  for (const auto& seg : segments) {
    CHECK(seg.duration == doctest::Approx(0.5));
    rebuilt.insert(rebuilt.end(), seg.samples.begin(), seg.samples.end());
  }
  REQUIRE(rebuilt.size() == 48000);
  for (std::size_t i = 0; i < rebuilt.size(); ++i) CHECK(rebuilt[i] == six.samples[i]);

  CHECK_THROWS_AS(audio::segment_audio(silence(0.2), 0.5), ValidationError);
}

TEST_CASE("onset envelope: silence, clicks, steady tone") {
  const auto quiet = audio::onset_envelope(silence(2.0));
  CHECK(quiet.frame_rate == doctest::Approx(100.0));
  for (double v : quiet.values) CHECK(v == 0.0);

  // Clicks every 0.5 s must peak every 50 envelope frames, within one frame.
  const auto clicks = audio::onset_envelope(oracles::click_track(120.0, 4.0));
  std::vector<std::size_t> peaks;
  for (std::size_t t = 1; t + 1 < clicks.values.size(); ++t) {
    const bool local_max =
        clicks.values[t] >= clicks.values[t - 1] && clicks.values[t] > clicks.values[t + 1];
    if (local_max && clicks.values[t] > 0.25 * *std::max_element(clicks.values.begin(),
                                                                 clicks.values.end()))
      peaks.push_back(t);
  }
  REQUIRE(peaks.size() >= 6);
  for (std::size_t i = 1; i < peaks.size(); ++i) {
    const double spacing = static_cast<double>(peaks[i] - peaks[i - 1]);
    CHECK(std::abs(spacing - 50.0) <= 1.0);
  }

  const auto steady = audio::onset_envelope(sine(440.0, 2.0));
  const double click_peak = *std::max_element(clicks.values.begin(), clicks.values.end());
  for (std::size_t t = 30; t + 30 < steady.values.size(); ++t)
    CHECK(steady.values[t] < 0.05 * click_peak);

  CHECK_THROWS_AS(audio::onset_envelope(silence(0.01)), ValidationError);
}

TEST_CASE("perceptual weight identities") {
  audio::TempoWeighting w{0.5, 1.0};
  CHECK(audio::perceptual_weight(0.5, w) == doctest::Approx(1.0));
  CHECK(audio::perceptual_weight(1.0, w) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));

  audio::TempoWeighting wide{0.5, 1.4};
  CHECK(audio::perceptual_weight(0.25, wide) ==
        doctest::Approx(std::exp(-0.5 / 1.96)).epsilon(1e-12));
  CHECK_THROWS_AS(audio::perceptual_weight(0.0, wide), ValidationError);
}

TEST_CASE("tempo estimates click tracks and defaults on silence") {
  for (double bpm : {60.0, 120.0}) {
    const auto est = audio::tempo(oracles::click_track(bpm, 6.0));
    CHECK_FALSE(est.defaulted);
    CHECK(std::abs(est.bpm - bpm) <= 2.0);
  }

  const auto flat = audio::tempo(silence(6.0));
  CHECK(flat.defaulted);
  CHECK(flat.bpm == 120.0);
}

TEST_CASE("tempo is invariant to amplitude scaling and small circular shifts") {
  const auto base = oracles::click_track(90.0, 6.0, 8000, 0.8);
  const double reference = audio::tempo(base).bpm;

  dsp::AudioSignal scaled = base;
  for (double& s : scaled.samples) s *= 0.31;
  CHECK(audio::tempo(scaled).bpm == doctest::Approx(reference));

  dsp::AudioSignal shifted = base;
  const std::size_t shift = 1600;  // 0.2 s, under the 2/3 s period
  std::rotate(shifted.samples.begin(),
              shifted.samples.end() - static_cast<std::ptrdiff_t>(shift),
              shifted.samples.end());
  CHECK(std::abs(audio::tempo(shifted).bpm - reference) <= 2.0);
}

TEST_CASE("loudness: floor, ear weighting, scaling law") {
  CHECK(audio::loudness(as_segment(silence(0.5))) == doctest::Approx(-120.0));

  const double at3k = audio::loudness(as_segment(sine(3000.0, 0.5)));
  const double at100 = audio::loudness(as_segment(sine(100.0, 0.5)));
  CHECK(at3k > at100);

  const double full = audio::loudness(as_segment(sine(1000.0, 0.5, 8000, 0.8)));
  const double half = audio::loudness(as_segment(sine(1000.0, 0.5, 8000, 0.4)));
  CHECK(full - half == doctest::Approx(20.0 * std::log10(2.0)).epsilon(1e-6));

  // Monotone under uniform scaling.
  double prev = -1e9;
  for (double amp : {0.1, 0.3, 0.6, 0.9}) {
    const double l = audio::loudness(as_segment(sine(1000.0, 0.5, 8000, amp)));
    CHECK(l >= prev);
    prev = l;
  }
}

TEST_CASE("rhythm: silence floor, concentration ordering, scaling shift") {
  CHECK(audio::rhythm(as_segment(silence(0.5))) == doctest::Approx(std::log(1e-12)));

  // A pure tone concentrates PSD mass into one bin; equal-energy noise
  // spreads it, so the tone's bin variance is higher.
  Rng rng(17);
  dsp::AudioSignal noise;
  noise.sample_rate = 8000;
  noise.samples.resize(4000);
  for (double& s : noise.samples) s = rng.uniform(-1.0, 1.0);
  double noise_energy = 0.0;
  for (double s : noise.samples) noise_energy += s * s;
  auto tone = sine(1000.0, 0.5);
  double tone_energy = 0.0;
  for (double s : tone.samples) tone_energy += s * s;
  for (double& s : tone.samples) s *= std::sqrt(noise_energy / tone_energy);
  CHECK(audio::rhythm(as_segment(noise)) < audio::rhythm(as_segment(tone)));

  const auto seg = as_segment(sine(700.0, 0.5, 8000, 0.5));
  auto scaled = seg;
  const double k = 1.7;
  for (double& s : scaled.samples) s *= k;
  CHECK(audio::rhythm(scaled) - audio::rhythm(seg) ==
        doctest::Approx(4.0 * std::log(k)).epsilon(1e-6));
}

TEST_CASE("extract_tlr composition and determinism") {
  const auto quiet = as_segment(silence(0.5));
  const auto d = audio::extract_tlr(quiet, 97.0);
  CHECK(d.tempo == 97.0);
  CHECK(d.loudness == doctest::Approx(-120.0));
  CHECK(d.rhythm == doctest::Approx(std::log(1e-12)));

  const auto no_fallback = audio::extract_tlr(quiet);
  CHECK(no_fallback.tempo == 120.0);

  // A segment out of a 120 bpm full-scale click track, clip tempo as fallback.
  const auto clip = oracles::click_track(120.0, 6.0, 8000, 0.9, 0.2);
  const auto clip_tempo = audio::tempo(clip);
  const auto segments = audio::segment_audio(clip, 0.5);
  const auto tlr = audio::extract_tlr(segments[3], clip_tempo.bpm);
  CHECK(std::abs(tlr.tempo - 120.0) <= 2.0);
  CHECK(tlr.loudness > -20.0);

  const auto again = audio::extract_tlr(segments[3], clip_tempo.bpm);
  CHECK(tlr.tempo == again.tempo);
  CHECK(tlr.loudness == again.loudness);
  CHECK(tlr.rhythm == again.rhythm);
}

TEST_CASE("feature stats: singleton, z-scores, round trip") {
  const audio::TlrDescriptor lone{120.0, -30.0, -5.0};
  const auto single = audio::fit_stats(std::vector<audio::TlrDescriptor>{lone});
  const auto z = audio::normalize(lone, single);
  CHECK(z[0] == 0.0);
  CHECK(z[1] == 0.0);
  CHECK(z[2] == 0.0);

  Rng rng(23);
  std::vector<audio::TlrDescriptor> corpus;
  for (int i = 0; i < 64; ++i)
    corpus.push_back({rng.uniform(60.0, 180.0), rng.uniform(-60.0, -5.0), rng.uniform(-25.0, -3.0)});
  const auto stats = audio::fit_stats(corpus);

  std::array<double, 3> mean{}, var{};
  for (const auto& d : corpus) {
    const auto v = audio::normalize(d, stats);
    for (int j = 0; j < 3; ++j) mean[static_cast<std::size_t>(j)] += v[static_cast<std::size_t>(j)];
  }
  for (auto& m : mean) m /= static_cast<double>(corpus.size());
  for (const auto& d : corpus) {
    const auto v = audio::normalize(d, stats);
    for (int j = 0; j < 3; ++j) {
      const auto js = static_cast<std::size_t>(j);
      var[js] += (v[js] - mean[js]) * (v[js] - mean[js]);
    }
  }
  for (int j = 0; j < 3; ++j) {
    const auto js = static_cast<std::size_t>(j);
    CHECK(std::abs(mean[js]) < 1e-9);
    CHECK(std::abs(var[js] / static_cast<double>(corpus.size()) - 1.0) < 1e-9);
  }

  for (int i = 0; i < 16; ++i) {
    const audio::TlrDescriptor d{rng.uniform(30.0, 300.0), rng.uniform(-120.0, 0.0),
                                 rng.uniform(-30.0, 0.0)};
    const auto back = audio::denormalize(audio::normalize(d, stats), stats);
    CHECK(back.tempo == doctest::Approx(d.tempo).epsilon(1e-12));
    CHECK(back.loudness == doctest::Approx(d.loudness).epsilon(1e-12));
    CHECK(back.rhythm == doctest::Approx(d.rhythm).epsilon(1e-12));
  }

  CHECK_THROWS_AS(audio::fit_stats(std::vector<audio::TlrDescriptor>{}), ValidationError);
}
