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
#include <optional>
#include <vector>

#include "emova/dsp.hpp"

namespace emova::audio {

struct AudioSegment {
  std::vector<double> samples;
  int sample_rate = 0;
  int index = 0;
  double duration = 0.0;

  dsp::AudioSignal as_signal() const { return dsp::AudioSignal{samples, sample_rate}; }
};

// Tempo (bpm), loudness (dB re full scale), rhythm (log PSD variance).
struct TlrDescriptor {
  double tempo = 0.0;
  double loudness = 0.0;
  double rhythm = 0.0;

  std::array<double, 3> as_array() const { return {tempo, loudness, rhythm}; }
};

struct OnsetEnvelope {
  std::vector<double> values;  // nonnegative onset strengths
  double frame_rate = 0.0;     // frames per second
};

// Gaussian tempo bias on a log2 time axis, centered at tau0 seconds.
struct TempoWeighting {
  double tau0 = 0.5;
  double sigma_tau = 1.4;  // octaves
};

struct TempoEstimate {
  double bpm = 0.0;
  bool defaulted = false;  // true when the envelope carried no periodicity
};

// Per-dimension z-score statistics over a TLR corpus.
struct FeatureStats {
  std::array<double, 3> mean{0.0, 0.0, 0.0};
  std::array<double, 3> std{1.0, 1.0, 1.0};
};

struct OnsetConfig {
  int window = 256;
  int hop = 80;  // 100 envelope frames/s at 8 kHz
  int n_mels = 40;
  double smooth_sigma = 2.0;  // frames
  double floor_db = -80.0;
};

struct TempoConfig {
  TempoWeighting weighting{};
  double min_bpm = 30.0;
  double max_bpm = 300.0;
  double default_bpm = 120.0;
};

struct LoudnessConfig {
  int window = 256;
  int hop = 128;
  double silence_floor_db = -120.0;
};

// Consecutive non-overlapping segments; a trailing remainder shorter than
// seg_duration is dropped.
std::vector<AudioSegment> segment_audio(const dsp::AudioSignal& signal, double seg_duration);

// Spectral-flux onset strength: resample to 8 kHz, Hann STFT, mel bands in dB,
// half-wave rectified first difference summed across bands, Gaussian smoothing,
// running-minimum subtraction.
OnsetEnvelope onset_envelope(const dsp::AudioSignal& signal, const OnsetConfig& cfg = {});

// exp(-0.5 * (log2(tau/tau0)/sigma_tau)^2)
double perceptual_weight(double tau, const TempoWeighting& w);

// Largest perceptually weighted autocorrelation of the onset envelope over
// periods 60/max_bpm .. 60/min_bpm seconds. A flat envelope yields the
// default tempo with the flag set.
TempoEstimate tempo(const dsp::AudioSignal& signal, const TempoConfig& cfg = {},
                    const OnsetConfig& onset_cfg = {});

// A-weighted mean-square level in dB re full scale, averaged across frames,
// floored for digital silence.
double loudness(const AudioSegment& segment, const LoudnessConfig& cfg = {});

// Squared A-weighting magnitude response at f Hz (power-domain weight).
double a_weight_power(double f_hz);

// ln(var(psd) + 1e-12), population variance over the periodogram bins.
double rhythm(const AudioSegment& segment);

// Full TLR triple. A defaulted per-segment tempo inherits fallback_bpm when
// one is supplied (short segments rarely expose a full beat period).
TlrDescriptor extract_tlr(const AudioSegment& segment,
                          std::optional<double> fallback_bpm = std::nullopt,
                          const TempoConfig& tempo_cfg = {},
                          const OnsetConfig& onset_cfg = {},
                          const LoudnessConfig& loud_cfg = {});

FeatureStats fit_stats(const std::vector<TlrDescriptor>& corpus);
FeatureStats fit_stats(const std::vector<std::array<double, 3>>& corpus);
std::array<double, 3> normalize(const std::array<double, 3>& v, const FeatureStats& stats);
std::array<double, 3> normalize(const TlrDescriptor& d, const FeatureStats& stats);
TlrDescriptor denormalize(const std::array<double, 3>& z, const FeatureStats& stats);

}  // namespace emova::audio
