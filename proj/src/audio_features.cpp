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

#include "emova/audio_features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "emova/errors.hpp"

namespace emova::audio {

namespace {
constexpr int kEnvelopeRate = 8000;  // onset analysis always runs at 8 kHz
constexpr double kRhythmEps = 1e-12;
}  // namespace

std::vector<AudioSegment> segment_audio(const dsp::AudioSignal& signal, double seg_duration) {
  if (seg_duration <= 0.0) throw ValidationError("segment_audio: duration must be positive");
  if (signal.sample_rate <= 0) throw ValidationError("segment_audio: bad sample rate");
  const std::size_t seg_len =
      static_cast<std::size_t>(std::llround(seg_duration * signal.sample_rate));
  if (seg_len == 0 || signal.samples.size() < seg_len)
    throw ValidationError("segment_audio: signal shorter than one segment");

  const std::size_t count = signal.samples.size() / seg_len;
  std::vector<AudioSegment> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    AudioSegment seg;
    seg.samples.assign(signal.samples.begin() + static_cast<std::ptrdiff_t>(i * seg_len),
                       signal.samples.begin() + static_cast<std::ptrdiff_t>((i + 1) * seg_len));
    seg.sample_rate = signal.sample_rate;
    seg.index = static_cast<int>(i);
    seg.duration = static_cast<double>(seg_len) / signal.sample_rate;
    out.push_back(std::move(seg));
  }
  return out;
}

OnsetEnvelope onset_envelope(const dsp::AudioSignal& signal, const OnsetConfig& cfg) {
  dsp::AudioSignal at8k =
      signal.sample_rate == kEnvelopeRate ? signal : dsp::resample(signal, kEnvelopeRate);
  if (at8k.samples.size() < static_cast<std::size_t>(cfg.window))
    throw ValidationError("onset_envelope: clip too short for one analysis frame");

  const dsp::Spectrogram spec = dsp::stft(at8k, cfg.window, cfg.hop);
  const dsp::MelFilterbank bank =
      dsp::make_mel_filterbank(cfg.n_mels, static_cast<int>(spec.n_bins()), kEnvelopeRate);
  const dsp::Spectrogram mel_db = dsp::power_to_db(dsp::mel_spectrogram(spec, bank), cfg.floor_db);

  const std::size_t n_frames = mel_db.n_frames();
  std::vector<double> flux(n_frames, 0.0);
  for (std::size_t t = 1; t < n_frames; ++t) {
    double acc = 0.0;
    for (std::size_t b = 0; b < mel_db.n_bins(); ++b) {
      const double d = mel_db.values[b][t] - mel_db.values[b][t - 1];
      if (d > 0.0) acc += d;
    }
    flux[t] = acc;
  }

  std::vector<double> smoothed = dsp::gaussian_smooth(flux, cfg.smooth_sigma);
  double running_min = std::numeric_limits<double>::infinity();
  for (double& v : smoothed) {
    running_min = std::min(running_min, v);
    v -= running_min;
  }

  OnsetEnvelope env;
  env.values = std::move(smoothed);
  env.frame_rate = static_cast<double>(kEnvelopeRate) / cfg.hop;
  return env;
}

double perceptual_weight(double tau, const TempoWeighting& w) {
  if (tau <= 0.0) throw ValidationError("perceptual_weight: tau must be positive");
  const double z = std::log2(tau / w.tau0) / w.sigma_tau;
  return std::exp(-0.5 * z * z);
}

TempoEstimate tempo(const dsp::AudioSignal& signal, const TempoConfig& cfg,
                    const OnsetConfig& onset_cfg) {
  const OnsetEnvelope env = onset_envelope(signal, onset_cfg);
  const double fps = env.frame_rate;

  const std::size_t lag_lo =
      static_cast<std::size_t>(std::ceil(60.0 / cfg.max_bpm * fps));
  std::size_t lag_hi = static_cast<std::size_t>(std::floor(60.0 / cfg.min_bpm * fps));
  if (env.values.size() < 2) return {cfg.default_bpm, true};
  lag_hi = std::min(lag_hi, env.values.size() - 1);
  if (lag_lo > lag_hi || lag_lo == 0) return {cfg.default_bpm, true};

  const std::vector<double> ac = dsp::autocorrelate(env.values, lag_hi);
  double best = 0.0;
  std::size_t best_lag = 0;
  for (std::size_t lag = lag_lo; lag <= lag_hi; ++lag) {
    const double tps = perceptual_weight(static_cast<double>(lag) / fps, cfg.weighting) * ac[lag];
    if (tps > best) {
      best = tps;
      best_lag = lag;
    }
  }
  // A single onset leaves only smoothing-tail overlap (~1e-11 of the
  // envelope energy ac[0]) at musical lags; that is not periodicity.
  if (best <= 1e-6 * ac[0]) return {cfg.default_bpm, true};
  return {60.0 * fps / static_cast<double>(best_lag), false};
}

double a_weight_power(double f_hz) {
  if (f_hz <= 0.0) return 0.0;
  const double f2 = f_hz * f_hz;
  const double c1 = 20.6 * 20.6;
  const double c2 = 107.7 * 107.7;
  const double c3 = 737.9 * 737.9;
  const double c4 = 12194.0 * 12194.0;
  const double ra =
      (c4 * f2 * f2) / ((f2 + c1) * std::sqrt((f2 + c2) * (f2 + c3)) * (f2 + c4));
  const double amp = ra * std::pow(10.0, 2.0 / 20.0);  // 0 dB at 1 kHz
  return amp * amp;
}

double loudness(const AudioSegment& segment, const LoudnessConfig& cfg) {
  if (segment.samples.empty()) throw ValidationError("loudness: empty segment");
  dsp::AudioSignal sig = segment.as_signal();
  if (sig.samples.size() < static_cast<std::size_t>(cfg.window)) {
    // Pad very short segments to one analysis frame.
    sig.samples.resize(static_cast<std::size_t>(cfg.window), 0.0);
  }
  const dsp::Spectrogram spec = dsp::stft(sig, cfg.window, cfg.hop);

  // Normalization putting a full-scale tone at the weighting's unity
  // frequency near -3 dB: divide one-sided power by N * sum(hann^2).
  const std::size_t n = static_cast<std::size_t>(cfg.window);
  double win_energy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = 0.5 * (1.0 - std::cos(2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n)));
    win_energy += w * w;
  }
  const double norm = static_cast<double>(n) * win_energy;

  std::vector<double> weights(spec.n_bins());
  for (std::size_t b = 0; b < spec.n_bins(); ++b) weights[b] = a_weight_power(spec.bin_freqs[b]);

  double db_sum = 0.0;
  for (std::size_t f = 0; f < spec.n_frames(); ++f) {
    double acc = 0.0;
    for (std::size_t b = 0; b < spec.n_bins(); ++b) {
      const double c = (b == 0 || b + 1 == spec.n_bins()) ? 1.0 : 2.0;
      acc += c * weights[b] * spec.values[b][f];
    }
    const double msw = acc / norm;
    const double db = msw > 0.0 ? 10.0 * std::log10(msw) : cfg.silence_floor_db;
    db_sum += std::max(db, cfg.silence_floor_db);
  }
  return db_sum / static_cast<double>(spec.n_frames());
}

double rhythm(const AudioSegment& segment) {
  if (segment.samples.empty()) throw ValidationError("rhythm: empty segment");
  const std::vector<double> p = dsp::psd(segment.as_signal());
  double mean = 0.0;
  for (double v : p) mean += v;
  mean /= static_cast<double>(p.size());
  double var = 0.0;
  for (double v : p) var += (v - mean) * (v - mean);
  var /= static_cast<double>(p.size());
  return std::log(var + kRhythmEps);
}

TlrDescriptor extract_tlr(const AudioSegment& segment, std::optional<double> fallback_bpm,
                          const TempoConfig& tempo_cfg, const OnsetConfig& onset_cfg,
                          const LoudnessConfig& loud_cfg) {
  TempoEstimate est = tempo(segment.as_signal(), tempo_cfg, onset_cfg);
  double bpm = est.bpm;
  if (est.defaulted && fallback_bpm) bpm = *fallback_bpm;
  return TlrDescriptor{bpm, loudness(segment, loud_cfg), rhythm(segment)};
}

FeatureStats fit_stats(const std::vector<std::array<double, 3>>& corpus) {
  if (corpus.empty()) throw ValidationError("fit_stats: empty corpus");
  FeatureStats stats;
  stats.mean = {0.0, 0.0, 0.0};
  for (const auto& v : corpus)
    for (std::size_t i = 0; i < 3; ++i) stats.mean[i] += v[i];
  for (std::size_t i = 0; i < 3; ++i) stats.mean[i] /= static_cast<double>(corpus.size());
  std::array<double, 3> var{0.0, 0.0, 0.0};
  for (const auto& v : corpus)
    for (std::size_t i = 0; i < 3; ++i) var[i] += (v[i] - stats.mean[i]) * (v[i] - stats.mean[i]);
  for (std::size_t i = 0; i < 3; ++i)
    stats.std[i] = std::max(std::sqrt(var[i] / static_cast<double>(corpus.size())), 1e-8);
  return stats;
}

FeatureStats fit_stats(const std::vector<TlrDescriptor>& corpus) {
  if (corpus.empty()) throw ValidationError("fit_stats: empty corpus");
  std::vector<std::array<double, 3>> rows;
  rows.reserve(corpus.size());
  for (const auto& d : corpus) rows.push_back(d.as_array());
  return fit_stats(rows);
}

std::array<double, 3> normalize(const std::array<double, 3>& v, const FeatureStats& stats) {
  return {(v[0] - stats.mean[0]) / stats.std[0], (v[1] - stats.mean[1]) / stats.std[1],
          (v[2] - stats.mean[2]) / stats.std[2]};
}

std::array<double, 3> normalize(const TlrDescriptor& d, const FeatureStats& stats) {
  return normalize(d.as_array(), stats);
}

TlrDescriptor denormalize(const std::array<double, 3>& z, const FeatureStats& stats) {
  return TlrDescriptor{z[0] * stats.std[0] + stats.mean[0], z[1] * stats.std[1] + stats.mean[1],
                       z[2] * stats.std[2] + stats.mean[2]};
}

}  // namespace emova::audio
