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

#include "emova/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "emova/errors.hpp"

namespace emova::dsp {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Iterative radix-2 Cooley-Tukey, in place. n must be a power of two.
void fft_inplace(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * M_PI / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = a[i + k];
        std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

// Periodic Hann: w[i] = 0.5*(1 - cos(2*pi*i/N)).
std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 * (1.0 - std::cos(2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n)));
  return w;
}

}  // namespace

AudioSignal resample(const AudioSignal& signal, int target_rate) {
  if (target_rate <= 0) throw ValidationError("resample: target rate must be positive");
  if (signal.samples.empty()) throw ValidationError("resample: empty signal");
  if (signal.sample_rate <= 0) throw ValidationError("resample: source rate must be positive");

  if (target_rate == signal.sample_rate) return signal;

  const std::size_t n = signal.samples.size();
  const double ratio = static_cast<double>(target_rate) / signal.sample_rate;
  const std::size_t out_len =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(n) * ratio)));

  AudioSignal out;
  out.sample_rate = target_rate;
  out.samples.resize(out_len);
  const double step = static_cast<double>(signal.sample_rate) / target_rate;
  for (std::size_t k = 0; k < out_len; ++k) {
    double pos = static_cast<double>(k) * step;
    if (pos >= static_cast<double>(n - 1)) {
      out.samples[k] = signal.samples.back();
      continue;
    }
    const std::size_t i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    out.samples[k] = signal.samples[i] * (1.0 - frac) + signal.samples[i + 1] * frac;
  }
  return out;
}

Spectrogram stft(const AudioSignal& signal, int window_len, int hop) {
  if (window_len <= 0 || hop <= 0 || hop > window_len)
    throw ValidationError("stft: need 0 < hop <= window_len");
  if (!is_power_of_two(static_cast<std::size_t>(window_len)))
    throw ValidationError("stft: window_len must be a power of two");
  if (signal.samples.size() < static_cast<std::size_t>(window_len))
    throw ValidationError("stft: signal shorter than one window");

  const std::size_t n = signal.samples.size();
  const std::size_t w = static_cast<std::size_t>(window_len);
  const std::size_t n_frames = (n - w) / static_cast<std::size_t>(hop) + 1;
  const std::size_t n_bins = w / 2 + 1;
  const std::vector<double> window = hann_window(w);

  Spectrogram spec;
  spec.hop = hop;
  spec.window_len = window_len;
  spec.scale = SpecScale::linear_power;
  spec.values.assign(n_bins, std::vector<double>(n_frames, 0.0));
  spec.bin_freqs.resize(n_bins);
  for (std::size_t b = 0; b < n_bins; ++b)
    spec.bin_freqs[b] = static_cast<double>(b) * signal.sample_rate / static_cast<double>(w);

  std::vector<std::complex<double>> buf(w);
  for (std::size_t f = 0; f < n_frames; ++f) {
    const std::size_t start = f * static_cast<std::size_t>(hop);
    for (std::size_t i = 0; i < w; ++i)
      buf[i] = std::complex<double>(signal.samples[start + i] * window[i], 0.0);
    fft_inplace(buf);
    for (std::size_t b = 0; b < n_bins; ++b) spec.values[b][f] = std::norm(buf[b]);
  }
  return spec;
}

Spectrogram mel_spectrogram(const Spectrogram& spec, const MelFilterbank& bank) {
  if (spec.scale != SpecScale::linear_power)
    throw ValidationError("mel_spectrogram: input must be linear power");
  if (bank.n_fft_bins() != spec.n_bins())
    throw ValidationError("mel_spectrogram: filterbank size does not match spectrogram bins");

  const std::size_t n_frames = spec.n_frames();
  const std::size_t n_bins = spec.n_bins();

  Spectrogram out;
  out.hop = spec.hop;
  out.window_len = spec.window_len;
  out.scale = SpecScale::linear_power;
  out.values.assign(static_cast<std::size_t>(bank.n_mels), std::vector<double>(n_frames, 0.0));
  out.bin_freqs.resize(static_cast<std::size_t>(bank.n_mels));
  for (int m = 0; m < bank.n_mels; ++m) {
    // Nominal band frequency: weighted centroid of the row.
    double num = 0.0, den = 0.0;
    for (std::size_t b = 0; b < n_bins; ++b) {
      num += bank.weights[static_cast<std::size_t>(m)][b] * spec.bin_freqs[b];
      den += bank.weights[static_cast<std::size_t>(m)][b];
    }
    out.bin_freqs[static_cast<std::size_t>(m)] = den > 0.0 ? num / den : 0.0;
    for (std::size_t f = 0; f < n_frames; ++f) {
      double acc = 0.0;
      for (std::size_t b = 0; b < n_bins; ++b)
        acc += bank.weights[static_cast<std::size_t>(m)][b] * spec.values[b][f];
      out.values[static_cast<std::size_t>(m)][f] = acc;
    }
  }
  // Centroids of adjacent narrow filters can tie; force strict ascent.
  for (std::size_t m = 1; m < out.bin_freqs.size(); ++m)
    if (out.bin_freqs[m] <= out.bin_freqs[m - 1])
      out.bin_freqs[m] = std::nextafter(out.bin_freqs[m - 1], 1e30);
  return out;
}

MelFilterbank make_mel_filterbank(int n_mels, int n_fft_bins, int sample_rate) {
  if (n_mels <= 0 || n_fft_bins <= 1 || sample_rate <= 0)
    throw ValidationError("make_mel_filterbank: bad arguments");

  auto hz_to_mel = [](double f) { return 2595.0 * std::log10(1.0 + f / 700.0); };
  auto mel_to_hz = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };

  const double f_max = sample_rate / 2.0;
  const double mel_max = hz_to_mel(f_max);
  std::vector<double> edges(static_cast<std::size_t>(n_mels) + 2);
  for (std::size_t i = 0; i < edges.size(); ++i)
    edges[i] = mel_to_hz(mel_max * static_cast<double>(i) / static_cast<double>(n_mels + 1));

  // fft bin b sits at b * sr / window, window = 2*(n_fft_bins-1).
  const double bin_hz = static_cast<double>(sample_rate) / (2.0 * (n_fft_bins - 1));

  MelFilterbank bank;
  bank.n_mels = n_mels;
  bank.weights.assign(static_cast<std::size_t>(n_mels), std::vector<double>(static_cast<std::size_t>(n_fft_bins), 0.0));
  for (int m = 0; m < n_mels; ++m) {
    const double lo = edges[static_cast<std::size_t>(m)];
    const double mid = edges[static_cast<std::size_t>(m) + 1];
    const double hi = edges[static_cast<std::size_t>(m) + 2];
    bool any = false;
    for (int b = 0; b < n_fft_bins; ++b) {
      const double f = b * bin_hz;
      double wgt = 0.0;
      if (f > lo && f < mid)
        wgt = (f - lo) / (mid - lo);
      else if (f >= mid && f < hi)
        wgt = (hi - f) / (hi - mid);
      if (wgt > 0.0) any = true;
      bank.weights[static_cast<std::size_t>(m)][static_cast<std::size_t>(b)] = wgt;
    }
    if (!any) {
      const int peak = std::clamp(static_cast<int>(std::lround(mid / bin_hz)), 0, n_fft_bins - 1);
      bank.weights[static_cast<std::size_t>(m)][static_cast<std::size_t>(peak)] = 1.0;
    }
  }
  return bank;
}

std::vector<double> power_to_db(const std::vector<double>& values, double floor_db) {
  if (floor_db >= 0.0) throw ValidationError("power_to_db: floor_db must be negative");
  double v_ref = 0.0;
  for (double v : values) v_ref = std::max(v_ref, v);
  std::vector<double> out(values.size(), floor_db);
  if (v_ref <= 0.0) return out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] > 0.0)
      out[i] = std::max(10.0 * std::log10(values[i] / v_ref), floor_db);
  }
  return out;
}

Spectrogram power_to_db(const Spectrogram& spec, double floor_db) {
  if (floor_db >= 0.0) throw ValidationError("power_to_db: floor_db must be negative");
  if (spec.scale != SpecScale::linear_power)
    throw ValidationError("power_to_db: input must be linear power");
  double v_ref = 0.0;
  for (const auto& row : spec.values)
    for (double v : row) v_ref = std::max(v_ref, v);

  Spectrogram out = spec;
  out.scale = SpecScale::decibel;
  for (auto& row : out.values)
    for (double& v : row)
      v = (v_ref > 0.0 && v > 0.0) ? std::max(10.0 * std::log10(v / v_ref), floor_db) : floor_db;
  return out;
}

std::vector<double> autocorrelate(const std::vector<double>& x, std::size_t max_lag) {
  if (max_lag >= x.size()) throw ValidationError("autocorrelate: max_lag must be < length");
  std::vector<double> out(max_lag + 1, 0.0);
  for (std::size_t tau = 0; tau <= max_lag; ++tau) {
    double acc = 0.0;
    for (std::size_t t = tau; t < x.size(); ++t) acc += x[t] * x[t - tau];
    out[tau] = acc;
  }
  return out;
}

std::vector<double> gaussian_smooth(const std::vector<double>& x, double sigma) {
  if (sigma <= 0.0) throw ValidationError("gaussian_smooth: sigma must be positive");
  const int radius = static_cast<int>(std::ceil(4.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * (i / sigma) * (i / sigma));
    kernel[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (double& k : kernel) k /= sum;

  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
  std::vector<double> out(x.size(), 0.0);
  for (std::ptrdiff_t t = 0; t < n; ++t) {
    double acc = 0.0;
    for (int i = -radius; i <= radius; ++i) {
      const std::ptrdiff_t s = t + i;
      if (s >= 0 && s < n) acc += x[static_cast<std::size_t>(s)] * kernel[static_cast<std::size_t>(i + radius)];
    }
    out[static_cast<std::size_t>(t)] = acc;
  }
  return out;
}

std::vector<double> psd(const AudioSignal& signal) {
  if (signal.samples.empty()) throw ValidationError("psd: empty signal");
  const std::size_t n = next_power_of_two(signal.samples.size());
  std::vector<std::complex<double>> buf(n, std::complex<double>(0.0, 0.0));
  for (std::size_t i = 0; i < signal.samples.size(); ++i) buf[i] = signal.samples[i];
  fft_inplace(buf);
  std::vector<double> out(n / 2 + 1);
  for (std::size_t b = 0; b <= n / 2; ++b) out[b] = std::norm(buf[b]) / static_cast<double>(n);
  return out;
}

}  // namespace emova::dsp
