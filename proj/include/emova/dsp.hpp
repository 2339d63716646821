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

#include <cstddef>
#include <vector>

namespace emova::dsp {

// PCM audio held as doubles in [-1, 1].
struct AudioSignal {
  std::vector<double> samples;
  int sample_rate = 0;

  double duration_seconds() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

enum class SpecScale { linear_power, decibel };

// values[bin][frame], bin_freqs ascending. linear_power cells are |X|^2.
struct Spectrogram {
  std::vector<std::vector<double>> values;
  std::vector<double> bin_freqs;
  int hop = 0;
  int window_len = 0;
  SpecScale scale = SpecScale::linear_power;

  std::size_t n_bins() const { return values.size(); }
  std::size_t n_frames() const { return values.empty() ? 0 : values.front().size(); }
};

// weights[mel][fft_bin], each row holds at least one positive weight.
struct MelFilterbank {
  int n_mels = 0;
  std::vector<std::vector<double>> weights;

  std::size_t n_fft_bins() const { return weights.empty() ? 0 : weights.front().size(); }
};

// Linear-interpolation resampler. Output length is round(n * target/source);
// sample k is read at source position k * source/target.
AudioSignal resample(const AudioSignal& signal, int target_rate);

// Hann-windowed short-time Fourier transform, magnitude-squared cells.
// window_len must be a power of two; frames = floor((n - window)/hop) + 1.
Spectrogram stft(const AudioSignal& signal, int window_len, int hop);

// Weighted row sums of a linear-power spectrogram.
Spectrogram mel_spectrogram(const Spectrogram& spec, const MelFilterbank& bank);

// Triangular filters on the 2595*log10(1 + f/700) scale over [0, sample_rate/2].
// Rows that would be narrower than a bin get their peak bin set to 1.
MelFilterbank make_mel_filterbank(int n_mels, int n_fft_bins, int sample_rate);

// 10*log10(v / max(v)) clamped below at floor_db; all-zero input maps to floor_db.
std::vector<double> power_to_db(const std::vector<double>& values, double floor_db);
Spectrogram power_to_db(const Spectrogram& spec, double floor_db);

// out[tau] = sum_t x[t]*x[t-tau], tau = 0..max_lag, zero-padded at the boundary.
std::vector<double> autocorrelate(const std::vector<double>& x, std::size_t max_lag);

// Convolution with a unit-sum Gaussian kernel truncated at +/-4 sigma,
// zero-padded edges, same-length output.
std::vector<double> gaussian_smooth(const std::vector<double>& x, double sigma);

// Single-frame periodogram |FFT(x)|^2 / N over bins 0..N/2, N the next power
// of two >= length (zero padded).
std::vector<double> psd(const AudioSignal& signal);

}  // namespace emova::dsp
