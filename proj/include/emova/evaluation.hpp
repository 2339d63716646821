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

#include <string>
#include <vector>

#include "emova/anfis.hpp"
#include "emova/dsp.hpp"

namespace emova::eval {

enum class MosAxis { valence, arousal };

struct MosSample {
  std::vector<double> scores;  // 9-point scale values
  MosAxis axis = MosAxis::valence;
};

struct SpectroParams {
  int window = 512;
  int hop = 256;
  int n_mels = 40;
  double floor_db = -80.0;
};

struct EvalReport {
  double spectrogram_mae = 0.0;  // in [0, 1]
  double duration_compared = 0.0;
  SpectroParams params;
};

// Mean absolute difference of the two normalized-dB mel spectrograms over
// their common frame count. Both signals are resampled to 8 kHz; the dB
// range [floor_db, 0] maps linearly onto [0, 1].
EvalReport spectrogram_mae(const dsp::AudioSignal& a, const dsp::AudioSignal& b,
                           const SpectroParams& params = {});

// The dB mel spectrogram both comparison and rendering run on (8 kHz).
dsp::Spectrogram mel_db_spectrogram(const dsp::AudioSignal& signal,
                                    const SpectroParams& params = {});

double mos_mean(const MosSample& s);

// Sample variance, (N-1) denominator; needs at least two scores.
double mos_variance(const MosSample& s);

// "m ± s" with two decimals.
std::string format_mos(double mean, double stddev);

struct ClassDistribution {
  std::size_t pos_high = 0;
  std::size_t pos_low = 0;
  std::size_t neg_high = 0;
  std::size_t neg_low = 0;

  std::size_t high_total() const { return pos_high + neg_high; }
  std::size_t low_total() const { return pos_low + neg_low; }
  std::size_t pos_total() const { return pos_high + pos_low; }
  std::size_t neg_total() const { return neg_high + neg_low; }
  std::size_t grand_total() const { return high_total() + low_total(); }
};

ClassDistribution class_distribution(const std::vector<anfis::EmotionQuadrant>& labels);
std::string format_distribution(const ClassDistribution& dist);

// Grayscale raster of a dB spectrogram (low frequencies at the bottom,
// [-80, 0] dB onto [0, 255]) written to `pgm_path`, plus an exact CSV twin
// next to it ("bin,f0,f1,..." header, one row per bin).
void render_spectrogram(const dsp::Spectrogram& spec, const std::string& pgm_path);

struct ModelComparison {
  std::vector<double> mae_current;
  std::vector<double> mae_previous;
  double mean_current = 0.0;       // rounded to the 3 decimals shown in summaries
  double mean_previous = 0.0;
  double improvement_percent = 0.0;  // (prev - cur)/prev * 100 over the rounded means
};

// Side-by-side mean-MAE summary of two evaluation runs of equal length.
ModelComparison compare_models(const std::vector<EvalReport>& current,
                               const std::vector<EvalReport>& previous);
std::string format_comparison(const ModelComparison& c);

}  // namespace emova::eval
