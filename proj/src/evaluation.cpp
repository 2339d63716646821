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

#include "emova/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "emova/errors.hpp"
#include "emova/image_io.hpp"

namespace emova::eval {

namespace {
constexpr int kEvalRate = 8000;

double round3(double v) { return std::round(v * 1000.0) / 1000.0; }
}  // namespace

dsp::Spectrogram mel_db_spectrogram(const dsp::AudioSignal& signal, const SpectroParams& p) {
  const dsp::AudioSignal at8k =
      signal.sample_rate == kEvalRate ? signal : dsp::resample(signal, kEvalRate);
  const dsp::Spectrogram spec = dsp::stft(at8k, p.window, p.hop);
  const dsp::MelFilterbank bank =
      dsp::make_mel_filterbank(p.n_mels, static_cast<int>(spec.n_bins()), kEvalRate);
  return dsp::power_to_db(dsp::mel_spectrogram(spec, bank), p.floor_db);
}

EvalReport spectrogram_mae(const dsp::AudioSignal& a, const dsp::AudioSignal& b,
                           const SpectroParams& params) {
  if (a.samples.empty() || b.samples.empty())
    throw ValidationError("spectrogram_mae: empty signal");

  const dsp::Spectrogram da = mel_db_spectrogram(a, params);
  const dsp::Spectrogram db = mel_db_spectrogram(b, params);
  const std::size_t frames = std::min(da.n_frames(), db.n_frames());
  if (frames == 0) throw ValidationError("spectrogram_mae: no frames to compare");

  const double range = -params.floor_db;
  double acc = 0.0;
  for (std::size_t bin = 0; bin < da.n_bins(); ++bin) {
    for (std::size_t f = 0; f < frames; ++f) {
      const double va = (da.values[bin][f] - params.floor_db) / range;
      const double vb = (db.values[bin][f] - params.floor_db) / range;
      acc += std::abs(va - vb);
    }
  }

  EvalReport report;
  report.params = params;
  report.spectrogram_mae = acc / (static_cast<double>(da.n_bins()) * static_cast<double>(frames));
  report.duration_compared =
      (static_cast<double>(frames - 1) * params.hop + params.window) / kEvalRate;
  return report;
}

double mos_mean(const MosSample& s) {
  if (s.scores.empty()) throw ValidationError("mos_mean: no scores");
  double acc = 0.0;
  for (double v : s.scores) acc += v;
  return acc / static_cast<double>(s.scores.size());
}

double mos_variance(const MosSample& s) {
  if (s.scores.size() < 2) throw ValidationError("mos_variance: needs at least two scores");
  const double mu = mos_mean(s);
  double acc = 0.0;
  for (double v : s.scores) acc += (v - mu) * (v - mu);
  return acc / static_cast<double>(s.scores.size() - 1);
}

std::string format_mos(double mean, double stddev) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f ± %.2f", mean, stddev);
  return buf;
}

ClassDistribution class_distribution(const std::vector<anfis::EmotionQuadrant>& labels) {
  ClassDistribution dist;
  for (anfis::EmotionQuadrant q : labels) {
    switch (q) {
      case anfis::EmotionQuadrant::PosHigh: ++dist.pos_high; break;
      case anfis::EmotionQuadrant::PosLow: ++dist.pos_low; break;
      case anfis::EmotionQuadrant::NegHigh: ++dist.neg_high; break;
      case anfis::EmotionQuadrant::NegLow: ++dist.neg_low; break;
    }
  }
  return dist;
}

std::string format_distribution(const ClassDistribution& d) {
  std::ostringstream out;
  out << "arousal   positive  negative  total\n";
  out << "high      " << d.pos_high << "  " << d.neg_high << "  " << d.high_total() << "\n";
  out << "low       " << d.pos_low << "  " << d.neg_low << "  " << d.low_total() << "\n";
  out << "total     " << d.pos_total() << "  " << d.neg_total() << "  " << d.grand_total() << "\n";
  return out.str();
}

void render_spectrogram(const dsp::Spectrogram& spec, const std::string& pgm_path) {
  if (spec.scale != dsp::SpecScale::decibel)
    throw ValidationError("render_spectrogram: spectrogram must be dB scaled");
  const std::size_t bins = spec.n_bins();
  const std::size_t frames = spec.n_frames();
  if (bins == 0 || frames == 0) throw ValidationError("render_spectrogram: empty spectrogram");

  std::vector<std::uint8_t> pixels(bins * frames);
  for (std::size_t row = 0; row < bins; ++row) {
    const std::size_t bin = bins - 1 - row;  // low frequencies at the bottom
    for (std::size_t f = 0; f < frames; ++f) {
      const double v = std::clamp((spec.values[bin][f] + 80.0) / 80.0, 0.0, 1.0);
      pixels[row * frames + f] = static_cast<std::uint8_t>(std::lround(v * 255.0));
    }
  }
  io::write_pgm(pgm_path, static_cast<int>(frames), static_cast<int>(bins), pixels);

  std::string csv_path = pgm_path;
  if (csv_path.size() > 4 && csv_path.substr(csv_path.size() - 4) == ".pgm")
    csv_path.resize(csv_path.size() - 4);
  csv_path += ".csv";
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw IoError("cannot write spectrogram csv: " + csv_path);
  csv << "bin";
  for (std::size_t f = 0; f < frames; ++f) csv << ",f" << f;
  csv << "\n";
  csv.precision(17);
  for (std::size_t bin = 0; bin < bins; ++bin) {
    csv << bin;
    for (std::size_t f = 0; f < frames; ++f) csv << "," << spec.values[bin][f];
    csv << "\n";
  }
  if (!csv) throw IoError("failed writing spectrogram csv: " + csv_path);
}

ModelComparison compare_models(const std::vector<EvalReport>& current,
                               const std::vector<EvalReport>& previous) {
  if (current.size() != previous.size() || current.empty())
    throw ValidationError("compare_models: report lists must be non-empty and equal length");

  ModelComparison c;
  double sum_cur = 0.0, sum_prev = 0.0;
  for (std::size_t i = 0; i < current.size(); ++i) {
    c.mae_current.push_back(current[i].spectrogram_mae);
    c.mae_previous.push_back(previous[i].spectrogram_mae);
    sum_cur += current[i].spectrogram_mae;
    sum_prev += previous[i].spectrogram_mae;
  }
  // Means are presented to three decimals; the improvement figure follows
  // the presented values.
  c.mean_current = round3(sum_cur / static_cast<double>(current.size()));
  c.mean_previous = round3(sum_prev / static_cast<double>(previous.size()));
  c.improvement_percent =
      c.mean_previous != 0.0
          ? (c.mean_previous - c.mean_current) / c.mean_previous * 100.0
          : 0.0;
  return c;
}

std::string format_comparison(const ModelComparison& c) {
  std::ostringstream out;
  auto row = [&](const char* label, const std::vector<double>& values, double mean) {
    out << label;
    char buf[32];
    for (double v : values) {
      std::snprintf(buf, sizeof(buf), " %.3f", v);
      out << buf;
    }
    std::snprintf(buf, sizeof(buf), " | mean %.3f", mean);
    out << buf << "\n";
  };
  row("current ", c.mae_current, c.mean_current);
  row("previous", c.mae_previous, c.mean_previous);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "improvement %.2f%%", c.improvement_percent);
  out << buf << "\n";
  return out.str();
}

}  // namespace emova::eval
