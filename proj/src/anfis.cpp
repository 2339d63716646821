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

#include "emova/anfis.hpp"

#include <algorithm>
#include <cmath>

#include "emova/errors.hpp"
#include "emova/linalg.hpp"

namespace emova::anfis {

namespace {
constexpr double kParamFloor = 1e-4;  // keeps the bell curve well defined

// Numerical-rank threshold for the consequent solve, relative to the largest
// Gram eigenvalue. Clustered training data makes the fully interpolating
// minimum-norm solution blow up (coefficients ~1e4 whose outputs cancel), and
// the premise gradient pass cannot survive that; directions this weak are
// treated as rank deficiency instead.
constexpr double kLseRankCutoff = 1e-6;

double rule_output(const AnfisModel& model, std::size_t k, const std::vector<double>& x) {
  const auto& row = model.consequents[k];
  double f = row[static_cast<std::size_t>(model.n_inputs)];
  for (int j = 0; j < model.n_inputs; ++j) f += row[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(j)];
  return f;
}

double sse(const AnfisModel& model, const std::vector<std::vector<double>>& inputs,
           const std::vector<double>& targets) {
  double acc = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const double e = infer(model, inputs[i]) - targets[i];
    acc += e * e;
  }
  return acc;
}
}  // namespace

const char* quadrant_name(EmotionQuadrant q) {
  switch (q) {
    case EmotionQuadrant::PosHigh: return "pos_high";
    case EmotionQuadrant::PosLow: return "pos_low";
    case EmotionQuadrant::NegHigh: return "neg_high";
    case EmotionQuadrant::NegLow: return "neg_low";
  }
  return "pos_high";
}

EmotionQuadrant quadrant_from_name(const std::string& name) {
  for (EmotionQuadrant q : kAllQuadrants)
    if (name == quadrant_name(q)) return q;
  throw ValidationError("unknown emotion quadrant: " + name);
}

double bell_mf(double x, const BellMf& mf) {
  const double u = std::abs((x - mf.c) / mf.a);
  return 1.0 / (1.0 + std::pow(u, 2.0 * mf.b));
}

AnfisModel grid_partition_init(const std::vector<std::array<double, 2>>& input_ranges, int n_mfs) {
  if (input_ranges.empty()) throw ValidationError("grid_partition_init: no inputs");
  if (n_mfs < 2) throw ValidationError("grid_partition_init: need at least two MFs per input");

  AnfisModel model;
  model.n_inputs = static_cast<int>(input_ranges.size());
  for (const auto& range : input_ranges) {
    double lo = range[0], hi = range[1];
    if (!(lo < hi)) {
      lo -= 5e-7;
      hi += 5e-7;
    }
    const double spacing = (hi - lo) / (n_mfs - 1);
    std::vector<BellMf> row;
    for (int k = 0; k < n_mfs; ++k)
      row.push_back(BellMf{spacing / 2.0, 2.0, lo + spacing * k});
    model.mfs.push_back(std::move(row));
  }

  std::size_t rule_total = 1;
  for (int j = 0; j < model.n_inputs; ++j) rule_total *= static_cast<std::size_t>(n_mfs);
  model.rules.reserve(rule_total);
  std::vector<int> tuple(static_cast<std::size_t>(model.n_inputs), 0);
  for (std::size_t k = 0; k < rule_total; ++k) {
    model.rules.push_back(tuple);
    for (int j = model.n_inputs - 1; j >= 0; --j) {
      if (++tuple[static_cast<std::size_t>(j)] < n_mfs) break;
      tuple[static_cast<std::size_t>(j)] = 0;
    }
  }
  model.consequents.assign(rule_total,
                           std::vector<double>(static_cast<std::size_t>(model.n_inputs) + 1, 0.0));
  return model;
}

std::vector<double> firing_strengths(const AnfisModel& model, const std::vector<double>& x) {
  if (x.size() != static_cast<std::size_t>(model.n_inputs))
    throw ValidationError("firing_strengths: input dimension mismatch");
  std::vector<double> strengths(model.rule_count(), 1.0);
  for (std::size_t k = 0; k < model.rule_count(); ++k) {
    double w = 1.0;
    for (int j = 0; j < model.n_inputs; ++j) {
      const int q = model.rules[k][static_cast<std::size_t>(j)];
      w *= bell_mf(x[static_cast<std::size_t>(j)],
                   model.mfs[static_cast<std::size_t>(j)][static_cast<std::size_t>(q)]);
    }
    strengths[k] = w;
  }
  return strengths;
}

double infer(const AnfisModel& model, const std::vector<double>& x) {
  const std::vector<double> w = firing_strengths(model, x);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < model.rule_count(); ++k) {
    num += w[k] * rule_output(model, k, x);
    den += w[k];
  }
  return num / den;
}

double lse_consequents(AnfisModel& model, const std::vector<std::vector<double>>& inputs,
                       const std::vector<double>& targets) {
  if (inputs.empty()) throw ValidationError("lse_consequents: no samples");
  if (inputs.size() != targets.size())
    throw ValidationError("lse_consequents: inputs/targets length mismatch");

  const double sse_before = sse(model, inputs, targets);

  const std::size_t n_rules = model.rule_count();
  const std::size_t width = static_cast<std::size_t>(model.n_inputs) + 1;
  linalg::Mat design(inputs.size(), n_rules * width);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const std::vector<double> w = firing_strengths(model, inputs[i]);
    double total = 0.0;
    for (double v : w) total += v;
    for (std::size_t k = 0; k < n_rules; ++k) {
      const double wn = w[k] / total;
      for (int j = 0; j < model.n_inputs; ++j)
        design.at(i, k * width + static_cast<std::size_t>(j)) =
            wn * inputs[i][static_cast<std::size_t>(j)];
      design.at(i, k * width + width - 1) = wn;
    }
  }

  const std::vector<double> theta = linalg::lstsq_min_norm(design, targets, kLseRankCutoff);
  const auto previous = model.consequents;
  for (std::size_t k = 0; k < n_rules; ++k)
    for (std::size_t j = 0; j < width; ++j) model.consequents[k][j] = theta[k * width + j];

  double sse_after = sse(model, inputs, targets);
  if (sse_after > sse_before) {
    // Rank truncation confines the solve to the retained subspace; if the
    // incumbent coefficients were better, keep them.
    model.consequents = previous;
    sse_after = sse(model, inputs, targets);
  }
  if (sse_after > sse_before * (1.0 + 1e-9) + 1e-12)
    throw NumericError("lse_consequents: least-squares step increased training SSE");
  return sse_after;
}

std::vector<std::vector<std::array<double, 3>>> premise_gradients(
    const AnfisModel& model, const std::vector<std::vector<double>>& inputs,
    const std::vector<double>& targets) {
  const std::size_t n = inputs.size();
  std::vector<std::vector<std::array<double, 3>>> grads(model.mfs.size());
  for (std::size_t j = 0; j < model.mfs.size(); ++j)
    grads[j].assign(model.mfs[j].size(), {0.0, 0.0, 0.0});

  for (std::size_t i = 0; i < n; ++i) {
    const auto& x = inputs[i];
    std::vector<std::vector<double>> beta(model.mfs.size());
    for (std::size_t j = 0; j < model.mfs.size(); ++j) {
      beta[j].resize(model.mfs[j].size());
      for (std::size_t q = 0; q < model.mfs[j].size(); ++q)
        beta[j][q] = bell_mf(x[j], model.mfs[j][q]);
    }
    std::vector<double> w(model.rule_count(), 1.0);
    double total = 0.0;
    for (std::size_t k = 0; k < model.rule_count(); ++k) {
      for (int j = 0; j < model.n_inputs; ++j)
        w[k] *= beta[static_cast<std::size_t>(j)]
                    [static_cast<std::size_t>(model.rules[k][static_cast<std::size_t>(j)])];
      total += w[k];
    }
    double y = 0.0;
    std::vector<double> f(model.rule_count());
    for (std::size_t k = 0; k < model.rule_count(); ++k) {
      f[k] = rule_output(model, k, x);
      y += w[k] * f[k];
    }
    y /= total;
    const double dl_dy = 2.0 * (y - targets[i]) / static_cast<double>(n);

    for (std::size_t k = 0; k < model.rule_count(); ++k) {
      const double dy_dw = (f[k] - y) / total;
      for (int j = 0; j < model.n_inputs; ++j) {
        const std::size_t q =
            static_cast<std::size_t>(model.rules[k][static_cast<std::size_t>(j)]);
        const double bval = beta[static_cast<std::size_t>(j)][q];
        const BellMf& mf = model.mfs[static_cast<std::size_t>(j)][q];
        const double common = dl_dy * dy_dw * (w[k] / bval);
        const double shape = bval * (1.0 - bval);
        const double xc = x[static_cast<std::size_t>(j)] - mf.c;
        // d(beta)/da, d(beta)/db, d(beta)/dc from beta = 1/(1+|u|^(2b))
        const double da = shape * 2.0 * mf.b / mf.a;
        const double db = xc != 0.0 ? -shape * 2.0 * std::log(std::abs(xc / mf.a)) : 0.0;
        const double dc = xc != 0.0 ? shape * 2.0 * mf.b / xc : 0.0;
        grads[static_cast<std::size_t>(j)][q][0] += common * da;
        grads[static_cast<std::size_t>(j)][q][1] += common * db;
        grads[static_cast<std::size_t>(j)][q][2] += common * dc;
      }
    }
  }
  return grads;
}

HybridTrainResult train_hybrid(AnfisModel& model, const std::vector<std::vector<double>>& inputs,
                               const std::vector<double>& targets, int epochs, double lr) {
  if (epochs < 1) throw ValidationError("train_hybrid: epochs must be >= 1");
  if (lr <= 0.0) throw ValidationError("train_hybrid: learning rate must be positive");

  const std::size_t n = inputs.size();
  HybridTrainResult result;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    lse_consequents(model, inputs, targets);

    const auto grads = premise_gradients(model, inputs, targets);

    for (std::size_t j = 0; j < model.mfs.size(); ++j) {
      for (std::size_t q = 0; q < model.mfs[j].size(); ++q) {
        for (int p = 0; p < 3; ++p) {
          if (!std::isfinite(grads[j][q][static_cast<std::size_t>(p)]))
            throw NumericError("train_hybrid: non-finite gradient for input " +
                               std::to_string(j) + " mf " + std::to_string(q) + " parameter " +
                               std::string(p == 0 ? "a" : p == 1 ? "b" : "c"));
        }
        BellMf& mf = model.mfs[j][q];
        mf.a = std::max(mf.a - lr * grads[j][q][0], kParamFloor);
        mf.b = std::max(mf.b - lr * grads[j][q][1], kParamFloor);
        mf.c = mf.c - lr * grads[j][q][2];
      }
    }

    result.rmse_trace.push_back(std::sqrt(sse(model, inputs, targets) / static_cast<double>(n)));
  }
  return result;
}

EmotionQuadrant quadrant_from_scores(double valence, double arousal) {
  const bool positive = valence >= 5.0;
  const bool high = arousal >= 5.0;
  if (positive) return high ? EmotionQuadrant::PosHigh : EmotionQuadrant::PosLow;
  return high ? EmotionQuadrant::NegHigh : EmotionQuadrant::NegLow;
}

std::pair<EmotionScore, EmotionQuadrant> classify_quadrant(const AnfisModel& valence_model,
                                                           const AnfisModel& arousal_model,
                                                           const vision::HsiDescriptor& x) {
  const std::vector<double> in(x.values.begin(), x.values.end());
  EmotionScore score;
  score.valence = std::clamp(infer(valence_model, in), 1.0, 9.0);
  score.arousal = std::clamp(infer(arousal_model, in), 1.0, 9.0);
  return {score, quadrant_from_scores(score.valence, score.arousal)};
}

}  // namespace emova::anfis
