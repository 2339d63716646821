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
#include <string>
#include <utility>
#include <vector>

#include "emova/visual_features.hpp"

namespace emova::anfis {

// Generalized bell curve 1 / (1 + |(x - c)/a|^(2b)).
struct BellMf {
  double a = 1.0;  // half width, > 0
  double b = 2.0;  // slope exponent, > 0
  double c = 0.0;  // center
};

// First-order Sugeno fuzzy model over a full grid of rules. Rule k fires
// with the product of its per-input memberships and contributes the affine
// output consequents[k] . (x, 1).
struct AnfisModel {
  int n_inputs = 0;
  std::vector<std::vector<BellMf>> mfs;           // [input][mf]
  std::vector<std::vector<int>> rules;            // [rule][input] -> mf index
  std::vector<std::vector<double>> consequents;   // [rule][n_inputs + 1]

  std::size_t rule_count() const { return rules.size(); }
};

// Valence/arousal on the 9-point scale, clamped to [1, 9].
struct EmotionScore {
  double valence = 5.0;
  double arousal = 5.0;
};

enum class EmotionQuadrant { PosHigh, PosLow, NegHigh, NegLow };

const char* quadrant_name(EmotionQuadrant q);
EmotionQuadrant quadrant_from_name(const std::string& name);
constexpr std::array<EmotionQuadrant, 4> kAllQuadrants = {
    EmotionQuadrant::PosHigh, EmotionQuadrant::PosLow, EmotionQuadrant::NegHigh,
    EmotionQuadrant::NegLow};

double bell_mf(double x, const BellMf& mf);

// Evenly spaced centers across each range, half-width = spacing/2, b = 2,
// zero consequents, rules enumerated lexicographically (first input most
// significant). Degenerate ranges are widened by 1e-6.
AnfisModel grid_partition_init(const std::vector<std::array<double, 2>>& input_ranges, int n_mfs);

// Rule fulfillments, the per-input membership products. Strictly positive.
std::vector<double> firing_strengths(const AnfisModel& model, const std::vector<double>& x);

double infer(const AnfisModel& model, const std::vector<double>& x);

// Least-squares estimate of all consequent coefficients with premises held
// fixed (minimum-norm on rank deficiency). Returns the training SSE after
// the step; throws NumericError if the step somehow increased it.
double lse_consequents(AnfisModel& model, const std::vector<std::vector<double>>& inputs,
                       const std::vector<double>& targets);

struct HybridTrainResult {
  std::vector<double> rmse_trace;  // one entry per epoch
};

// MSE gradient with respect to every bell parameter, consequents held
// fixed. Layout mirrors model.mfs; each entry is (d/da, d/db, d/dc).
std::vector<std::vector<std::array<double, 3>>> premise_gradients(
    const AnfisModel& model, const std::vector<std::vector<double>>& inputs,
    const std::vector<double>& targets);

// Hybrid pass per epoch: consequent LSE, then one full-batch gradient step
// on every bell parameter against MSE. a and b stay clamped >= 1e-4.
HybridTrainResult train_hybrid(AnfisModel& model, const std::vector<std::vector<double>>& inputs,
                               const std::vector<double>& targets, int epochs, double lr);

// Scores >= 5 count as positive valence / high arousal.
EmotionQuadrant quadrant_from_scores(double valence, double arousal);

std::pair<EmotionScore, EmotionQuadrant> classify_quadrant(const AnfisModel& valence_model,
                                                           const AnfisModel& arousal_model,
                                                           const vision::HsiDescriptor& x);

}  // namespace emova::anfis
