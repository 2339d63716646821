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

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "emova/linalg.hpp"

namespace emova::lstm {

using linalg::Mat;

// Gate order used throughout: forget, input, candidate, output.
enum Gate { kForget = 0, kInput = 1, kCandidate = 2, kOutput = 3 };

struct LstmLayer {
  int input_size = 0;
  int hidden_size = 0;
  Mat wx[4];                  // [gate] input weights, hidden x input
  Mat wh[4];                  // [gate] recurrent weights, hidden x hidden
  std::vector<double> b[4];   // [gate] biases
};

// Vanilla recurrent baseline: h = sigmoid(W x + U h_prev + b).
struct RnnLayer {
  Mat w;  // hidden x input
  Mat u;  // hidden x hidden
  std::vector<double> b;
};

struct DeepLstmModel {
  int input_size = 3;
  int output_size = 3;
  LstmLayer layer1;  // 100 units by default
  LstmLayer layer2;  // 300 units by default
  Mat head_w;        // output x hidden2
  std::vector<double> head_b;
};

struct TrainConfig {
  int epochs = 200;
  double learning_rate = 1e-3;
  double grad_clip_norm = 5.0;
  std::uint64_t seed = 0;
  // Stop once the epoch mean loss reaches this value; 0 disables early stop.
  double loss_target = 0.0;
};

// Named view over one parameter tensor, for the optimizer and for
// finite-difference verification.
struct ParamRef {
  std::string name;
  std::vector<double>* values;
};

using Sequence = std::vector<std::vector<double>>;

DeepLstmModel make_deep_lstm(int input_size, int hidden1, int hidden2, int output_size,
                             std::uint64_t seed);

std::vector<ParamRef> model_params(DeepLstmModel& model);

// One cell update; returns (h, c).
std::pair<std::vector<double>, std::vector<double>> lstm_step(const LstmLayer& layer,
                                                              const std::vector<double>& x,
                                                              const std::vector<double>& h_prev,
                                                              const std::vector<double>& c_prev);

std::vector<double> rnn_step(const RnnLayer& layer, const std::vector<double>& x,
                             const std::vector<double>& h_prev);

// Zero initial states; layer1 -> layer2 -> affine head at every step.
Sequence forward(const DeepLstmModel& model, const Sequence& inputs);

struct TrainTrace {
  std::vector<double> epoch_loss;  // mean per-sequence MSE per epoch
};

// Scales the tensors so their joint L2 norm is at most max_norm; returns
// the pre-clip norm.
double clip_global_norm(const std::vector<ParamRef>& tensors, double max_norm);

// Full backpropagation through time with per-sequence Adam updates and
// global-norm gradient clipping. epochs == 0 is a no-op.
TrainTrace bptt_train(DeepLstmModel& model,
                      const std::vector<std::pair<Sequence, Sequence>>& sequences,
                      const TrainConfig& cfg);

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
};

// Central finite differences over every parameter whose name starts with
// name_prefix (empty matches all), against the analytic BPTT gradient.
GradCheckResult gradient_check(DeepLstmModel& model, const Sequence& inputs,
                               const Sequence& targets, double epsilon = 1e-5,
                               const std::string& name_prefix = "");

}  // namespace emova::lstm
