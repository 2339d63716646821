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

#include "emova/lstm.hpp"

#include <cmath>

#include "emova/errors.hpp"
#include "emova/rng.hpp"

namespace emova::lstm {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

const char* gate_suffix(int g) {
  switch (g) {
    case kForget: return "f";
    case kInput: return "i";
    case kCandidate: return "c";
    case kOutput: return "o";
  }
  return "?";
}

void fill_uniform(std::vector<double>& v, double bound, Rng& rng) {
  for (double& x : v) x = rng.uniform(-bound, bound);
}

LstmLayer make_layer(int input_size, int hidden_size, Rng& rng) {
  LstmLayer layer;
  layer.input_size = input_size;
  layer.hidden_size = hidden_size;
  const double bx = 1.0 / std::sqrt(static_cast<double>(input_size));
  const double bh = 1.0 / std::sqrt(static_cast<double>(hidden_size));
  for (int g = 0; g < 4; ++g) {
    layer.wx[g] = Mat(static_cast<std::size_t>(hidden_size), static_cast<std::size_t>(input_size));
    layer.wh[g] = Mat(static_cast<std::size_t>(hidden_size), static_cast<std::size_t>(hidden_size));
    layer.b[g].assign(static_cast<std::size_t>(hidden_size), 0.0);
    fill_uniform(layer.wx[g].a, bx, rng);
    fill_uniform(layer.wh[g].a, bh, rng);
  }
  return layer;
}

// Per-step activations kept for backpropagation.
struct LayerCache {
  std::vector<std::vector<double>> x, f, i, g, o, c, tanh_c, h;
};

void layer_forward(const LstmLayer& layer, const Sequence& xs, LayerCache& cache) {
  const std::size_t hidden = static_cast<std::size_t>(layer.hidden_size);
  std::vector<double> h_prev(hidden, 0.0), c_prev(hidden, 0.0);
  for (const auto& x : xs) {
    if (x.size() != static_cast<std::size_t>(layer.input_size))
      throw ValidationError("lstm forward: input dimension mismatch");
    std::vector<double> z[4];
    for (int g = 0; g < 4; ++g) {
      z[g] = layer.b[g];
      const Mat& wx = layer.wx[g];
      for (std::size_t r = 0; r < hidden; ++r) {
        double acc = 0.0;
        const double* row = &wx.a[r * wx.cols];
        for (std::size_t k = 0; k < wx.cols; ++k) acc += row[k] * x[k];
        z[g][r] += acc;
      }
      const Mat& wh = layer.wh[g];
      for (std::size_t r = 0; r < hidden; ++r) {
        double acc = 0.0;
        const double* row = &wh.a[r * wh.cols];
        for (std::size_t k = 0; k < hidden; ++k) acc += row[k] * h_prev[k];
        z[g][r] += acc;
      }
    }
    std::vector<double> f(hidden), i(hidden), g(hidden), o(hidden), c(hidden), tc(hidden),
        h(hidden);
    for (std::size_t r = 0; r < hidden; ++r) {
      f[r] = sigmoid(z[kForget][r]);
      i[r] = sigmoid(z[kInput][r]);
      g[r] = std::tanh(z[kCandidate][r]);
      o[r] = sigmoid(z[kOutput][r]);
      c[r] = f[r] * c_prev[r] + i[r] * g[r];
      tc[r] = std::tanh(c[r]);
      h[r] = o[r] * tc[r];
    }
    cache.x.push_back(x);
    cache.f.push_back(std::move(f));
    cache.i.push_back(std::move(i));
    cache.g.push_back(std::move(g));
    cache.o.push_back(std::move(o));
    cache.c.push_back(c);
    cache.tanh_c.push_back(std::move(tc));
    cache.h.push_back(h);
    h_prev = cache.h.back();
    c_prev = std::move(c);
  }
}

// Returns the gradient with respect to the layer inputs.
Sequence layer_backward(const LstmLayer& layer, const LayerCache& cache, const Sequence& dh_out,
                        LstmLayer& grad) {
  const std::size_t hidden = static_cast<std::size_t>(layer.hidden_size);
  const std::size_t in = static_cast<std::size_t>(layer.input_size);
  const std::size_t steps = cache.x.size();
  Sequence dx(steps, std::vector<double>(in, 0.0));
  std::vector<double> dh_carry(hidden, 0.0), dc_carry(hidden, 0.0);
  const std::vector<double> zeros(hidden, 0.0);
  std::vector<double> dz[4];
  for (auto& v : dz) v.assign(hidden, 0.0);

  for (std::size_t t = steps; t-- > 0;) {
    const auto& f = cache.f[t];
    const auto& i = cache.i[t];
    const auto& g = cache.g[t];
    const auto& o = cache.o[t];
    const auto& tc = cache.tanh_c[t];
    const std::vector<double>& h_prev = t > 0 ? cache.h[t - 1] : zeros;
    const std::vector<double>& c_prev = t > 0 ? cache.c[t - 1] : zeros;

    for (std::size_t r = 0; r < hidden; ++r) {
      const double dh = dh_out[t][r] + dh_carry[r];
      const double dc = dh * o[r] * (1.0 - tc[r] * tc[r]) + dc_carry[r];
      dz[kOutput][r] = dh * tc[r] * o[r] * (1.0 - o[r]);
      dz[kForget][r] = dc * c_prev[r] * f[r] * (1.0 - f[r]);
      dz[kInput][r] = dc * g[r] * i[r] * (1.0 - i[r]);
      dz[kCandidate][r] = dc * i[r] * (1.0 - g[r] * g[r]);
      dc_carry[r] = dc * f[r];
    }

    std::fill(dh_carry.begin(), dh_carry.end(), 0.0);
    for (int gate = 0; gate < 4; ++gate) {
      const auto& dzg = dz[gate];
      Mat& gwx = grad.wx[gate];
      Mat& gwh = grad.wh[gate];
      for (std::size_t r = 0; r < hidden; ++r) {
        const double d = dzg[r];
        if (d == 0.0) continue;
        double* gx_row = &gwx.a[r * in];
        const double* x_row = cache.x[t].data();
        for (std::size_t k = 0; k < in; ++k) gx_row[k] += d * x_row[k];
        double* gh_row = &gwh.a[r * hidden];
        for (std::size_t k = 0; k < hidden; ++k) gh_row[k] += d * h_prev[k];
        grad.b[gate][r] += d;
      }
      const Mat& wx = layer.wx[gate];
      const Mat& wh = layer.wh[gate];
      for (std::size_t r = 0; r < hidden; ++r) {
        const double d = dzg[r];
        if (d == 0.0) continue;
        const double* x_row = &wx.a[r * in];
        for (std::size_t k = 0; k < in; ++k) dx[t][k] += x_row[k] * d;
        const double* h_row = &wh.a[r * hidden];
        for (std::size_t k = 0; k < hidden; ++k) dh_carry[k] += h_row[k] * d;
      }
    }
  }
  return dx;
}

struct ForwardCaches {
  LayerCache layer1, layer2;
  Sequence outputs;
};

void model_forward(const DeepLstmModel& model, const Sequence& inputs, ForwardCaches& caches) {
  layer_forward(model.layer1, inputs, caches.layer1);
  layer_forward(model.layer2, caches.layer1.h, caches.layer2);
  caches.outputs.reserve(inputs.size());
  for (const auto& h2 : caches.layer2.h) {
    std::vector<double> y = model.head_b;
    for (std::size_t r = 0; r < model.head_w.rows; ++r) {
      double acc = 0.0;
      const double* row = &model.head_w.a[r * model.head_w.cols];
      for (std::size_t k = 0; k < model.head_w.cols; ++k) acc += row[k] * h2[k];
      y[r] += acc;
    }
    caches.outputs.push_back(std::move(y));
  }
}

double sequence_loss(const Sequence& outputs, const Sequence& targets) {
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 0; t < outputs.size(); ++t) {
    for (std::size_t d = 0; d < outputs[t].size(); ++d) {
      const double e = outputs[t][d] - targets[t][d];
      acc += e * e;
      ++count;
    }
  }
  return acc / static_cast<double>(count);
}

DeepLstmModel zero_like(const DeepLstmModel& model) {
  DeepLstmModel z = model;
  auto params = model_params(z);
  for (auto& p : params) std::fill(p.values->begin(), p.values->end(), 0.0);
  return z;
}

// Full forward + backward for one sequence; grads accumulate into `grad`.
double backprop_sequence(const DeepLstmModel& model, const Sequence& inputs,
                         const Sequence& targets, DeepLstmModel& grad) {
  ForwardCaches caches;
  model_forward(model, inputs, caches);
  const double loss = sequence_loss(caches.outputs, targets);

  const std::size_t steps = inputs.size();
  const std::size_t out_dim = static_cast<std::size_t>(model.output_size);
  const double denom = static_cast<double>(steps * out_dim);
  const std::size_t hidden2 = static_cast<std::size_t>(model.layer2.hidden_size);

  Sequence dh2(steps, std::vector<double>(hidden2, 0.0));
  for (std::size_t t = 0; t < steps; ++t) {
    std::vector<double> dy(out_dim);
    for (std::size_t d = 0; d < out_dim; ++d)
      dy[d] = 2.0 * (caches.outputs[t][d] - targets[t][d]) / denom;
    for (std::size_t r = 0; r < out_dim; ++r) {
      const double d = dy[r];
      double* gw_row = &grad.head_w.a[r * hidden2];
      const double* h2 = caches.layer2.h[t].data();
      for (std::size_t k = 0; k < hidden2; ++k) gw_row[k] += d * h2[k];
      grad.head_b[r] += d;
      const double* w_row = &model.head_w.a[r * hidden2];
      for (std::size_t k = 0; k < hidden2; ++k) dh2[t][k] += w_row[k] * d;
    }
  }

  const Sequence dh1 = layer_backward(model.layer2, caches.layer2, dh2, grad.layer2);
  layer_backward(model.layer1, caches.layer1, dh1, grad.layer1);
  return loss;
}

}  // namespace

DeepLstmModel make_deep_lstm(int input_size, int hidden1, int hidden2, int output_size,
                             std::uint64_t seed) {
  if (input_size < 1 || hidden1 < 1 || hidden2 < 1 || output_size < 1)
    throw ValidationError("make_deep_lstm: sizes must be positive");
  Rng rng(seed);
  DeepLstmModel model;
  model.input_size = input_size;
  model.output_size = output_size;
  model.layer1 = make_layer(input_size, hidden1, rng);
  model.layer2 = make_layer(hidden1, hidden2, rng);
  model.head_w = Mat(static_cast<std::size_t>(output_size), static_cast<std::size_t>(hidden2));
  model.head_b.assign(static_cast<std::size_t>(output_size), 0.0);
  fill_uniform(model.head_w.a, 1.0 / std::sqrt(static_cast<double>(hidden2)), rng);
  return model;
}

std::vector<ParamRef> model_params(DeepLstmModel& model) {
  std::vector<ParamRef> params;
  auto add_layer = [&](LstmLayer& layer, const std::string& prefix) {
    for (int g = 0; g < 4; ++g) {
      params.push_back({prefix + ".wx_" + gate_suffix(g), &layer.wx[g].a});
      params.push_back({prefix + ".wh_" + gate_suffix(g), &layer.wh[g].a});
      params.push_back({prefix + ".b_" + gate_suffix(g), &layer.b[g]});
    }
  };
  add_layer(model.layer1, "layer1");
  add_layer(model.layer2, "layer2");
  params.push_back({"head.w", &model.head_w.a});
  params.push_back({"head.b", &model.head_b});
  return params;
}

std::pair<std::vector<double>, std::vector<double>> lstm_step(const LstmLayer& layer,
                                                              const std::vector<double>& x,
                                                              const std::vector<double>& h_prev,
                                                              const std::vector<double>& c_prev) {
  if (x.size() != static_cast<std::size_t>(layer.input_size) ||
      h_prev.size() != static_cast<std::size_t>(layer.hidden_size) ||
      c_prev.size() != static_cast<std::size_t>(layer.hidden_size))
    throw ValidationError("lstm_step: dimension mismatch");
  const std::size_t hidden = static_cast<std::size_t>(layer.hidden_size);
  std::vector<double> h(hidden), c(hidden);
  for (std::size_t r = 0; r < hidden; ++r) {
    double z[4];
    for (int g = 0; g < 4; ++g) {
      double acc = layer.b[g][r];
      const double* xrow = &layer.wx[g].a[r * layer.wx[g].cols];
      for (std::size_t k = 0; k < x.size(); ++k) acc += xrow[k] * x[k];
      const double* hrow = &layer.wh[g].a[r * hidden];
      for (std::size_t k = 0; k < hidden; ++k) acc += hrow[k] * h_prev[k];
      z[g] = acc;
    }
    const double f = sigmoid(z[kForget]);
    const double i = sigmoid(z[kInput]);
    const double g = std::tanh(z[kCandidate]);
    const double o = sigmoid(z[kOutput]);
    c[r] = f * c_prev[r] + i * g;
    h[r] = o * std::tanh(c[r]);
  }
  return {h, c};
}

std::vector<double> rnn_step(const RnnLayer& layer, const std::vector<double>& x,
                             const std::vector<double>& h_prev) {
  if (x.size() != layer.w.cols || h_prev.size() != layer.u.cols)
    throw ValidationError("rnn_step: dimension mismatch");
  std::vector<double> h(layer.w.rows);
  for (std::size_t r = 0; r < layer.w.rows; ++r) {
    double acc = layer.b.empty() ? 0.0 : layer.b[r];
    const double* wrow = &layer.w.a[r * layer.w.cols];
    for (std::size_t k = 0; k < x.size(); ++k) acc += wrow[k] * x[k];
    const double* urow = &layer.u.a[r * layer.u.cols];
    for (std::size_t k = 0; k < h_prev.size(); ++k) acc += urow[k] * h_prev[k];
    h[r] = sigmoid(acc);
  }
  return h;
}

Sequence forward(const DeepLstmModel& model, const Sequence& inputs) {
  if (inputs.empty()) throw ValidationError("forward: empty sequence");
  ForwardCaches caches;
  model_forward(model, inputs, caches);
  return std::move(caches.outputs);
}

double clip_global_norm(const std::vector<ParamRef>& tensors, double max_norm) {
  if (max_norm <= 0.0) throw ValidationError("clip_global_norm: max_norm must be positive");
  double norm_sq = 0.0;
  for (const auto& t : tensors)
    for (double v : *t.values) norm_sq += v * v;
  const double norm = std::sqrt(norm_sq);
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    for (const auto& t : tensors)
      for (double& v : *t.values) v *= scale;
  }
  return norm;
}

TrainTrace bptt_train(DeepLstmModel& model,
                      const std::vector<std::pair<Sequence, Sequence>>& sequences,
                      const TrainConfig& cfg) {
  if (cfg.epochs < 0) throw ValidationError("bptt_train: negative epoch count");
  if (cfg.learning_rate <= 0.0) throw ValidationError("bptt_train: learning rate must be positive");
  if (cfg.grad_clip_norm <= 0.0) throw ValidationError("bptt_train: clip norm must be positive");
  for (const auto& [inputs, targets] : sequences)
    if (inputs.size() != targets.size() || inputs.empty())
      throw ValidationError("bptt_train: each target sequence must match its input length");

  TrainTrace trace;
  if (cfg.epochs == 0) return trace;

  DeepLstmModel grad = zero_like(model);
  DeepLstmModel adam_m = zero_like(model);
  DeepLstmModel adam_v = zero_like(model);
  auto params = model_params(model);
  auto grad_params = model_params(grad);
  auto m_params = model_params(adam_m);
  auto v_params = model_params(adam_v);

  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long step = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double epoch_loss = 0.0;
    for (std::size_t s = 0; s < sequences.size(); ++s) {
      for (auto& p : grad_params) std::fill(p.values->begin(), p.values->end(), 0.0);
      const double loss = backprop_sequence(model, sequences[s].first, sequences[s].second, grad);
      if (!std::isfinite(loss))
        throw NumericError("bptt_train: non-finite loss at sequence " + std::to_string(s));
      epoch_loss += loss;

      clip_global_norm(grad_params, cfg.grad_clip_norm);

      ++step;
      const double corr1 = 1.0 - std::pow(beta1, static_cast<double>(step));
      const double corr2 = 1.0 - std::pow(beta2, static_cast<double>(step));
      for (std::size_t p = 0; p < params.size(); ++p) {
        auto& theta = *params[p].values;
        auto& g = *grad_params[p].values;
        auto& m = *m_params[p].values;
        auto& v = *v_params[p].values;
        for (std::size_t k = 0; k < theta.size(); ++k) {
          const double gk = g[k];
          m[k] = beta1 * m[k] + (1.0 - beta1) * gk;
          v[k] = beta2 * v[k] + (1.0 - beta2) * gk * gk;
          theta[k] -= cfg.learning_rate * (m[k] / corr1) / (std::sqrt(v[k] / corr2) + eps);
        }
      }
    }
    epoch_loss /= static_cast<double>(sequences.size());
    trace.epoch_loss.push_back(epoch_loss);
    if (cfg.loss_target > 0.0 && epoch_loss <= cfg.loss_target) break;
  }
  return trace;
}

GradCheckResult gradient_check(DeepLstmModel& model, const Sequence& inputs,
                               const Sequence& targets, double epsilon,
                               const std::string& name_prefix) {
  if (epsilon <= 0.0) throw ValidationError("gradient_check: epsilon must be positive");
  DeepLstmModel grad = zero_like(model);
  backprop_sequence(model, inputs, targets, grad);

  auto params = model_params(model);
  auto grad_params = model_params(grad);

  GradCheckResult result;
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (!name_prefix.empty() && params[p].name.rfind(name_prefix, 0) != 0) continue;
    auto& theta = *params[p].values;
    for (std::size_t k = 0; k < theta.size(); ++k) {
      const double saved = theta[k];
      theta[k] = saved + epsilon;
      const double lp = sequence_loss(forward(model, inputs), targets);
      theta[k] = saved - epsilon;
      const double lm = sequence_loss(forward(model, inputs), targets);
      theta[k] = saved;
      const double numeric = (lp - lm) / (2.0 * epsilon);
      const double analytic = (*grad_params[p].values)[k];
      const double rel = std::abs(analytic - numeric) /
                         std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_param = params[p].name + "[" + std::to_string(k) + "]";
      }
    }
  }
  return result;
}

}  // namespace emova::lstm
