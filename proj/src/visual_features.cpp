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

#include "emova/visual_features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "emova/errors.hpp"

namespace emova::vision {

HsiFrame rgb_to_hsi(const RgbImage& frame) {
  HsiFrame out;
  out.width = frame.width;
  out.height = frame.height;
  const std::size_t n = static_cast<std::size_t>(frame.width) * frame.height;
  out.h.resize(n);
  out.s.resize(n);
  out.i.resize(n);
  for (std::size_t p = 0; p < n; ++p) {
    const double r = frame.data[3 * p];
    const double g = frame.data[3 * p + 1];
    const double b = frame.data[3 * p + 2];
    const double intensity = (r + g + b) / 3.0;
    double sat = 0.0;
    if (intensity > 0.0) sat = 1.0 - std::min({r, g, b}) / intensity;
    double hue = 0.0;
    if (sat > 0.0) {
      const double num = 0.5 * ((r - g) + (r - b));
      const double den = std::sqrt((r - g) * (r - g) + (r - b) * (g - b));
      if (den > 0.0) {
        double theta = std::acos(std::clamp(num / den, -1.0, 1.0));
        if (b > g) theta = 2.0 * M_PI - theta;
        hue = theta / (2.0 * M_PI);
        if (hue >= 1.0) hue = 0.0;
      }
    }
    out.h[p] = hue;
    out.s[p] = std::clamp(sat, 0.0, 1.0);
    out.i[p] = std::clamp(intensity, 0.0, 1.0);
  }
  return out;
}

RgbImage resize_frame(const RgbImage& frame, int side) {
  if (frame.width <= 0 || frame.height <= 0) throw ValidationError("resize_frame: empty image");
  if (side <= 0) throw ValidationError("resize_frame: side must be positive");
  if (frame.width == side && frame.height == side) return frame;

  RgbImage out;
  out.width = side;
  out.height = side;
  out.data.resize(3 * static_cast<std::size_t>(side) * side);
  for (int y = 0; y < side; ++y) {
    const int sy = static_cast<int>(static_cast<std::int64_t>(frame.height) * y / side);
    for (int x = 0; x < side; ++x) {
      const int sx = static_cast<int>(static_cast<std::int64_t>(frame.width) * x / side);
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = frame.at(sx, sy, c);
    }
  }
  return out;
}

namespace {

double fcm_objective(const std::vector<double>& points, const std::vector<double>& centers,
                     const std::vector<std::vector<double>>& memberships, double m) {
  double obj = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t k = 0; k < centers.size(); ++k) {
      const double d = points[i] - centers[k];
      obj += std::pow(memberships[i][k], m) * d * d;
    }
  }
  return obj;
}

void update_memberships(const std::vector<double>& points, const std::vector<double>& centers,
                        double m, std::vector<std::vector<double>>& memberships) {
  const std::size_t c = centers.size();
  const double expo = 2.0 / (m - 1.0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto& row = memberships[i];
    std::size_t coincident = c;
    for (std::size_t k = 0; k < c; ++k) {
      if (points[i] == centers[k]) {
        coincident = k;
        break;
      }
    }
    if (coincident < c) {
      std::fill(row.begin(), row.end(), 0.0);
      row[coincident] = 1.0;
      continue;
    }
    for (std::size_t k = 0; k < c; ++k) {
      const double dk = std::abs(points[i] - centers[k]);
      double denom = 0.0;
      for (std::size_t j = 0; j < c; ++j)
        denom += std::pow(dk / std::abs(points[i] - centers[j]), expo);
      row[k] = 1.0 / denom;
    }
  }
}

}  // namespace

FcmResult fcm(const std::vector<double>& points, const FcmConfig& cfg) {
  if (points.empty()) throw ValidationError("fcm: empty input");
  if (cfg.clusters < 1) throw ValidationError("fcm: need at least one cluster");
  if (cfg.fuzzifier <= 1.0) throw ValidationError("fcm: fuzzifier must exceed 1");

  const std::size_t c = static_cast<std::size_t>(cfg.clusters);
  const double m = cfg.fuzzifier;

  // Quantile-spaced initial centers; min/median/max for c = 3.
  std::vector<double> sorted = points;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> centers(c);
  for (std::size_t k = 0; k < c; ++k) {
    const double q = c == 1 ? 0.5 : static_cast<double>(k) / static_cast<double>(c - 1);
    centers[k] = sorted[static_cast<std::size_t>(std::llround(q * static_cast<double>(sorted.size() - 1)))];
  }

  FcmResult result;
  result.memberships.assign(points.size(), std::vector<double>(c, 0.0));

  for (int it = 0; it < cfg.max_iter; ++it) {
    update_memberships(points, centers, m, result.memberships);

    std::vector<double> next = centers;
    for (std::size_t k = 0; k < c; ++k) {
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        const double um = std::pow(result.memberships[i][k], m);
        num += um * points[i];
        den += um;
      }
      if (den > 0.0) next[k] = num / den;
    }

    double movement = 0.0;
    for (std::size_t k = 0; k < c; ++k) movement = std::max(movement, std::abs(next[k] - centers[k]));
    centers = next;
    result.iterations = it + 1;
    result.objective_trace.push_back(fcm_objective(points, centers, result.memberships, m));
    if (movement < cfg.tol) break;
  }
  result.final_objective = result.objective_trace.back();

  // Sort centers ascending, permuting membership columns to match.
  std::vector<std::size_t> order(c);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return centers[a] < centers[b]; });
  result.centers.resize(c);
  for (std::size_t k = 0; k < c; ++k) result.centers[k] = centers[order[k]];
  for (auto& row : result.memberships) {
    std::vector<double> permuted(c);
    for (std::size_t k = 0; k < c; ++k) permuted[k] = row[order[k]];
    row = std::move(permuted);
  }
  return result;
}

namespace {

std::vector<double> subsample(const std::vector<double>& channel, std::size_t max_points) {
  if (channel.size() <= max_points) return channel;
  const std::size_t stride = (channel.size() + max_points - 1) / max_points;
  std::vector<double> out;
  out.reserve(channel.size() / stride + 1);
  for (std::size_t i = 0; i < channel.size(); i += stride) out.push_back(channel[i]);
  return out;
}

}  // namespace

std::vector<double> frame_descriptor(const HsiFrame& frame, DescriptorMode mode,
                                     const FcmConfig& cfg) {
  if (frame.h.empty()) throw ValidationError("frame_descriptor: empty frame");
  const std::vector<double>* channels[3] = {&frame.h, &frame.s, &frame.i};
  std::vector<double> out;
  for (const auto* channel : channels) {
    const FcmResult r = fcm(subsample(*channel, cfg.max_points), cfg);
    if (mode == DescriptorMode::max3) {
      out.push_back(r.centers.back());
    } else {
      out.insert(out.end(), r.centers.begin(), r.centers.end());
    }
  }
  return out;
}

std::vector<std::vector<double>> clip_descriptors(const std::vector<RgbImage>& frames,
                                                  DescriptorMode mode, const FcmConfig& cfg,
                                                  int side) {
  if (frames.empty()) throw ValidationError("clip_descriptors: no frames");
  std::vector<std::vector<double>> out;
  out.reserve(frames.size());
  for (const auto& frame : frames)
    out.push_back(frame_descriptor(rgb_to_hsi(resize_frame(frame, side)), mode, cfg));
  return out;
}

std::vector<HsiDescriptor> clip_hsi_descriptors(const std::vector<RgbImage>& frames,
                                                const FcmConfig& cfg, int side) {
  const auto raw = clip_descriptors(frames, DescriptorMode::max3, cfg, side);
  std::vector<HsiDescriptor> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out[i].values = {raw[i][0], raw[i][1], raw[i][2]};
  return out;
}

}  // namespace emova::vision
