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
#include <cstdint>
#include <vector>

namespace emova::vision {

// RGB raster, channels interleaved, values in [0, 1].
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<double> data;  // size = 3 * width * height

  double at(int x, int y, int c) const {
    return data[3 * (static_cast<std::size_t>(y) * width + x) + static_cast<std::size_t>(c)];
  }
  double& at(int x, int y, int c) {
    return data[3 * (static_cast<std::size_t>(y) * width + x) + static_cast<std::size_t>(c)];
  }
};

// Hue/saturation/intensity planes, all in [0, 1]. Hue is the angle divided
// by 2*pi, zero for gray pixels.
struct HsiFrame {
  int width = 0;
  int height = 0;
  std::vector<double> h, s, i;
};

struct FcmConfig {
  int clusters = 3;
  double fuzzifier = 2.0;
  double tol = 1e-5;
  int max_iter = 300;
  std::size_t max_points = 4096;  // uniform-stride pixel subsample cap
  std::uint64_t seed = 0;
};

struct FcmResult {
  std::vector<double> centers;                    // sorted ascending
  std::vector<std::vector<double>> memberships;   // [point][cluster], rows sum to 1
  int iterations = 0;
  double final_objective = 0.0;
  std::vector<double> objective_trace;            // one value per iteration, non-increasing
};

enum class DescriptorMode { max3, concat9 };

// Per-frame visual descriptor: the largest fuzzy cluster center of each
// HSI channel.
struct HsiDescriptor {
  std::array<double, 3> values{0.0, 0.0, 0.0};
};

HsiFrame rgb_to_hsi(const RgbImage& frame);

// Nearest-neighbor resize; source index = floor(src_size * dst_index / dst_size).
RgbImage resize_frame(const RgbImage& frame, int side);

// Fuzzy c-means on scalar data with quantile-spaced initial centers.
FcmResult fcm(const std::vector<double>& points, const FcmConfig& cfg);

// max3: per-channel max center (3 values). concat9: sorted centers of H,
// then S, then I (9 values).
std::vector<double> frame_descriptor(const HsiFrame& frame, DescriptorMode mode,
                                     const FcmConfig& cfg);

// resize -> rgb_to_hsi -> frame_descriptor for every frame, in order.
std::vector<std::vector<double>> clip_descriptors(const std::vector<RgbImage>& frames,
                                                  DescriptorMode mode, const FcmConfig& cfg,
                                                  int side = 256);

// Convenience wrapper fixing DescriptorMode::max3.
std::vector<HsiDescriptor> clip_hsi_descriptors(const std::vector<RgbImage>& frames,
                                                const FcmConfig& cfg, int side = 256);

}  // namespace emova::vision
