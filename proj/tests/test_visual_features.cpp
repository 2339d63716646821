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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "emova/errors.hpp"
#include "emova/rng.hpp"
#include "emova/visual_features.hpp"

using namespace emova;

namespace {

vision::RgbImage solid(int side, double r, double g, double b) {
  vision::RgbImage img;
  img.width = side;
  img.height = side;
  img.data.resize(3 * static_cast<std::size_t>(side) * side);
  for (std::size_t p = 0; p < static_cast<std::size_t>(side) * side; ++p) {
    img.data[3 * p] = r;
    img.data[3 * p + 1] = g;
    img.data[3 * p + 2] = b;
  }
  return img;
}

}  // namespace

TEST_CASE("rgb_to_hsi reference colors") {
  const auto red = vision::rgb_to_hsi(solid(4, 1.0, 0.0, 0.0));
  CHECK(red.h[0] == doctest::Approx(0.0));
  CHECK(red.s[0] == doctest::Approx(1.0));
  CHECK(red.i[0] == doctest::Approx(1.0 / 3.0));

  const auto gray = vision::rgb_to_hsi(solid(4, 0.5, 0.5, 0.5));
  CHECK(gray.h[0] == 0.0);
  CHECK(gray.s[0] == 0.0);
  CHECK(gray.i[0] == doctest::Approx(0.5));

  const auto black = vision::rgb_to_hsi(solid(4, 0.0, 0.0, 0.0));
  CHECK(black.h[0] == 0.0);
  CHECK(black.s[0] == 0.0);
  CHECK(black.i[0] == 0.0);
}

TEST_CASE("rgb_to_hsi stays in the unit cube and zeroes saturation with intensity") {
  Rng rng(41);
  vision::RgbImage img;
  img.width = 16;
  img.height = 16;
  img.data.resize(3 * 256);
  for (double& v : img.data) v = rng.next_double();
  // Sprinkle exact black pixels.
  for (int p = 0; p < 16; ++p)
    for (int c = 0; c < 3; ++c) img.data[3 * static_cast<std::size_t>(p * 16) + static_cast<std::size_t>(c)] = 0.0;

  const auto hsi = vision::rgb_to_hsi(img);
  for (std::size_t p = 0; p < hsi.h.size(); ++p) {
    CHECK(hsi.h[p] >= 0.0);
    CHECK(hsi.h[p] <= 1.0);
    CHECK(hsi.s[p] >= 0.0);
    CHECK(hsi.s[p] <= 1.0);
    CHECK(hsi.i[p] >= 0.0);
    CHECK(hsi.i[p] <= 1.0);
    if (hsi.i[p] == 0.0) CHECK(hsi.s[p] == 0.0);
  }

  // Determinism.
  const auto again = vision::rgb_to_hsi(img);
  CHECK(again.h == hsi.h);
  CHECK(again.s == hsi.s);
  CHECK(again.i == hsi.i);
}

TEST_CASE("resize_frame identity, constants, checkerboard sampling") {
  const auto img = solid(8, 0.2, 0.4, 0.6);
  const auto same = vision::resize_frame(img, 8);
  CHECK(same.data == img.data);

  const auto big = solid(16, 0.7, 0.1, 0.3);
  const auto small = vision::resize_frame(big, 8);
  for (double v : small.data) CHECK((v == 0.7 || v == 0.1 || v == 0.3));

  // 4x4 checkerboard of 2x2 blocks down to 2x2 keeps each block's top-left.
  vision::RgbImage board;
  board.width = 4;
  board.height = 4;
  board.data.assign(48, 0.0);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) {
      const double v = ((x / 2 + y / 2) % 2 == 0) ? 1.0 : 0.25;
      for (int c = 0; c < 3; ++c) board.at(x, y, c) = v;
    }
  const auto two = vision::resize_frame(board, 2);
  CHECK(two.at(0, 0, 0) == 1.0);
  CHECK(two.at(1, 0, 0) == 0.25);
  CHECK(two.at(0, 1, 0) == 0.25);
  CHECK(two.at(1, 1, 0) == 1.0);
}

TEST_CASE("fcm recovers spikes and degenerates cleanly") {
  vision::FcmConfig cfg;
  const auto spikes = vision::fcm({0.0, 0.0, 0.5, 0.5, 1.0, 1.0}, cfg);
  REQUIRE(spikes.centers.size() == 3);
  CHECK(std::abs(spikes.centers[0] - 0.0) < 1e-3);
  CHECK(std::abs(spikes.centers[1] - 0.5) < 1e-3);
  CHECK(std::abs(spikes.centers[2] - 1.0) < 1e-3);

  // Slightly dispersed clusters still land near the cluster means.
  Rng rng(9);
  std::vector<double> noisy;
  for (double center : {0.1, 0.5, 0.9})
    for (int i = 0; i < 40; ++i) noisy.push_back(center + rng.uniform(-0.02, 0.02));
  const auto blurred = vision::fcm(noisy, cfg);
  CHECK(std::abs(blurred.centers[0] - 0.1) < 0.02);
  CHECK(std::abs(blurred.centers[1] - 0.5) < 0.02);
  CHECK(std::abs(blurred.centers[2] - 0.9) < 0.02);

  vision::FcmConfig single = cfg;
  single.clusters = 1;
  const auto one = vision::fcm({0.1, 0.2, 0.6}, single);
  CHECK(one.centers[0] == doctest::Approx(0.3).epsilon(1e-9));

  const auto constant = vision::fcm(std::vector<double>(100, 0.42), cfg);
  for (double c : constant.centers) CHECK(c == doctest::Approx(0.42));

  CHECK_THROWS_AS(vision::fcm({}, cfg), ValidationError);
}

TEST_CASE("fcm memberships are a partition and the objective never rises") {
  vision::FcmConfig cfg;
  Rng rng(77);
  for (int run = 0; run < 25; ++run) {
    std::vector<double> points(120);
    for (double& p : points) p = rng.next_double();
    const auto result = vision::fcm(points, cfg);

    for (const auto& row : result.memberships) {
      double sum = 0.0;
      for (double u : row) {
        CHECK(u >= 0.0);
        CHECK(u <= 1.0);
        sum += u;
      }
      CHECK(std::abs(sum - 1.0) < 1e-9);
    }
    for (std::size_t it = 1; it < result.objective_trace.size(); ++it)
      CHECK(result.objective_trace[it] <=
            result.objective_trace[it - 1] + 1e-12 * std::max(1.0, result.objective_trace[it - 1]));
    CHECK(std::is_sorted(result.centers.begin(), result.centers.end()));
  }
}

TEST_CASE("fcm converged centers ignore point order") {
  vision::FcmConfig cfg;
  Rng rng(31);
  std::vector<double> points(300);
  for (double& p : points) p = rng.next_double();
  const auto forward = vision::fcm(points, cfg);
  std::reverse(points.begin(), points.end());
  const auto reversed = vision::fcm(points, cfg);
  for (std::size_t k = 0; k < 3; ++k)
    CHECK(std::abs(forward.centers[k] - reversed.centers[k]) <= cfg.tol);
}

TEST_CASE("frame descriptors: uniform frames, spiked intensity, bounds") {
  vision::FcmConfig cfg;
  const auto gray = vision::rgb_to_hsi(solid(32, 0.5, 0.5, 0.5));
  const auto d = vision::frame_descriptor(gray, vision::DescriptorMode::max3, cfg);
  REQUIRE(d.size() == 3);
  CHECK(d[0] == doctest::Approx(0.0));
  CHECK(d[1] == doctest::Approx(0.0));
  CHECK(d[2] == doctest::Approx(0.5));

  const auto nine = vision::frame_descriptor(gray, vision::DescriptorMode::concat9, cfg);
  REQUIRE(nine.size() == 9);
  for (int k = 0; k < 3; ++k) {
    CHECK(nine[static_cast<std::size_t>(k)] == doctest::Approx(0.0));
    CHECK(nine[static_cast<std::size_t>(6 + k)] == doctest::Approx(0.5));
  }

  // Intensity split evenly across three levels: the max center sits by 0.9.
  vision::HsiFrame spiked;
  spiked.width = 30;
  spiked.height = 30;
  spiked.h.assign(900, 0.0);
  spiked.s.assign(900, 0.0);
  spiked.i.resize(900);
  for (std::size_t p = 0; p < 900; ++p) spiked.i[p] = (p % 3 == 0) ? 0.2 : (p % 3 == 1 ? 0.5 : 0.9);
  const auto spiky = vision::frame_descriptor(spiked, vision::DescriptorMode::max3, cfg);
  CHECK(std::abs(spiky[2] - 0.9) < 0.05);

  // Centers are convex combinations of the data.
  Rng rng(13);
  vision::HsiFrame random;
  random.width = 20;
  random.height = 20;
  random.h.resize(400);
  random.s.resize(400);
  random.i.resize(400);
  for (std::size_t p = 0; p < 400; ++p) {
    random.h[p] = rng.uniform(0.2, 0.7);
    random.s[p] = rng.uniform(0.1, 0.9);
    random.i[p] = rng.uniform(0.3, 0.6);
  }
  const auto rd = vision::frame_descriptor(random, vision::DescriptorMode::max3, cfg);
  CHECK(rd[0] >= 0.2);
  CHECK(rd[0] <= 0.7);
  CHECK(rd[1] >= 0.1);
  CHECK(rd[1] <= 0.9);
  CHECK(rd[2] >= 0.3);
  CHECK(rd[2] <= 0.6);
}

TEST_CASE("clip descriptors map frames in order, deterministically") {
  vision::FcmConfig cfg;
  const std::vector<vision::RgbImage> one{solid(16, 0.3, 0.6, 0.9)};
  CHECK(vision::clip_descriptors(one, vision::DescriptorMode::max3, cfg, 16).size() == 1);

  std::vector<vision::RgbImage> repeated{solid(16, 0.8, 0.2, 0.4), solid(16, 0.8, 0.2, 0.4),
                                         solid(16, 0.1, 0.9, 0.5)};
  const auto ds = vision::clip_descriptors(repeated, vision::DescriptorMode::max3, cfg, 16);
  REQUIRE(ds.size() == 3);
  CHECK(ds[0] == ds[1]);
  CHECK(ds[0] != ds[2]);

  const auto hsi = vision::clip_hsi_descriptors(repeated, cfg, 16);
  REQUIRE(hsi.size() == 3);
  for (int k = 0; k < 3; ++k)
    CHECK(hsi[0].values[static_cast<std::size_t>(k)] == ds[0][static_cast<std::size_t>(k)]);

  CHECK_THROWS_AS(vision::clip_descriptors({}, vision::DescriptorMode::max3, cfg, 16),
                  ValidationError);
}
