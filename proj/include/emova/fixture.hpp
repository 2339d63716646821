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

namespace emova::pipeline {

// Synthetic dataset with a planted visual-to-audio mapping: each emotion
// quadrant gets a color family, a brightness band, a click tempo, and a
// level band; within a clip, per-segment frame brightness tracks the audio
// level, so visual features predict audio features by construction.
struct FixtureSpec {
  int clips_per_quadrant = 2;
  double clip_seconds = 6.0;
  double fps = 2.0;
  int frame_side = 64;
  double segment_duration = 0.5;  // brightness/level step length
};

// Writes manifest.json plus per-clip frame directories and WAV files.
// Identical seed and spec give byte-identical output.
void write_fixture(const std::string& out_dir, std::uint64_t seed, const FixtureSpec& spec = {});

}  // namespace emova::pipeline
