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
#include <vector>

#include "emova/visual_features.hpp"

namespace emova::io {

// Binary portable pixmap (P6, maxval 255).
vision::RgbImage read_ppm(const std::string& path);
void write_ppm(const std::string& path, const vision::RgbImage& image);

// Binary portable graymap (P5, maxval 255); pixels row-major, top row first.
void write_pgm(const std::string& path, int width, int height,
               const std::vector<std::uint8_t>& pixels);

// All *.ppm files in a directory, sorted by name (zero-padded numeric names
// sort into frame order).
std::vector<std::string> list_frame_files(const std::string& dir);

}  // namespace emova::io
