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

#include <string>

#include "emova/dsp.hpp"

namespace emova::io {

// RIFF/WAVE, PCM 16-bit little-endian, 8-48 kHz. Stereo is downmixed by
// channel average. Samples map to doubles as s / 32768.
dsp::AudioSignal read_wav(const std::string& path);

// Mono PCM16LE writer; doubles are clamped to [-1, 1] and scaled by 32768.
void write_wav(const std::string& path, const dsp::AudioSignal& signal);

}  // namespace emova::io
