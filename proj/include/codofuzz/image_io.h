// Copyright 2026 The CoDoFuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CODOFUZZ_IMAGE_IO_H_
#define CODOFUZZ_IMAGE_IO_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "codofuzz/image.h"

namespace codofuzz {

// Lossless 8-bit PNG (gray for 1 channel, RGB for 3). Pixels are quantized
// with ToBytes; encoder settings are libpng's fixed defaults so identical
// images encode to identical bytes. Throws kInput for other channel counts.
std::vector<uint8_t> EncodePng(const ImageTensor& image);
// Decodes gray or RGB (palette, alpha and 16-bit inputs are converted).
// Throws kParse.
ImageTensor DecodePng(std::span<const uint8_t> bytes, int channels = 0);

void WritePng(const std::filesystem::path& path, const ImageTensor& image);
// `channels` 0 keeps the file's own layout (1 for gray, 3 for color).
ImageTensor ReadPng(const std::filesystem::path& path, int channels = 0);

std::vector<uint8_t> ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::filesystem::path& path,
                    std::span<const uint8_t> bytes);

// Lowercase hex SHA-256.
std::string Sha256Hex(std::span<const uint8_t> bytes);
std::string Sha256File(const std::filesystem::path& path);

}  // namespace codofuzz

#endif  // CODOFUZZ_IMAGE_IO_H_
