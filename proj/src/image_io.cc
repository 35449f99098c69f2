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

#include "codofuzz/image_io.h"

#include <png.h>

#include <cstring>
#include <fstream>
#include <openssl/evp.h>

#include "codofuzz/error.h"

namespace codofuzz {

std::vector<uint8_t> EncodePng(const ImageTensor& image) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width());
  png.height = static_cast<png_uint_32>(image.height());
  if (image.channels() == 1) {
    png.format = PNG_FORMAT_GRAY;
  } else if (image.channels() == 3) {
    png.format = PNG_FORMAT_RGB;
  } else {
    throw Error(ErrorCode::kInput, "PNG supports 1 or 3 channels, got " +
                                       std::to_string(image.channels()));
  }
  const std::vector<uint8_t> raw = ToBytes(image);
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&png, nullptr, &size, 0, raw.data(), 0, nullptr)) {
    throw Error(ErrorCode::kIo, std::string("PNG sizing failed: ") + png.message);
  }
  std::vector<uint8_t> out(size);
  if (!png_image_write_to_memory(&png, out.data(), &size, 0, raw.data(), 0,
                                 nullptr)) {
    throw Error(ErrorCode::kIo, std::string("PNG encode failed: ") + png.message);
  }
  out.resize(size);
  return out;
}

ImageTensor DecodePng(std::span<const uint8_t> bytes, int channels) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size())) {
    throw Error(ErrorCode::kParse, std::string("PNG header: ") + png.message);
  }
  if (channels == 0) channels = (png.format & PNG_FORMAT_FLAG_COLOR) ? 3 : 1;
  if (channels != 1 && channels != 3) {
    png_image_free(&png);
    throw Error(ErrorCode::kInput, "PNG images load as 1 or 3 channels");
  }
  png.format = channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  std::vector<uint8_t> raw(PNG_IMAGE_SIZE(png));
  // Black background for any alpha.
  png_color background{0, 0, 0};
  if (!png_image_finish_read(&png, &background, raw.data(), 0, nullptr)) {
    throw Error(ErrorCode::kParse, std::string("PNG decode: ") + png.message);
  }
  return FromBytes(ImageShape{static_cast<int>(png.height),
                              static_cast<int>(png.width), channels},
                   raw);
}

void WritePng(const std::filesystem::path& path, const ImageTensor& image) {
  WriteFileBytes(path, EncodePng(image));
}

ImageTensor ReadPng(const std::filesystem::path& path, int channels) {
  const auto bytes = ReadFileBytes(path);
  try {
    return DecodePng(bytes, channels);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.message());
  }
}

std::vector<uint8_t> ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void WriteFileBytes(const std::filesystem::path& path,
                    std::span<const uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

std::string Sha256Hex(std::span<const uint8_t> bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr)) {
    throw Error(ErrorCode::kIo, "SHA-256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 15]);
  }
  return hex;
}

std::string Sha256File(const std::filesystem::path& path) {
  return Sha256Hex(ReadFileBytes(path));
}

}  // namespace codofuzz
