/* Copyright 2026 The Ghostpatch Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ghostpatch/image.hpp"

namespace ghostpatch {

// Decodes PNG or JPEG (sniffed from the magic bytes) into RGB. Grayscale is
// replicated across channels and alpha is dropped. Throws DecodeError.
ImageTensor decode_image(std::span<const std::uint8_t> bytes);

// Lossless 8-bit RGB PNG.
std::vector<std::uint8_t> encode_png(const ImageTensor& img);

// Throws IoError when the file cannot be read, DecodeError on bad bytes.
ImageTensor load_image(const std::filesystem::path& path);

// Always writes PNG regardless of extension. Throws IoError.
void save_image(const ImageTensor& img, const std::filesystem::path& path);

// Regular files in dir with a .png/.jpg/.jpeg extension (any case), sorted.
// Throws IoError when dir cannot be listed.
std::vector<std::filesystem::path> list_image_files(
    const std::filesystem::path& dir);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path,
                std::span<const std::uint8_t> bytes);

}  // namespace ghostpatch
