#pragma once

// 8-bit RGB PNG read/write for ImageBuffer.

#include <string>

#include "gsdefend/image.hpp"

namespace gsd {

// Loads any libpng-readable image as 8-bit RGB, values mapped to [0,1].
// Missing/unreadable file -> IoError; corrupt stream -> ParseError.
ImageBuffer load_png(const std::string& path);

// Clamps to [0,1], rounds to 8 bits, writes RGB. An optional "seed" text
// chunk records the generating seed in the file header.
void save_png(const ImageBuffer& img, const std::string& path,
              const std::string& seed_text = "");

}  // namespace gsd
