#pragma once

#include <filesystem>
#include <optional>

#include "patchpoison/image.hpp"

namespace patchpoison {

enum class ImageFormat { Png, Pnm };

/// Format from the file extension (.png, .ppm, .pgm, .pnm), if supported.
std::optional<ImageFormat> format_from_path(const std::filesystem::path& path);

bool is_image_path(const std::filesystem::path& path);

/// Decodes an 8-bit PNG (gray, gray+alpha, RGB, RGBA, palette) or a binary
/// PGM/PPM. Gray+alpha is widened to RGBA and 16-bit samples are reduced to 8.
/// Throws Error{Io} on unreadable files and Error{InvalidInput} on bad data.
ImageBuffer read_image(const std::filesystem::path& path);

/// Encodes with fixed settings so identical buffers always give identical bytes.
/// PNM output requires 1 or 3 channels. The write goes through a temporary
/// file and a rename.
void write_image(const std::filesystem::path& path, const ImageBuffer& img, ImageFormat format);

/// Picks the format from the extension.
void write_image(const std::filesystem::path& path, const ImageBuffer& img);

}  // namespace patchpoison
