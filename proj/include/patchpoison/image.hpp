#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace patchpoison {

/// Row-major interleaved 8-bit raster. Channels are 1 (gray), 3 (RGB) or 4 (RGBA).
struct ImageBuffer {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<std::uint8_t> data;

    ImageBuffer() = default;
    ImageBuffer(int w, int h, int c, std::uint8_t fill = 0);

    std::size_t index(int x, int y, int c = 0) const noexcept {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                static_cast<std::size_t>(x)) * static_cast<std::size_t>(channels) +
               static_cast<std::size_t>(c);
    }
    std::uint8_t& at(int x, int y, int c = 0) noexcept { return data[index(x, y, c)]; }
    std::uint8_t at(int x, int y, int c = 0) const noexcept { return data[index(x, y, c)]; }

    bool empty() const noexcept { return data.empty(); }
    bool same_shape(const ImageBuffer& o) const noexcept {
        return width == o.width && height == o.height && channels == o.channels;
    }
    /// Number of color channels, i.e. channels without a trailing alpha.
    int color_channels() const noexcept { return channels == 4 ? 3 : channels; }

    bool operator==(const ImageBuffer&) const = default;
};

/// Throws InvalidInput unless dimensions, channel count and data length agree.
void validate(const ImageBuffer& img);

/// Single-channel float image, values typically in [0,1].
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<float> data;

    GrayImage() = default;
    GrayImage(int w, int h, float fill = 0.0f)
        : width(w), height(h), data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

    float& at(int x, int y) noexcept { return data[static_cast<std::size_t>(y) * width + x]; }
    float at(int x, int y) const noexcept { return data[static_cast<std::size_t>(y) * width + x]; }
};

/// BT.601 luma, scaled to [0,1]. Alpha is ignored.
GrayImage to_gray(const ImageBuffer& img);

/// Quantizes a [0,1] gray image to an 8-bit single-channel buffer.
ImageBuffer to_u8(const GrayImage& img);

/// Half-away-from-zero rounding clamped to [0,255].
std::uint8_t round_to_u8(double v) noexcept;

}  // namespace patchpoison
