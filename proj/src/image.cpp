#include "patchpoison/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "patchpoison/error.hpp"

namespace patchpoison {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidParameter: return "invalid-parameter";
        case ErrorKind::InvalidInput: return "invalid-input";
        case ErrorKind::PatchPlacement: return "patch-placement";
        case ErrorKind::InsufficientData: return "insufficient-data";
        case ErrorKind::DegenerateConfiguration: return "degenerate-configuration";
        case ErrorKind::AmbiguousPose: return "ambiguous-pose";
        case ErrorKind::NoImages: return "no-images";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

ImageBuffer::ImageBuffer(int w, int h, int c, std::uint8_t fill)
    : width(w), height(h), channels(c),
      data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * static_cast<std::size_t>(c), fill) {
    validate(*this);
}

void validate(const ImageBuffer& img) {
    if (img.width <= 0 || img.height <= 0)
        throw Error(ErrorKind::InvalidInput, "image dimensions must be positive");
    if (img.channels != 1 && img.channels != 3 && img.channels != 4)
        throw Error(ErrorKind::InvalidInput,
                    "unsupported channel count " + std::to_string(img.channels));
    const std::size_t expected = static_cast<std::size_t>(img.width) *
                                 static_cast<std::size_t>(img.height) *
                                 static_cast<std::size_t>(img.channels);
    if (img.data.size() != expected)
        throw Error(ErrorKind::InvalidInput, "image data length does not match dimensions");
}

std::uint8_t round_to_u8(double v) noexcept {
    const double r = std::round(v);  // half away from zero
    return static_cast<std::uint8_t>(std::clamp(r, 0.0, 255.0));
}

GrayImage to_gray(const ImageBuffer& img) {
    validate(img);
    GrayImage out(img.width, img.height);
    const std::size_t n = static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
    const auto* src = img.data.data();
    if (img.channels == 1) {
        for (std::size_t i = 0; i < n; ++i) out.data[i] = static_cast<float>(src[i]) / 255.0f;
        return out;
    }
    const std::size_t stride = static_cast<std::size_t>(img.channels);
    for (std::size_t i = 0; i < n; ++i) {
        const auto* p = src + i * stride;
        const double y = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
        out.data[i] = static_cast<float>(y / 255.0);
    }
    return out;
}

ImageBuffer to_u8(const GrayImage& img) {
    ImageBuffer out(img.width, img.height, 1);
    for (std::size_t i = 0; i < img.data.size(); ++i)
        out.data[i] = round_to_u8(static_cast<double>(img.data[i]) * 255.0);
    return out;
}

}  // namespace patchpoison
