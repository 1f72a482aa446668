#include "patchpoison/image_codec.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cstring>
#include <string>
#include <vector>

#include "patchpoison/error.hpp"
#include "patchpoison/fs_util.hpp"

namespace fs = std::filesystem;

namespace patchpoison {

namespace {

std::string lower_ext(const fs::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

ImageBuffer decode_png(const std::vector<std::uint8_t>& bytes, const fs::path& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
        throw Error(ErrorKind::InvalidInput, "cannot decode PNG " + path.string() + ": " + image.message);

    ImageBuffer img;
    const bool has_alpha = (image.format & PNG_FORMAT_FLAG_ALPHA) != 0;
    const bool has_color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
    if (has_alpha) {
        image.format = PNG_FORMAT_RGBA;
        img.channels = 4;
    } else if (has_color) {
        image.format = PNG_FORMAT_RGB;
        img.channels = 3;
    } else {
        image.format = PNG_FORMAT_GRAY;
        img.channels = 1;
    }
    img.width = static_cast<int>(image.width);
    img.height = static_cast<int>(image.height);
    img.data.resize(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, img.data.data(), 0, nullptr)) {
        const std::string msg = image.message;
        png_image_free(&image);
        throw Error(ErrorKind::InvalidInput, "cannot decode PNG " + path.string() + ": " + msg);
    }
    validate(img);
    return img;
}

std::vector<std::uint8_t> encode_png(const ImageBuffer& img) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width);
    image.height = static_cast<png_uint_32>(img.height);
    image.format = img.channels == 4 ? PNG_FORMAT_RGBA : img.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&image, nullptr, &size, 0, img.data.data(), 0, nullptr))
        throw Error(ErrorKind::Io, std::string("PNG encoding failed: ") + image.message);
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&image, out.data(), &size, 0, img.data.data(), 0, nullptr))
        throw Error(ErrorKind::Io, std::string("PNG encoding failed: ") + image.message);
    out.resize(size);
    return out;
}

// Binary PGM (P5) / PPM (P6), maxval <= 255.
ImageBuffer decode_pnm(const std::vector<std::uint8_t>& bytes, const fs::path& path) {
    std::size_t pos = 0;
    auto fail = [&](const std::string& why) -> Error {
        return Error(ErrorKind::InvalidInput, "bad PNM file " + path.string() + ": " + why);
    };
    auto skip_ws = [&] {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(bytes[pos])) {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto read_int = [&]() -> int {
        skip_ws();
        long v = 0;
        std::size_t start = pos;
        while (pos < bytes.size() && std::isdigit(bytes[pos])) {
            v = v * 10 + (bytes[pos] - '0');
            if (v > (1L << 30)) throw fail("header value out of range");
            ++pos;
        }
        if (pos == start) throw fail("malformed header");
        return static_cast<int>(v);
    };
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) throw fail("unsupported magic");
    pos = 2;
    ImageBuffer img;
    img.channels = bytes[1] == '5' ? 1 : 3;
    img.width = read_int();
    img.height = read_int();
    const int maxval = read_int();
    if (maxval <= 0 || maxval > 255) throw fail("only 8-bit maxval is supported");
    if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw fail("missing header terminator");
    ++pos;
    if (img.width <= 0 || img.height <= 0) throw fail("non-positive dimensions");
    const std::size_t n = static_cast<std::size_t>(img.width) * img.height * img.channels;
    if (bytes.size() - pos < n) throw fail("truncated pixel data");
    img.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                    bytes.begin() + static_cast<std::ptrdiff_t>(pos + n));
    if (maxval != 255)
        for (auto& v : img.data) v = static_cast<std::uint8_t>((v * 255 + maxval / 2) / maxval);
    return img;
}

std::vector<std::uint8_t> encode_pnm(const ImageBuffer& img) {
    if (img.channels != 1 && img.channels != 3)
        throw Error(ErrorKind::InvalidInput, "PNM output requires 1 or 3 channels");
    const std::string header = std::string(img.channels == 1 ? "P5" : "P6") + "\n" + std::to_string(img.width) +
                               " " + std::to_string(img.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), img.data.begin(), img.data.end());
    return out;
}

}  // namespace

std::optional<ImageFormat> format_from_path(const fs::path& path) {
    const std::string ext = lower_ext(path);
    if (ext == ".png") return ImageFormat::Png;
    if (ext == ".ppm" || ext == ".pgm" || ext == ".pnm") return ImageFormat::Pnm;
    return std::nullopt;
}

bool is_image_path(const fs::path& path) { return format_from_path(path).has_value(); }

ImageBuffer read_image(const fs::path& path) {
    const auto format = format_from_path(path);
    if (!format) throw Error(ErrorKind::InvalidInput, "unsupported image extension: " + path.string());
    const auto bytes = read_file_bytes(path);
    return *format == ImageFormat::Png ? decode_png(bytes, path) : decode_pnm(bytes, path);
}

void write_image(const fs::path& path, const ImageBuffer& img, ImageFormat format) {
    validate(img);
    const auto bytes = format == ImageFormat::Png ? encode_png(img) : encode_pnm(img);
    write_file_atomic(path, bytes);
}

void write_image(const fs::path& path, const ImageBuffer& img) {
    const auto format = format_from_path(path);
    if (!format) throw Error(ErrorKind::InvalidInput, "unsupported image extension: " + path.string());
    write_image(path, img, *format);
}

}  // namespace patchpoison
