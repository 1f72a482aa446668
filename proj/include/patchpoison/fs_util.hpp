#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace patchpoison {

/// Writes to "<path>.tmp" then renames over path.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_atomic(const std::filesystem::path& path, std::string_view text);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);

/// Creates the directory (and parents) and probes that a file can be written
/// there. Throws Error{Io} otherwise.
void ensure_writable_dir(const std::filesystem::path& dir);

}  // namespace patchpoison
