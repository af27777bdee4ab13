#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace cec {

/// Reads a whole file as bytes. Throws Error(Io) when unreadable.
std::string read_file(const std::filesystem::path& path);

/// Writes `contents` to a sibling temporary file and renames it over `path`,
/// so readers never observe a half-written file.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view contents);

}  // namespace cec
