#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace blockid::io {

/// Shortest decimal with 17 significant digits; round-trips any double.
std::string format_double(double v);

/// Writes to a sibling temp file, then renames over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace blockid::io
