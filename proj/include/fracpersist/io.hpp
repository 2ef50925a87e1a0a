#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace fracpersist {

/// Shortest text that parses back to the same double: 17 significant
/// digits, '.' decimal point, independent of the global locale.
std::string format_double(double value);

/// Writes `content` to a temporary file next to `path` and renames it into
/// place, so readers never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace fracpersist
