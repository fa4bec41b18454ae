#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace kvwave {

/// Shortest-safe decimal form with 17 significant digits (round-trips doubles).
std::string fmt17(double x);

/// Writes `content` to `path`, creating parent directories. Failures raise
/// kvwave::Error carrying the path.
void write_text_file(const std::filesystem::path& path, std::string_view content);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace kvwave
