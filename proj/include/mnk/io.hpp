#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace mnk {

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over the target, so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

} // namespace mnk
