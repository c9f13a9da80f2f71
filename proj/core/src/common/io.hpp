#pragma once

#include <filesystem>
#include <string>

namespace gradekit::detail {

/// Whole file as bytes; Error naming the path when unreadable.
std::string read_text_file(const std::filesystem::path& path);

/// Writes bytes through a sibling temporary file and a rename.
void write_text_file(const std::filesystem::path& path, const std::string& bytes);

}  // namespace gradekit::detail
