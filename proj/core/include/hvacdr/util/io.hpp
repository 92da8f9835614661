// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace hvacdr::util {

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);
void ensure_dir(const std::filesystem::path& dir);

// Comma separated, no quoting; blank lines skipped.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

}  // namespace hvacdr::util
