// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace hvacdr::util {

// Shortest decimal that parses back to the same double.
std::string format_double(double v);
// Fixed 17 significant digits, used where a stable width is preferred.
std::string format_double17(double v);
// Strict parse of a full token; throws input_error on garbage.
double parse_double(std::string_view text);

// 64-bit FNV-1a, used for content hashes in file names and manifests.
std::uint64_t fnv1a(std::string_view data);
std::string hex64(std::uint64_t v);

}  // namespace hvacdr::util
