// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace seqguard {

using Json = nlohmann::json;

/// Rounds to the nearest 32-bit float and returns the double holding that
/// float's shortest decimal form, so JSON output prints at most nine
/// significant digits and parses back to the same float.
double round_f32(double v);

/// Reads a whole file. Throws IoError.
std::string read_file(const std::filesystem::path& path);

/// Writes via a temporary sibling and rename. Throws IoError.
void write_file(const std::filesystem::path& path, std::string_view contents);

/// Calls `fn(json, line_number)` for every non-blank line. Parse errors
/// become FormatError carrying the line number.
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const Json&, std::size_t)>& fn);

Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& doc);

}  // namespace seqguard
