#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace pub {

using json = nlohmann::json;

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Reads a whole file into a string. Throws IoError if unreadable.
std::string read_text_file(const std::filesystem::path& path);

/// Calls fn once per non-empty line.
void for_each_line(std::istream& in, const std::function<void(const std::string&)>& fn);

/// Writes content to path atomically (temp file in the same directory, then rename).
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Formats a double with fixed precision; shared by all renderers so text
/// output is stable.
std::string format_fixed(double v, int decimals);

/// UTC calendar date "YYYY-MM-DD" from Unix seconds (no locale, no tz).
std::string format_utc_date(std::int64_t unix_seconds);

/// Whitespace-delimited token count; the project-wide budget approximation.
std::size_t count_tokens(std::string_view text);

}  // namespace pub
