#include "pub/io.hpp"

#include <cstdio>
#include <sstream>

namespace pub {

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("error while reading: " + path.string());
    return ss.str();
}

void for_each_line(std::istream& in, const std::function<void(const std::string&)>& fn) {
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        fn(line);
    }
    if (in.bad()) throw IoError("stream read failure");
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw IoError("write failure: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string format_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    std::string s(buf);
    if (s == "-0" || s.rfind("-0.", 0) == 0) {
        bool all_zero = true;
        for (char c : s)
            if (c != '-' && c != '0' && c != '.') all_zero = false;
        if (all_zero) s.erase(0, 1);
    }
    return s;
}

std::string format_utc_date(std::int64_t unix_seconds) {
    // Civil-from-days (Howard Hinnant's algorithm); avoids gmtime state.
    std::int64_t days = unix_seconds / 86400;
    if (unix_seconds % 86400 < 0) --days;
    std::int64_t z = days + 719468;
    std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    std::uint64_t doe = static_cast<std::uint64_t>(z - era * 146097);
    std::uint64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    std::uint64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    std::uint64_t mp = (5 * doy + 2) / 153;
    std::uint64_t d = doy - (153 * mp + 2) / 5 + 1;
    std::uint64_t m = mp < 10 ? mp + 3 : mp - 9;
    if (m <= 2) ++y;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%04lld-%02llu-%02llu", static_cast<long long>(y),
                  static_cast<unsigned long long>(m), static_cast<unsigned long long>(d));
    return buf;
}

std::size_t count_tokens(std::string_view text) {
    std::size_t n = 0;
    bool in_tok = false;
    for (char c : text) {
        bool ws = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
        if (!ws && !in_tok) ++n;
        in_tok = !ws;
    }
    return n;
}

}  // namespace pub
