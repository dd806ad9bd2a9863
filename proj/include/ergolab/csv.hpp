#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <system_error>

#include "ergolab/errors.hpp"

namespace ergolab {

// Shortest round-trip decimal form of a double, locale-independent. All CSV
// and report output goes through here so identical runs emit identical bytes.
inline std::string format_double(double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

inline std::string format_int(std::int64_t n) {
    char buf[24];
    const auto res = std::to_chars(buf, buf + sizeof(buf), n);
    return std::string(buf, res.ptr);
}

// Strict double parse of a whole field (no trailing junk).
inline double parse_double_field(const std::string& field, int line_no) {
    const char* first = field.data();
    const char* last = field.data() + field.size();
    double value = 0.0;
    const auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc{} || res.ptr != last) {
        throw ConfigError("line " + std::to_string(line_no) + ": bad numeric field '" +
                          field + "'");
    }
    return value;
}

}  // namespace ergolab
