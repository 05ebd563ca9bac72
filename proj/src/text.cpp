#include "stackcast/text.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <cerrno>

namespace stackcast {

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.emplace_back(line.substr(start));
            break;
        }
        fields.emplace_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

std::string trim(std::string_view text) {
    const char* ws = " \t\r\n";
    std::size_t first = text.find_first_not_of(ws);
    if (first == std::string_view::npos) return {};
    std::size_t last = text.find_last_not_of(ws);
    return std::string(text.substr(first, last - first + 1));
}

std::string format_double(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

bool try_parse_double(const std::string& text, double& out) noexcept {
    if (text.empty()) return false;
    const char* begin = text.c_str();
    char* end = nullptr;
    errno = 0;
    double value = std::strtod(begin, &end);
    if (end != begin + text.size() || errno == ERANGE) return false;
    out = value;
    return true;
}

bool try_parse_long(const std::string& text, long& out) noexcept {
    if (text.empty()) return false;
    const char* begin = text.c_str();
    char* end = nullptr;
    errno = 0;
    long value = std::strtol(begin, &end, 10);
    if (end != begin + text.size() || errno == ERANGE) return false;
    out = value;
    return true;
}

void Fnv1a::update(const void* data, std::size_t size) noexcept {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        state_ ^= bytes[i];
        state_ *= 0x100000001b3ULL;
    }
}

std::string Fnv1a::hex() const {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(state_));
    return std::string(buf, 16);
}

} // namespace stackcast
