#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace stackcast {

/// Splits one CSV line on commas. No quoting rules: market data files in
/// this toolkit never contain embedded separators.
std::vector<std::string> split_csv_line(std::string_view line);

std::string trim(std::string_view text);

/// Shortest decimal form that round-trips the exact double (to_chars).
std::string format_double(double value);

bool try_parse_double(const std::string& text, double& out) noexcept;
bool try_parse_long(const std::string& text, long& out) noexcept;

/// FNV-1a over raw bytes; used to content-address stage outputs.
class Fnv1a {
public:
    void update(const void* data, std::size_t size) noexcept;
    void update(std::string_view text) noexcept { update(text.data(), text.size()); }
    void update(double value) noexcept { update(&value, sizeof(value)); }
    void update(std::uint64_t value) noexcept { update(&value, sizeof(value)); }
    std::uint64_t digest() const noexcept { return state_; }
    std::string hex() const;

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

} // namespace stackcast
