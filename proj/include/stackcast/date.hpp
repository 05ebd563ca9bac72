#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace stackcast {

/// Calendar day. Stored as year/month/day; comparisons use the proleptic
/// Gregorian day number so arithmetic is exact across month boundaries.
struct Date {
    int year = 1970;
    int month = 1; // 1..12
    int day = 1;   // 1..31

    /// Days since 1970-01-01 (negative before).
    std::int64_t serial() const noexcept;

    std::string iso() const; // YYYY-MM-DD

    friend bool operator==(const Date& a, const Date& b) noexcept
    {
        return a.year == b.year && a.month == b.month && a.day == b.day;
    }
    friend std::strong_ordering operator<=>(const Date& a, const Date& b) noexcept
    {
        return a.serial() <=> b.serial();
    }
};

bool is_valid_date(int year, int month, int day) noexcept;

/// Parses strict ISO-8601 "YYYY-MM-DD". Throws Error(UnparseableRow) on
/// malformed input; callers that want a different kind catch and rethrow.
Date parse_iso_date(const std::string& text);

/// Non-throwing variant; returns false on malformed input.
bool try_parse_iso_date(const std::string& text, Date& out) noexcept;

} // namespace stackcast
