#include "stackcast/date.hpp"

#include "stackcast/errors.hpp"

#include <cctype>
#include <cstdio>

namespace stackcast {

namespace {

bool is_leap(int y) noexcept
{
    return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

int days_in_month(int y, int m) noexcept
{
    static const int table[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap(y)) return 29;
    return table[m - 1];
}

} // namespace

bool is_valid_date(int year, int month, int day) noexcept
{
    if (year < 1 || year > 9999) return false;
    if (month < 1 || month > 12) return false;
    if (day < 1 || day > days_in_month(year, month)) return false;
    return true;
}

std::int64_t Date::serial() const noexcept
{
    // Howard Hinnant's days_from_civil.
    std::int64_t y = year;
    y -= month <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy =
        (153u * static_cast<unsigned>(month + (month > 2 ? -3 : 9)) + 2u) / 5u
        + static_cast<unsigned>(day) - 1u;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

std::string Date::iso() const
{
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
}

bool try_parse_iso_date(const std::string& text, Date& out) noexcept
{
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return false;
    for (int i : {0, 1, 2, 3, 5, 6, 8, 9}) {
        if (!std::isdigit(static_cast<unsigned char>(text[static_cast<size_t>(i)]))) return false;
    }
    const int y = (text[0] - '0') * 1000 + (text[1] - '0') * 100 + (text[2] - '0') * 10 + (text[3] - '0');
    const int m = (text[5] - '0') * 10 + (text[6] - '0');
    const int d = (text[8] - '0') * 10 + (text[9] - '0');
    if (!is_valid_date(y, m, d)) return false;
    out = Date{y, m, d};
    return true;
}

Date parse_iso_date(const std::string& text)
{
    Date d;
    if (!try_parse_iso_date(text, d)) {
        throw Error(ErrorKind::UnparseableRow, "invalid ISO-8601 date '" + text + "'");
    }
    return d;
}

} // namespace stackcast
