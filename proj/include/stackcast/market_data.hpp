#pragma once

#include "stackcast/date.hpp"
#include "stackcast/errors.hpp"

#include <array>
#include <string>
#include <vector>

namespace stackcast {

struct OhlcvRow {
    Date date;
    double open = 0.0;
    double high = 0.0;
    double low = 0.0;
    double close = 0.0;
    double volume_from = 0.0;
    double volume_to = 0.0;

    /// Prices positive, volumes non-negative, low <= min(open, close) <= max(open, close) <= high.
    bool prices_consistent() const noexcept;
};

struct OhlcvSeries {
    std::vector<OhlcvRow> rows;

    std::size_t size() const noexcept { return rows.size(); }
    bool empty() const noexcept { return rows.empty(); }

    std::vector<double> opens() const;
    std::vector<double> highs() const;
    std::vector<double> lows() const;
    std::vector<double> closes() const;
    std::vector<double> volumes_from() const;
    std::vector<double> volumes_to() const;
    std::vector<Date> dates() const;
};

/// Maps the loader onto arbitrary CSV header names. Defaults match the
/// CryptoCompare daily export.
struct CsvSchema {
    std::string date = "time";
    std::string open = "open";
    std::string high = "high";
    std::string low = "low";
    std::string close = "close";
    std::string volume_from = "volumefrom";
    std::string volume_to = "volumeto";
};

struct SplitSpec {
    /// Last training day, inclusive. Must fall on or after the first date and
    /// strictly before the last so both halves come out non-empty.
    Date boundary_date;
};

struct ColumnStats {
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double stddev = 0.0; // sample denominator (N-1); 0 for a single row
};

struct DescriptiveStats {
    static constexpr std::array<const char*, 6> column_names = {
        "open", "high", "low", "close", "volume_from", "volume_to"};

    std::array<ColumnStats, 6> columns{};

    const ColumnStats& open() const noexcept { return columns[0]; }
    const ColumnStats& high() const noexcept { return columns[1]; }
    const ColumnStats& low() const noexcept { return columns[2]; }
    const ColumnStats& close() const noexcept { return columns[3]; }
    const ColumnStats& volume_from() const noexcept { return columns[4]; }
    const ColumnStats& volume_to() const noexcept { return columns[5]; }
};

/// Reads a daily OHLCV CSV. Dates must be ISO-8601 and strictly increasing.
/// Rows that fail the OhlcvRow price invariants abort the load with
/// UnparseableRow carrying the 1-based data row number (header excluded);
/// silent dropping would hide corrupt market data.
OhlcvSeries load_csv(const std::string& path, const CsvSchema& schema = {});

/// Writes the series back out with shortest round-trip number formatting, so
/// load(save(load(x))) reproduces values exactly. Column order is the schema
/// default.
void save_csv(const OhlcvSeries& series, const std::string& path);

std::pair<OhlcvSeries, OhlcvSeries> split(const OhlcvSeries& series, const SplitSpec& spec);

DescriptiveStats describe(const OhlcvSeries& series);

} // namespace stackcast
