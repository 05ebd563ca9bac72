#include "stackcast/market_data.hpp"

#include "stackcast/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace stackcast {

bool OhlcvRow::prices_consistent() const noexcept {
    if (!(open > 0.0 && high > 0.0 && low > 0.0 && close > 0.0)) return false;
    if (!(volume_from >= 0.0 && volume_to >= 0.0)) return false;
    if (low > high) return false;
    if (low > std::min(open, close)) return false;
    if (high < std::max(open, close)) return false;
    return true;
}

namespace {

std::vector<double> extract(const OhlcvSeries& s, double OhlcvRow::*field) {
    std::vector<double> out;
    out.reserve(s.rows.size());
    for (const auto& r : s.rows) out.push_back(r.*field);
    return out;
}

} // namespace

std::vector<double> OhlcvSeries::opens() const { return extract(*this, &OhlcvRow::open); }
std::vector<double> OhlcvSeries::highs() const { return extract(*this, &OhlcvRow::high); }
std::vector<double> OhlcvSeries::lows() const { return extract(*this, &OhlcvRow::low); }
std::vector<double> OhlcvSeries::closes() const { return extract(*this, &OhlcvRow::close); }
std::vector<double> OhlcvSeries::volumes_from() const { return extract(*this, &OhlcvRow::volume_from); }
std::vector<double> OhlcvSeries::volumes_to() const { return extract(*this, &OhlcvRow::volume_to); }

std::vector<Date> OhlcvSeries::dates() const {
    std::vector<Date> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r.date);
    return out;
}

OhlcvSeries load_csv(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);

    std::string header_line;
    if (!std::getline(in, header_line)) throw Error(ErrorKind::EmptyFile, path + " is empty");

    const auto header = split_csv_line(trim(header_line));
    auto find_column = [&](const std::string& name) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (trim(header[i]) == name) return static_cast<long>(i);
        }
        throw Error(ErrorKind::MissingColumn, "column '" + name + "' not found in " + path);
    };

    const long c_date = find_column(schema.date);
    const long c_open = find_column(schema.open);
    const long c_high = find_column(schema.high);
    const long c_low = find_column(schema.low);
    const long c_close = find_column(schema.close);
    const long c_vfrom = find_column(schema.volume_from);
    const long c_vto = find_column(schema.volume_to);

    OhlcvSeries series;
    std::string line;
    std::size_t row_number = 0; // 1-based over data rows
    while (std::getline(in, line)) {
        std::string stripped = trim(line);
        if (stripped.empty()) continue;
        ++row_number;

        const auto fields = split_csv_line(stripped);
        auto bad_row = [&](const std::string& why) {
            return Error(ErrorKind::UnparseableRow, "row " + std::to_string(row_number) + ": " + why,
                         row_number);
        };
        if (static_cast<long>(fields.size()) <= std::max({c_date, c_open, c_high, c_low, c_close, c_vfrom, c_vto})) {
            throw bad_row("too few fields");
        }

        OhlcvRow row;
        if (!try_parse_iso_date(trim(fields[static_cast<std::size_t>(c_date)]), row.date)) {
            throw bad_row("bad date '" + fields[static_cast<std::size_t>(c_date)] + "'");
        }
        auto number = [&](long col, const char* what) {
            double value = 0.0;
            if (!try_parse_double(trim(fields[static_cast<std::size_t>(col)]), value) || !std::isfinite(value)) {
                throw bad_row(std::string("bad ") + what + " '" + fields[static_cast<std::size_t>(col)] + "'");
            }
            return value;
        };
        row.open = number(c_open, "open");
        row.high = number(c_high, "high");
        row.low = number(c_low, "low");
        row.close = number(c_close, "close");
        row.volume_from = number(c_vfrom, "volumefrom");
        row.volume_to = number(c_vto, "volumeto");

        if (!row.prices_consistent()) throw bad_row("price fields are inconsistent");

        if (!series.rows.empty() && !(series.rows.back().date < row.date)) {
            throw Error(ErrorKind::NonMonotonicDates,
                        "row " + std::to_string(row_number) + ": date " + row.date.iso() +
                            " does not follow " + series.rows.back().date.iso());
        }
        series.rows.push_back(row);
    }

    if (series.rows.empty()) throw Error(ErrorKind::EmptyFile, path + " has no data rows");
    return series;
}

void save_csv(const OhlcvSeries& series, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
    out << "time,open,high,low,close,volumefrom,volumeto\n";
    for (const auto& r : series.rows) {
        out << r.date.iso() << ',' << format_double(r.open) << ',' << format_double(r.high) << ','
            << format_double(r.low) << ',' << format_double(r.close) << ','
            << format_double(r.volume_from) << ',' << format_double(r.volume_to) << '\n';
    }
    if (!out) throw Error(ErrorKind::IoError, "failed writing " + path);
}

std::pair<OhlcvSeries, OhlcvSeries> split(const OhlcvSeries& series, const SplitSpec& spec) {
    if (series.empty()) throw Error(ErrorKind::EmptySeries, "cannot split an empty series");
    const Date first = series.rows.front().date;
    const Date last = series.rows.back().date;
    if (spec.boundary_date < first || !(spec.boundary_date < last)) {
        throw Error(ErrorKind::BoundaryOutOfRange,
                    "boundary " + spec.boundary_date.iso() + " outside (" + first.iso() + ", " +
                        last.iso() + ")");
    }

    OhlcvSeries train;
    OhlcvSeries test;
    for (const auto& r : series.rows) {
        if (r.date < spec.boundary_date || r.date == spec.boundary_date) {
            train.rows.push_back(r);
        } else {
            test.rows.push_back(r);
        }
    }
    return {std::move(train), std::move(test)};
}

namespace {

ColumnStats column_stats(const std::vector<double>& values) {
    ColumnStats st;
    st.min = std::numeric_limits<double>::infinity();
    st.max = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (double v : values) {
        st.min = std::min(st.min, v);
        st.max = std::max(st.max, v);
        sum += v;
    }
    const auto n = static_cast<double>(values.size());
    st.mean = sum / n;
    double ss = 0.0;
    for (double v : values) {
        const double d = v - st.mean;
        ss += d * d;
    }
    st.stddev = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    return st;
}

} // namespace

DescriptiveStats describe(const OhlcvSeries& series) {
    if (series.empty()) throw Error(ErrorKind::EmptySeries, "cannot describe an empty series");
    DescriptiveStats stats;
    stats.columns[0] = column_stats(series.opens());
    stats.columns[1] = column_stats(series.highs());
    stats.columns[2] = column_stats(series.lows());
    stats.columns[3] = column_stats(series.closes());
    stats.columns[4] = column_stats(series.volumes_from());
    stats.columns[5] = column_stats(series.volumes_to());
    return stats;
}

} // namespace stackcast
