#include "stackcast/feature_matrix.hpp"

#include "stackcast/errors.hpp"
#include "stackcast/indicators.hpp"
#include "stackcast/parallel.hpp"
#include "stackcast/text.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

namespace stackcast {

std::string IndicatorSpec::column_name() const {
    const std::string w = std::to_string(window);
    switch (kind) {
        case IndicatorKind::Sma: return "sma" + w;
        case IndicatorKind::Ema: return "ema" + w;
        case IndicatorKind::Wma: return "wma" + w;
        case IndicatorKind::Atr: return "atr" + w;
        case IndicatorKind::Ad: return "ad";
        case IndicatorKind::Cci: return "cci" + w;
        case IndicatorKind::Roc: return "roc" + w;
        case IndicatorKind::Mom: return "mom" + w;
        case IndicatorKind::MacdLine: return "macd_line";
        case IndicatorKind::MacdSignal: return "macd_signal";
        case IndicatorKind::MacdHist: return "macd_hist";
        case IndicatorKind::BbMid: return "bb" + w + "_mid";
        case IndicatorKind::BbUp: return "bb" + w + "_up";
        case IndicatorKind::BbDown: return "bb" + w + "_down";
        case IndicatorKind::StochOsc: return "stoch" + w;
        case IndicatorKind::RollingMean: return "mean_mw" + w;
        case IndicatorKind::RollingMedian: return "median_mw" + w;
        case IndicatorKind::Volatility: return "volatility" + w;
    }
    throw Error(ErrorKind::ConfigError, "unknown indicator kind");
}

IndicatorSpec parse_indicator_token(const std::string& token) {
    IndicatorSpec spec;
    if (token == "ad") {
        spec.kind = IndicatorKind::Ad;
        return spec;
    }
    if (token == "macd_line" || token == "macd_signal" || token == "macd_hist") {
        spec.kind = token == "macd_line" ? IndicatorKind::MacdLine
                    : token == "macd_signal" ? IndicatorKind::MacdSignal
                                             : IndicatorKind::MacdHist;
        return spec;
    }

    auto split_window = [&](const std::string& prefix, const std::string& suffix,
                            IndicatorKind kind) -> bool {
        if (token.size() <= prefix.size() + suffix.size()) return false;
        if (token.compare(0, prefix.size(), prefix) != 0) return false;
        if (!suffix.empty() &&
            token.compare(token.size() - suffix.size(), suffix.size(), suffix) != 0) {
            return false;
        }
        const std::string digits =
            token.substr(prefix.size(), token.size() - prefix.size() - suffix.size());
        long w = 0;
        if (!try_parse_long(digits, w) || w < 1) return false;
        spec.kind = kind;
        spec.window = static_cast<int>(w);
        return true;
    };

    // longest prefixes first so e.g. median_mw wins over mom
    if (split_window("volatility", "", IndicatorKind::Volatility)) return spec;
    if (split_window("median_mw", "", IndicatorKind::RollingMedian)) return spec;
    if (split_window("mean_mw", "", IndicatorKind::RollingMean)) return spec;
    if (split_window("stoch", "", IndicatorKind::StochOsc)) return spec;
    if (split_window("sma", "", IndicatorKind::Sma)) return spec;
    if (split_window("ema", "", IndicatorKind::Ema)) return spec;
    if (split_window("wma", "", IndicatorKind::Wma)) return spec;
    if (split_window("atr", "", IndicatorKind::Atr)) return spec;
    if (split_window("cci", "", IndicatorKind::Cci)) return spec;
    if (split_window("roc", "", IndicatorKind::Roc)) return spec;
    if (split_window("mom", "", IndicatorKind::Mom)) return spec;
    if (split_window("bb", "_mid", IndicatorKind::BbMid)) return spec;
    if (split_window("bb", "_up", IndicatorKind::BbUp)) return spec;
    if (split_window("bb", "_down", IndicatorKind::BbDown)) return spec;

    throw Error(ErrorKind::ConfigError, "unknown indicator token '" + token + "'");
}

long FeatureMatrix::column_index(const std::string& name) const noexcept {
    for (std::size_t j = 0; j < column_names.size(); ++j) {
        if (column_names[j] == name) return static_cast<long>(j);
    }
    return -1;
}

std::vector<double> FeatureMatrix::row(std::size_t i) const {
    std::vector<double> out(cols());
    for (std::size_t j = 0; j < cols(); ++j) out[j] = columns[j][i];
    return out;
}

std::pair<FeatureMatrix, FeatureMatrix> FeatureMatrix::split_at(std::size_t split_row) const {
    if (split_row > rows()) {
        throw Error(ErrorKind::BoundaryOutOfRange, "split row past the end of the matrix");
    }
    FeatureMatrix head;
    FeatureMatrix tail;
    head.column_names = column_names;
    tail.column_names = column_names;
    head.dates.assign(dates.begin(), dates.begin() + static_cast<long>(split_row));
    tail.dates.assign(dates.begin() + static_cast<long>(split_row), dates.end());
    head.target.assign(target.begin(), target.begin() + static_cast<long>(split_row));
    tail.target.assign(target.begin() + static_cast<long>(split_row), target.end());
    head.columns.resize(cols());
    tail.columns.resize(cols());
    for (std::size_t j = 0; j < cols(); ++j) {
        head.columns[j].assign(columns[j].begin(), columns[j].begin() + static_cast<long>(split_row));
        tail.columns[j].assign(columns[j].begin() + static_cast<long>(split_row), columns[j].end());
    }
    return {std::move(head), std::move(tail)};
}

FeatureMatrix take_rows(const FeatureMatrix& m, const std::vector<std::size_t>& rows) {
    FeatureMatrix out;
    out.column_names = m.column_names;
    out.dates.reserve(rows.size());
    out.target.reserve(rows.size());
    out.columns.assign(m.cols(), {});
    for (auto& col : out.columns) col.reserve(rows.size());
    for (std::size_t i : rows) {
        if (i >= m.rows()) {
            throw Error(ErrorKind::BoundaryOutOfRange, "row index past the end of the matrix");
        }
        out.dates.push_back(m.dates[i]);
        out.target.push_back(m.target[i]);
        for (std::size_t j = 0; j < m.cols(); ++j) out.columns[j].push_back(m.columns[j][i]);
    }
    return out;
}

namespace {

std::vector<double> compute_column(const OhlcvSeries& series, const IndicatorSpec& spec) {
    const auto h = series.highs();
    const auto l = series.lows();
    const auto c = series.closes();
    switch (spec.kind) {
        case IndicatorKind::Sma: return sma(c, spec.window);
        case IndicatorKind::Ema: return ema(c, spec.window);
        case IndicatorKind::Wma: return wma(c, spec.window);
        case IndicatorKind::Atr: return atr(h, l, c, spec.window);
        case IndicatorKind::Ad: return ad_line(h, l, c, series.volumes_from());
        case IndicatorKind::Cci: return cci(h, l, c, spec.window);
        case IndicatorKind::Roc: return roc(c, spec.window);
        case IndicatorKind::Mom: return mom(c, spec.window);
        case IndicatorKind::MacdLine: return macd(c, spec.fast, spec.slow, spec.signal).line;
        case IndicatorKind::MacdSignal: return macd(c, spec.fast, spec.slow, spec.signal).signal;
        case IndicatorKind::MacdHist: return macd(c, spec.fast, spec.slow, spec.signal).histogram;
        case IndicatorKind::BbMid: return bollinger(c, spec.window, spec.band_k).mid;
        case IndicatorKind::BbUp: return bollinger(c, spec.window, spec.band_k).up;
        case IndicatorKind::BbDown: return bollinger(c, spec.window, spec.band_k).down;
        case IndicatorKind::StochOsc: return stoch_osc(h, l, c, spec.window);
        case IndicatorKind::RollingMean: return rolling_mean(c, spec.window);
        case IndicatorKind::RollingMedian: return rolling_median(c, spec.window);
        case IndicatorKind::Volatility: return rolling_volatility(c, spec.window);
    }
    throw Error(ErrorKind::ConfigError, "unknown indicator kind");
}

} // namespace

FeatureMatrix build_feature_matrix(const OhlcvSeries& series,
                                   const std::vector<IndicatorSpec>& specs, int horizon,
                                   int jobs) {
    if (series.empty()) throw Error(ErrorKind::EmptySeries, "no rows to build features from");
    if (horizon < 0) throw Error(ErrorKind::ConfigError, "horizon must be >= 0");
    const std::size_t n = series.size();

    std::vector<std::string> names = {"open", "high", "low", "close", "volume_from", "volume_to"};
    std::vector<std::vector<double>> raw = {series.opens(),        series.highs(),
                                            series.lows(),         series.closes(),
                                            series.volumes_from(), series.volumes_to()};

    std::vector<std::vector<double>> derived(specs.size());
    try {
        parallel_for_index(specs.size(), jobs,
                           [&](std::size_t j) { derived[j] = compute_column(series, specs[j]); });
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::WindowTooLarge) {
            throw Error(ErrorKind::SeriesTooShort,
                        std::string("series too short for requested indicators (") + e.what() + ")");
        }
        throw;
    }

    for (std::size_t j = 0; j < specs.size(); ++j) names.push_back(specs[j].column_name());
    std::set<std::string> seen;
    for (const auto& name : names) {
        if (!seen.insert(name).second) {
            throw Error(ErrorKind::DuplicateColumnName, "duplicate feature column '" + name + "'");
        }
    }

    std::vector<std::vector<double>> all = std::move(raw);
    for (auto& col : derived) all.push_back(std::move(col));

    // first row where every column is defined
    std::size_t first_usable = 0;
    for (const auto& col : all) {
        std::size_t fd = 0;
        while (fd < n && std::isnan(col[fd])) ++fd;
        first_usable = std::max(first_usable, fd);
    }
    const auto uhorizon = static_cast<std::size_t>(horizon);
    if (first_usable + uhorizon >= n) {
        throw Error(ErrorKind::SeriesTooShort,
                    "no usable rows after warm-up of " + std::to_string(first_usable) +
                        " and horizon " + std::to_string(horizon));
    }
    const std::size_t last_usable = n - 1 - uhorizon;

    const auto closes = series.closes();
    FeatureMatrix m;
    m.column_names = std::move(names);
    const std::size_t out_n = last_usable - first_usable + 1;
    m.dates.reserve(out_n);
    m.target.reserve(out_n);
    for (std::size_t i = first_usable; i <= last_usable; ++i) {
        m.dates.push_back(series.rows[i].date);
        m.target.push_back(closes[i + uhorizon]);
    }
    m.columns.resize(all.size());
    for (std::size_t j = 0; j < all.size(); ++j) {
        m.columns[j].assign(all[j].begin() + static_cast<long>(first_usable),
                            all[j].begin() + static_cast<long>(last_usable + 1));
        for (double v : m.columns[j]) {
            if (!std::isfinite(v)) {
                throw Error(ErrorKind::NonFiniteInput,
                            "column '" + m.column_names[j] + "' contains a non-finite value");
            }
        }
    }
    return m;
}

FeatureMatrix drop_columns(const FeatureMatrix& m, const std::vector<std::string>& names) {
    for (const auto& name : names) {
        if (m.column_index(name) < 0) {
            throw Error(ErrorKind::ConfigError, "cannot drop unknown column '" + name + "'");
        }
    }
    FeatureMatrix out;
    out.dates = m.dates;
    out.target = m.target;
    for (std::size_t j = 0; j < m.cols(); ++j) {
        if (std::find(names.begin(), names.end(), m.column_names[j]) != names.end()) continue;
        out.column_names.push_back(m.column_names[j]);
        out.columns.push_back(m.columns[j]);
    }
    return out;
}

FeatureMatrix select_columns(const FeatureMatrix& m, const std::vector<std::string>& names) {
    FeatureMatrix out;
    out.dates = m.dates;
    out.target = m.target;
    for (const auto& name : names) {
        const long j = m.column_index(name);
        if (j < 0) throw Error(ErrorKind::ColumnMismatch, "matrix has no column '" + name + "'");
        out.column_names.push_back(name);
        out.columns.push_back(m.columns[static_cast<std::size_t>(j)]);
    }
    return out;
}

void save_feature_csv(const FeatureMatrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
    out << "date";
    for (const auto& name : m.column_names) out << ',' << name;
    out << ",target\n";
    for (std::size_t i = 0; i < m.rows(); ++i) {
        out << m.dates[i].iso();
        for (std::size_t j = 0; j < m.cols(); ++j) out << ',' << format_double(m.columns[j][i]);
        out << ',' << format_double(m.target[i]) << '\n';
    }
    if (!out) throw Error(ErrorKind::IoError, "failed writing " + path);
}

FeatureMatrix load_feature_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
    std::string header;
    if (!std::getline(in, header)) throw Error(ErrorKind::EmptyFile, path + " is empty");
    const auto fields = split_csv_line(trim(header));
    if (fields.size() < 2 || fields.front() != "date" || fields.back() != "target") {
        throw Error(ErrorKind::MissingColumn, path + " must start with 'date' and end with 'target'");
    }

    FeatureMatrix m;
    m.column_names.assign(fields.begin() + 1, fields.end() - 1);
    m.columns.resize(m.column_names.size());

    std::string line;
    long row_number = 0;
    while (std::getline(in, line)) {
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        ++row_number;
        const auto cells = split_csv_line(stripped);
        if (cells.size() != fields.size()) {
            throw Error(ErrorKind::UnparseableRow,
                        "row " + std::to_string(row_number) + ": wrong field count", row_number);
        }
        Date date;
        if (!try_parse_iso_date(cells[0], date)) {
            throw Error(ErrorKind::UnparseableRow,
                        "row " + std::to_string(row_number) + ": bad date", row_number);
        }
        m.dates.push_back(date);
        for (std::size_t j = 0; j + 2 < cells.size(); ++j) {
            double v = 0.0;
            if (!try_parse_double(cells[j + 1], v)) {
                throw Error(ErrorKind::UnparseableRow,
                            "row " + std::to_string(row_number) + ": bad number", row_number);
            }
            m.columns[j].push_back(v);
        }
        double t = 0.0;
        if (!try_parse_double(cells.back(), t)) {
            throw Error(ErrorKind::UnparseableRow,
                        "row " + std::to_string(row_number) + ": bad target", row_number);
        }
        m.target.push_back(t);
    }
    if (m.dates.empty()) throw Error(ErrorKind::EmptyFile, path + " has no data rows");
    return m;
}

namespace {

constexpr char kCacheMagic[4] = {'S', 'C', 'F', 'M'};
constexpr std::uint32_t kCacheVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void read_pod(std::ifstream& in, T& value) {
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
}

void write_string(std::ofstream& out, const std::string& s) {
    write_pod(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<long>(s.size()));
}

std::string read_string(std::ifstream& in) {
    std::uint32_t len = 0;
    read_pod(in, len);
    std::string s(len, '\0');
    in.read(s.data(), static_cast<long>(len));
    return s;
}

} // namespace

void save_feature_cache(const FeatureMatrix& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
    out.write(kCacheMagic, 4);
    write_pod(out, kCacheVersion);
    write_pod(out, static_cast<std::uint64_t>(m.rows()));
    write_pod(out, static_cast<std::uint64_t>(m.cols()));
    for (const auto& name : m.column_names) write_string(out, name);
    for (const auto& d : m.dates) {
        write_pod(out, static_cast<std::int32_t>(d.year));
        write_pod(out, static_cast<std::int32_t>(d.month));
        write_pod(out, static_cast<std::int32_t>(d.day));
    }
    for (const auto& col : m.columns) {
        out.write(reinterpret_cast<const char*>(col.data()),
                  static_cast<long>(col.size() * sizeof(double)));
    }
    out.write(reinterpret_cast<const char*>(m.target.data()),
              static_cast<long>(m.target.size() * sizeof(double)));
    if (!out) throw Error(ErrorKind::IoError, "failed writing " + path);
}

FeatureMatrix load_feature_cache(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
    char magic[4] = {};
    in.read(magic, 4);
    std::uint32_t version = 0;
    read_pod(in, version);
    if (!in || std::memcmp(magic, kCacheMagic, 4) != 0 || version != kCacheVersion) {
        throw Error(ErrorKind::IoError, path + " is not a feature cache of the expected version");
    }
    std::uint64_t rows = 0;
    std::uint64_t cols = 0;
    read_pod(in, rows);
    read_pod(in, cols);

    FeatureMatrix m;
    for (std::uint64_t j = 0; j < cols; ++j) m.column_names.push_back(read_string(in));
    m.dates.resize(rows);
    for (auto& d : m.dates) {
        std::int32_t y = 0, mo = 0, da = 0;
        read_pod(in, y);
        read_pod(in, mo);
        read_pod(in, da);
        d = Date{y, mo, da};
    }
    m.columns.assign(cols, std::vector<double>(rows));
    for (auto& col : m.columns) {
        in.read(reinterpret_cast<char*>(col.data()), static_cast<long>(rows * sizeof(double)));
    }
    m.target.resize(rows);
    in.read(reinterpret_cast<char*>(m.target.data()), static_cast<long>(rows * sizeof(double)));
    if (!in) throw Error(ErrorKind::IoError, path + " is truncated");
    return m;
}

std::uint64_t feature_cache_key(const OhlcvSeries& series, const std::vector<IndicatorSpec>& specs,
                                int horizon) {
    Fnv1a hash;
    for (const auto& r : series.rows) {
        hash.update(static_cast<std::uint64_t>(r.date.serial()));
        hash.update(r.open);
        hash.update(r.high);
        hash.update(r.low);
        hash.update(r.close);
        hash.update(r.volume_from);
        hash.update(r.volume_to);
    }
    for (const auto& spec : specs) {
        hash.update(spec.column_name());
        hash.update(spec.band_k);
        hash.update(static_cast<std::uint64_t>(spec.fast));
        hash.update(static_cast<std::uint64_t>(spec.slow));
        hash.update(static_cast<std::uint64_t>(spec.signal));
    }
    hash.update(static_cast<std::uint64_t>(horizon));
    return hash.digest();
}

} // namespace stackcast
