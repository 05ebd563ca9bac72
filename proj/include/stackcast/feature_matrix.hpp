#pragma once

#include "stackcast/date.hpp"
#include "stackcast/market_data.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace stackcast {

enum class IndicatorKind {
    Sma,
    Ema,
    Wma,
    Atr,
    Ad,
    Cci,
    Roc,
    Mom,
    MacdLine,
    MacdSignal,
    MacdHist,
    BbMid,
    BbUp,
    BbDown,
    StochOsc,
    RollingMean,
    RollingMedian,
    Volatility,
};

struct IndicatorSpec {
    IndicatorKind kind = IndicatorKind::Sma;
    int window = 14;   // ignored by Ad and the Macd columns
    double band_k = 2.0; // Bollinger only
    int fast = 12;     // Macd only
    int slow = 26;
    int signal = 9;

    /// Column name in the assembled matrix: sma14, bb20_up, macd_line,
    /// mean_mw20, ... The name doubles as the config token.
    std::string column_name() const;
};

/// Inverse of IndicatorSpec::column_name for config files. Throws
/// Error(ConfigError) on unknown tokens.
IndicatorSpec parse_indicator_token(const std::string& token);

/// Dense per-day design matrix. Column-major so learners can walk single
/// features cheaply. Rows are days past every indicator's warm-up; values
/// are all finite by construction.
struct FeatureMatrix {
    std::vector<Date> dates;
    std::vector<std::string> column_names;
    std::vector<std::vector<double>> columns;
    std::vector<double> target;

    std::size_t rows() const noexcept { return dates.size(); }
    std::size_t cols() const noexcept { return columns.size(); }

    /// Index of a named column, or -1.
    long column_index(const std::string& name) const noexcept;

    std::vector<double> row(std::size_t i) const;

    /// Rows [0, split_row) and [split_row, rows()).
    std::pair<FeatureMatrix, FeatureMatrix> split_at(std::size_t split_row) const;
};

/// Assembles raw open/high/low/close/volume_from/volume_to columns plus one
/// column per spec. Rows containing any warm-up value are dropped. The
/// target is the closing price `horizon` days ahead (0 = same day); the
/// final `horizon` rows have no target and are dropped too. Distinct columns
/// are computed in parallel when jobs > 1, with identical output either way.
FeatureMatrix build_feature_matrix(const OhlcvSeries& series,
                                   const std::vector<IndicatorSpec>& specs, int horizon = 0,
                                   int jobs = 1);

/// New matrix holding the given rows, in the given order. Out-of-range
/// indices throw Error(BoundaryOutOfRange).
FeatureMatrix take_rows(const FeatureMatrix& m, const std::vector<std::size_t>& rows);

/// New matrix with the named columns removed (use to exclude raw columns
/// such as same-day close). Unknown names throw Error(ConfigError).
FeatureMatrix drop_columns(const FeatureMatrix& m, const std::vector<std::string>& names);

/// New matrix containing exactly the named columns in the given order.
/// Unknown names throw Error(ColumnMismatch).
FeatureMatrix select_columns(const FeatureMatrix& m, const std::vector<std::string>& names);

/// CSV round-trip: header `date,<feature...>,target`, shortest round-trip
/// number formatting.
void save_feature_csv(const FeatureMatrix& m, const std::string& path);
FeatureMatrix load_feature_csv(const std::string& path);

/// Compact binary cache of an assembled matrix.
void save_feature_cache(const FeatureMatrix& m, const std::string& path);
FeatureMatrix load_feature_cache(const std::string& path);

/// Content hash of (series values, spec tokens, horizon); names the cache
/// file so a stale cache can never be confused with the current inputs.
std::uint64_t feature_cache_key(const OhlcvSeries& series,
                                const std::vector<IndicatorSpec>& specs, int horizon);

} // namespace stackcast
