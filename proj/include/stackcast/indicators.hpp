#pragma once

#include <string>
#include <vector>

namespace stackcast {

/// All indicator functions return a vector aligned with the input: entries
/// before the warm-up point are quiet NaN, entries from the warm-up point on
/// are defined. Callers that need a dense matrix drop the NaN rows.
///
/// Window-local indicators (sma, wma, cci, roc, mom, bollinger, stoch_osc,
/// rolling_* ) are shift equivariant. ema, atr, macd carry recursive state
/// seeded at the start of the series, and ad_line is cumulative, so their
/// values depend on where the series begins.

std::vector<double> sma(const std::vector<double>& close, int w);

/// Recursive EMA with smoothing 2/(w+1), seeded by the mean of the first w
/// points.
std::vector<double> ema(const std::vector<double>& close, int w);

/// Linear weights w, w-1, ..., 1 over most-recent-first values.
std::vector<double> wma(const std::vector<double>& close, int w);

/// EMA of the true range max(H-L, |H-C_prev|, |L-C_prev|). Needs w+1 points.
std::vector<double> atr(const std::vector<double>& high, const std::vector<double>& low,
                        const std::vector<double>& close, int w);

/// Accumulation/distribution line: running sum of ((C-L)-(H-C))/(H-L) * V.
/// Days with H == L contribute nothing.
std::vector<double> ad_line(const std::vector<double>& high, const std::vector<double>& low,
                            const std::vector<double>& close, const std::vector<double>& volume);

/// Commodity channel index over the H+L+C sum, scaled by 0.015 times the
/// window's mean absolute deviation. Windows with zero deviation yield 0.
std::vector<double> cci(const std::vector<double>& high, const std::vector<double>& low,
                        const std::vector<double>& close, int w);

std::vector<double> roc(const std::vector<double>& close, int w);

std::vector<double> mom(const std::vector<double>& close, int w);

struct MacdResult {
    std::vector<double> line;
    std::vector<double> signal;
    std::vector<double> histogram;
};

MacdResult macd(const std::vector<double>& close, int fast = 12, int slow = 26,
                int signal_w = 9);

struct BollingerResult {
    std::vector<double> mid;
    std::vector<double> up;
    std::vector<double> down;
};

/// mid = SMA_w, bands at +- k rolling standard deviations (population
/// denominator).
BollingerResult bollinger(const std::vector<double>& close, int w, double k = 2.0);

/// (C - LL_w) / (HH_w - LL_w) with LL/HH the rolling low/high extremes.
/// Flat windows (HH == LL) yield 0.5.
std::vector<double> stoch_osc(const std::vector<double>& high, const std::vector<double>& low,
                              const std::vector<double>& close, int w);

enum class RollingStat { Mean, Median, LogReturnStdDev };

/// Mean / median of the raw values, or standard deviation (population
/// denominator) of one-day log returns.
std::vector<double> rolling_stat(const std::vector<double>& close, int w, RollingStat stat);

std::vector<double> rolling_mean(const std::vector<double>& close, int w);
std::vector<double> rolling_median(const std::vector<double>& close, int w);
std::vector<double> rolling_volatility(const std::vector<double>& close, int w);

} // namespace stackcast
