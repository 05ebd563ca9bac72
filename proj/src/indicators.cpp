#include "stackcast/indicators.hpp"

#include "stackcast/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace stackcast {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_window(int w) {
    if (w < 1) throw Error(ErrorKind::ConfigError, "window must be >= 1, got " + std::to_string(w));
}

void check_length(std::size_t n, std::size_t needed, const char* name) {
    if (n < needed) {
        throw Error(ErrorKind::WindowTooLarge, std::string(name) + " needs " +
                                                   std::to_string(needed) + " points, got " +
                                                   std::to_string(n));
    }
}

void check_aligned(std::initializer_list<std::size_t> sizes) {
    auto it = sizes.begin();
    const std::size_t first = *it++;
    for (; it != sizes.end(); ++it) {
        if (*it != first) {
            throw Error(ErrorKind::LengthMismatch, "input sequences have different lengths");
        }
    }
}

/// EMA over values[first..], seeded by the mean of the first w entries.
/// Output aligned with `values`; defined from index first + w - 1.
std::vector<double> ema_from(const std::vector<double>& values, std::size_t first, int w) {
    const std::size_t n = values.size();
    std::vector<double> out(n, kNaN);
    const auto uw = static_cast<std::size_t>(w);
    double seed = 0.0;
    for (std::size_t i = 0; i < uw; ++i) seed += values[first + i];
    seed /= w;
    const std::size_t start = first + uw - 1;
    out[start] = seed;
    const double alpha = 2.0 / (w + 1.0);
    for (std::size_t i = start + 1; i < n; ++i) {
        out[i] = alpha * values[i] + (1.0 - alpha) * out[i - 1];
    }
    return out;
}

} // namespace

std::vector<double> sma(const std::vector<double>& close, int w) {
    check_window(w);
    const std::size_t n = close.size();
    const auto uw = static_cast<std::size_t>(w);
    check_length(n, uw, "sma");
    std::vector<double> out(n, kNaN);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sum += close[i];
        if (i >= uw) sum -= close[i - uw];
        if (i + 1 >= uw) out[i] = sum / w;
    }
    return out;
}

std::vector<double> ema(const std::vector<double>& close, int w) {
    check_window(w);
    check_length(close.size(), static_cast<std::size_t>(w), "ema");
    return ema_from(close, 0, w);
}

std::vector<double> wma(const std::vector<double>& close, int w) {
    check_window(w);
    const std::size_t n = close.size();
    const auto uw = static_cast<std::size_t>(w);
    check_length(n, uw, "wma");
    std::vector<double> out(n, kNaN);
    const double denom = 0.5 * w * (w + 1.0);

    // weighted: w*c[i] + (w-1)*c[i-1] + ... + 1*c[i-w+1]
    // slide: weighted' = weighted - plain + w*c[i+1], plain' = plain + c[i+1] - c[i-w+1]
    double plain = 0.0;
    double weighted = 0.0;
    for (std::size_t i = 0; i < uw; ++i) {
        plain += close[i];
        weighted += (static_cast<double>(i) + 1.0) * close[i];
    }
    out[uw - 1] = weighted / denom;
    for (std::size_t i = uw; i < n; ++i) {
        weighted -= plain;
        weighted += w * close[i];
        plain += close[i] - close[i - uw];
        out[i] = weighted / denom;
    }
    return out;
}

std::vector<double> atr(const std::vector<double>& high, const std::vector<double>& low,
                        const std::vector<double>& close, int w) {
    check_window(w);
    check_aligned({high.size(), low.size(), close.size()});
    const std::size_t n = close.size();
    check_length(n, static_cast<std::size_t>(w) + 1, "atr");

    std::vector<double> tr(n, kNaN);
    for (std::size_t i = 1; i < n; ++i) {
        tr[i] = std::max({high[i] - low[i], std::abs(high[i] - close[i - 1]),
                          std::abs(low[i] - close[i - 1])});
    }
    return ema_from(tr, 1, w);
}

std::vector<double> ad_line(const std::vector<double>& high, const std::vector<double>& low,
                            const std::vector<double>& close, const std::vector<double>& volume) {
    check_aligned({high.size(), low.size(), close.size(), volume.size()});
    const std::size_t n = close.size();
    check_length(n, 1, "ad_line");
    std::vector<double> out(n, kNaN);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double range = high[i] - low[i];
        if (range != 0.0) {
            acc += ((close[i] - low[i]) - (high[i] - close[i])) / range * volume[i];
        }
        out[i] = acc;
    }
    return out;
}

std::vector<double> cci(const std::vector<double>& high, const std::vector<double>& low,
                        const std::vector<double>& close, int w) {
    check_window(w);
    check_aligned({high.size(), low.size(), close.size()});
    const std::size_t n = close.size();
    const auto uw = static_cast<std::size_t>(w);
    check_length(n, uw, "cci");

    std::vector<double> tp(n);
    for (std::size_t i = 0; i < n; ++i) tp[i] = high[i] + low[i] + close[i];

    std::vector<double> out(n, kNaN);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sum += tp[i];
        if (i >= uw) sum -= tp[i - uw];
        if (i + 1 < uw) continue;
        const double mean = sum / w;
        double mad = 0.0;
        for (std::size_t j = i + 1 - uw; j <= i; ++j) mad += std::abs(tp[j] - mean);
        mad /= w;
        out[i] = mad == 0.0 ? 0.0 : (tp[i] - mean) / (0.015 * mad);
    }
    return out;
}

std::vector<double> roc(const std::vector<double>& close, int w) {
    check_window(w);
    const std::size_t n = close.size();
    const auto uw = static_cast<std::size_t>(w);
    check_length(n, uw + 1, "roc");
    std::vector<double> out(n, kNaN);
    for (std::size_t i = uw; i < n; ++i) out[i] = (close[i] - close[i - uw]) / close[i - uw];
    return out;
}

std::vector<double> mom(const std::vector<double>& close, int w) {
    check_window(w);
    const std::size_t n = close.size();
    const auto uw = static_cast<std::size_t>(w);
    check_length(n, uw + 1, "mom");
    std::vector<double> out(n, kNaN);
    for (std::size_t i = uw; i < n; ++i) out[i] = close[i] - close[i - uw];
    return out;
}

MacdResult macd(const std::vector<double>& close, int fast, int slow, int signal_w) {
    check_window(fast);
    check_window(signal_w);
    if (fast >= slow) {
        throw Error(ErrorKind::ConfigError, "macd fast period must be below the slow period");
    }
    const std::size_t n = close.size();
    const auto uslow = static_cast<std::size_t>(slow);
    const auto usig = static_cast<std::size_t>(signal_w);
    check_length(n, uslow + usig - 1, "macd");

    const auto ema_fast = ema_from(close, 0, fast);
    const auto ema_slow = ema_from(close, 0, slow);

    MacdResult r;
    r.line.assign(n, kNaN);
    for (std::size_t i = uslow - 1; i < n; ++i) r.line[i] = ema_fast[i] - ema_slow[i];
    r.signal = ema_from(r.line, uslow - 1, signal_w);
    r.histogram.assign(n, kNaN);
    for (std::size_t i = uslow + usig - 2; i < n; ++i) r.histogram[i] = r.line[i] - r.signal[i];
    return r;
}

BollingerResult bollinger(const std::vector<double>& close, int w, double k) {
    check_window(w);
    const std::size_t n = close.size();
    const auto uw = static_cast<std::size_t>(w);
    check_length(n, uw, "bollinger");

    BollingerResult r;
    r.mid.assign(n, kNaN);
    r.up.assign(n, kNaN);
    r.down.assign(n, kNaN);

    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sum += close[i];
        if (i >= uw) sum -= close[i - uw];
        if (i + 1 < uw) continue;
        const double mean = sum / w;
        double ss = 0.0;
        for (std::size_t j = i + 1 - uw; j <= i; ++j) {
            const double d = close[j] - mean;
            ss += d * d;
        }
        const double dev = std::sqrt(std::max(ss / w, 0.0));
        r.mid[i] = mean;
        r.up[i] = mean + k * dev;
        r.down[i] = mean - k * dev;
    }
    return r;
}

std::vector<double> stoch_osc(const std::vector<double>& high, const std::vector<double>& low,
                              const std::vector<double>& close, int w) {
    check_window(w);
    check_aligned({high.size(), low.size(), close.size()});
    const std::size_t n = close.size();
    const auto uw = static_cast<std::size_t>(w);
    check_length(n, uw, "stoch_osc");

    std::vector<double> out(n, kNaN);
    std::deque<std::size_t> max_idx; // indices of highs, values decreasing
    std::deque<std::size_t> min_idx; // indices of lows, values increasing
    for (std::size_t i = 0; i < n; ++i) {
        while (!max_idx.empty() && high[max_idx.back()] <= high[i]) max_idx.pop_back();
        max_idx.push_back(i);
        while (!min_idx.empty() && low[min_idx.back()] >= low[i]) min_idx.pop_back();
        min_idx.push_back(i);
        if (i + 1 < uw) continue;
        const std::size_t lo_bound = i + 1 - uw;
        while (max_idx.front() < lo_bound) max_idx.pop_front();
        while (min_idx.front() < lo_bound) min_idx.pop_front();
        const double hh = high[max_idx.front()];
        const double ll = low[min_idx.front()];
        out[i] = hh == ll ? 0.5 : (close[i] - ll) / (hh - ll);
    }
    return out;
}

std::vector<double> rolling_mean(const std::vector<double>& close, int w) { return sma(close, w); }

std::vector<double> rolling_median(const std::vector<double>& close, int w) {
    check_window(w);
    const std::size_t n = close.size();
    const auto uw = static_cast<std::size_t>(w);
    check_length(n, uw, "rolling_median");

    std::vector<double> out(n, kNaN);
    std::vector<double> window; // kept sorted
    window.reserve(uw);
    for (std::size_t i = 0; i < n; ++i) {
        window.insert(std::lower_bound(window.begin(), window.end(), close[i]), close[i]);
        if (i >= uw) {
            window.erase(std::lower_bound(window.begin(), window.end(), close[i - uw]));
        }
        if (i + 1 < uw) continue;
        out[i] = uw % 2 == 1 ? window[uw / 2] : 0.5 * (window[uw / 2 - 1] + window[uw / 2]);
    }
    return out;
}

std::vector<double> rolling_volatility(const std::vector<double>& close, int w) {
    check_window(w);
    const std::size_t n = close.size();
    const auto uw = static_cast<std::size_t>(w);
    check_length(n, uw + 1, "rolling_volatility");

    std::vector<double> ret(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) ret[i] = std::log(close[i] / close[i - 1]);

    std::vector<double> out(n, kNaN);
    double sum = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        sum += ret[i];
        if (i > uw) sum -= ret[i - uw];
        if (i < uw) continue;
        const double mean = sum / w;
        double ss = 0.0;
        for (std::size_t j = i + 1 - uw; j <= i; ++j) {
            const double d = ret[j] - mean;
            ss += d * d;
        }
        out[i] = std::sqrt(std::max(ss / w, 0.0));
    }
    return out;
}

std::vector<double> rolling_stat(const std::vector<double>& close, int w, RollingStat stat) {
    switch (stat) {
        case RollingStat::Mean: return rolling_mean(close, w);
        case RollingStat::Median: return rolling_median(close, w);
        case RollingStat::LogReturnStdDev: return rolling_volatility(close, w);
    }
    throw Error(ErrorKind::ConfigError, "unknown rolling stat");
}

} // namespace stackcast
