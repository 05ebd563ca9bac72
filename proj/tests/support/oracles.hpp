#pragma once

// Brute-force reference implementations used only by tests. Each one
// recomputes every output element from scratch (O(n*w) or worse, long double
// accumulation) with none of the rolling-state shortcuts the library uses,
// so agreement is meaningful.

#include <cstddef>
#include <vector>

namespace oracle {

std::vector<double> sma(const std::vector<double>& x, int w);
std::vector<double> ema(const std::vector<double>& x, int w);
std::vector<double> wma(const std::vector<double>& x, int w);
std::vector<double> atr(const std::vector<double>& h, const std::vector<double>& l,
                        const std::vector<double>& c, int w);
std::vector<double> ad_line(const std::vector<double>& h, const std::vector<double>& l,
                            const std::vector<double>& c, const std::vector<double>& v);
std::vector<double> cci(const std::vector<double>& h, const std::vector<double>& l,
                        const std::vector<double>& c, int w);
std::vector<double> roc(const std::vector<double>& x, int w);
std::vector<double> mom(const std::vector<double>& x, int w);
struct Macd {
    std::vector<double> line, signal, histogram;
};
Macd macd(const std::vector<double>& x, int fast, int slow, int signal_w);
struct Bollinger {
    std::vector<double> mid, up, down;
};
Bollinger bollinger(const std::vector<double>& x, int w, double k);
std::vector<double> stoch_osc(const std::vector<double>& h, const std::vector<double>& l,
                              const std::vector<double>& c, int w);
std::vector<double> rolling_mean(const std::vector<double>& x, int w);
std::vector<double> rolling_median(const std::vector<double>& x, int w);
std::vector<double> rolling_volatility(const std::vector<double>& x, int w);

/// Solves A x = b by Gaussian elimination with partial pivoting. Used to
/// evaluate closed-form least-squares and ridge solutions.
std::vector<double> solve_linear(std::vector<std::vector<double>> a, std::vector<double> b);

/// Ordinary least squares with intercept: returns {intercept, coef...}.
std::vector<double> ols(const std::vector<std::vector<double>>& columns,
                        const std::vector<double>& y);

/// Ridge on standardized predictors with unpenalized intercept, matching the
/// elastic-net objective at l1 weight 0: (1/2N)*SSE + lambda/2 * |coef|^2 on
/// the standardized scale. Returns coefficients on the original scale,
/// {intercept, coef...}.
std::vector<double> ridge_standardized(const std::vector<std::vector<double>>& columns,
                                       const std::vector<double>& y, double lambda);

/// Scalar soft-threshold S(z, t) = sign(z) * max(|z| - t, 0).
double soft_threshold(double z, double t);

/// Brute-force epsilon-insensitive SVR primal objective for a linear model
/// in one feature: 0.5*w^2 + C * sum max(0, |y - (w x + b)| - eps).
double svr_primal_1d(const std::vector<double>& x, const std::vector<double>& y, double w,
                     double b, double c_penalty, double eps);

/// Minimizes svr_primal_1d over (w, b) by iterated grid refinement.
/// Returns {w, b, objective}.
struct SvrSolution {
    double w, b, objective;
};
SvrSolution svr_minimize_1d(const std::vector<double>& x, const std::vector<double>& y,
                            double c_penalty, double eps);

} // namespace oracle
