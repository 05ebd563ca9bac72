#pragma once

#include "stackcast/date.hpp"

#include <string>
#include <vector>

namespace stackcast {

struct MetricsReport {
    std::string model_name;
    std::string slice; // "train" or "test"
    double mape = 0.0; // percent
    double rmse = 0.0;
    double mae = 0.0;
    double r_squared = 0.0;
};

struct ErrorSeries {
    std::vector<Date> dates;
    std::vector<double> residuals; // actual - forecast; positive = under-forecast
};

/// MAPE (percent), RMSE, MAE, and R^2 against the mean of `actual` itself.
/// Rejects mismatched lengths outright rather than truncating, zero actuals
/// (MAPE undefined), and constant actuals (R^2 undefined).
MetricsReport compute_metrics(const std::vector<double>& actual,
                              const std::vector<double>& forecast,
                              const std::string& model_name = "", const std::string& slice = "");

ErrorSeries error_series(const std::vector<double>& actual, const std::vector<double>& forecast,
                         const std::vector<Date>& dates);

/// Markdown table: one row per model, metric x slice column groups, best
/// value per column bolded (lowest wins except R^2).
std::string comparison_table(const std::vector<MetricsReport>& reports);

void save_metrics_json(const std::vector<MetricsReport>& reports, const std::string& path);
std::vector<MetricsReport> load_metrics_json(const std::string& path);
void save_error_series_csv(const ErrorSeries& series, const std::string& path);
void save_comparison_md(const std::vector<MetricsReport>& reports, const std::string& path);

} // namespace stackcast
