#include "stackcast/evaluation.hpp"

#include "stackcast/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace stackcast {

MetricsReport compute_metrics(const std::vector<double>& actual,
                              const std::vector<double>& forecast,
                              const std::string& model_name, const std::string& slice) {
    if (actual.size() != forecast.size()) {
        throw Error(ErrorKind::LengthMismatch,
                    "actual has " + std::to_string(actual.size()) + " points, forecast " +
                        std::to_string(forecast.size()));
    }
    if (actual.empty()) throw Error(ErrorKind::EmptySeries, "nothing to evaluate");
    for (double v : actual) {
        if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteInput, "non-finite actual value");
    }
    for (double v : forecast) {
        if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteInput, "non-finite forecast value");
    }

    const auto n = static_cast<double>(actual.size());
    double abs_sum = 0.0;
    double sq_sum = 0.0;
    double pct_sum = 0.0;
    double actual_sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double e = actual[i] - forecast[i];
        abs_sum += std::abs(e);
        sq_sum += e * e;
        actual_sum += actual[i];
        if (actual[i] == 0.0) {
            throw Error(ErrorKind::ZeroActualForMape, "actual value of 0 at index " +
                                                          std::to_string(i));
        }
        pct_sum += std::abs(e / actual[i]);
    }
    const double mean = actual_sum / n;
    double sst = 0.0;
    for (double v : actual) {
        const double d = v - mean;
        sst += d * d;
    }
    if (sst == 0.0) {
        throw Error(ErrorKind::ConstantActualForR2, "actuals are constant; R^2 is undefined");
    }

    MetricsReport r;
    r.model_name = model_name;
    r.slice = slice;
    r.mae = abs_sum / n;
    r.rmse = std::sqrt(sq_sum / n);
    r.mape = 100.0 * pct_sum / n;
    r.r_squared = 1.0 - sq_sum / sst;
    return r;
}

ErrorSeries error_series(const std::vector<double>& actual, const std::vector<double>& forecast,
                         const std::vector<Date>& dates) {
    if (actual.size() != forecast.size() || actual.size() != dates.size()) {
        throw Error(ErrorKind::LengthMismatch, "actual, forecast, and dates differ in length");
    }
    ErrorSeries s;
    s.dates = dates;
    s.residuals.resize(actual.size());
    for (std::size_t i = 0; i < actual.size(); ++i) s.residuals[i] = actual[i] - forecast[i];
    return s;
}

namespace {

std::string fmt_metric(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

} // namespace

std::string comparison_table(const std::vector<MetricsReport>& reports) {
    std::vector<std::string> models;
    std::vector<std::string> slices;
    for (const auto& r : reports) {
        if (std::find(models.begin(), models.end(), r.model_name) == models.end()) {
            models.push_back(r.model_name);
        }
        if (std::find(slices.begin(), slices.end(), r.slice) == slices.end()) {
            slices.push_back(r.slice);
        }
    }
    const char* metric_names[] = {"MAPE%", "RMSE", "MAE", "R2"};
    auto metric_of = [](const MetricsReport& r, int k) {
        switch (k) {
            case 0: return r.mape;
            case 1: return r.rmse;
            case 2: return r.mae;
            default: return r.r_squared;
        }
    };

    std::map<std::pair<std::string, std::string>, const MetricsReport*> by_key;
    for (const auto& r : reports) by_key[{r.model_name, r.slice}] = &r;

    // best value per (slice, metric) column
    std::map<std::pair<std::string, int>, double> best;
    for (const auto& slice : slices) {
        for (int k = 0; k < 4; ++k) {
            bool have = false;
            double b = 0.0;
            for (const auto& model : models) {
                auto it = by_key.find({model, slice});
                if (it == by_key.end()) continue;
                const double v = metric_of(*it->second, k);
                const bool better = k == 3 ? v > b : v < b;
                if (!have || better) {
                    b = v;
                    have = true;
                }
            }
            if (have) best[{slice, k}] = b;
        }
    }

    std::ostringstream out;
    out << "| model |";
    for (const auto& slice : slices) {
        for (const auto* name : metric_names) out << ' ' << slice << ' ' << name << " |";
    }
    out << '\n' << "|---|";
    for (std::size_t i = 0; i < slices.size() * 4; ++i) out << "---|";
    out << '\n';
    for (const auto& model : models) {
        out << "| " << model << " |";
        for (const auto& slice : slices) {
            auto it = by_key.find({model, slice});
            for (int k = 0; k < 4; ++k) {
                if (it == by_key.end()) {
                    out << " - |";
                    continue;
                }
                const double v = metric_of(*it->second, k);
                const bool is_best = best.count({slice, k}) != 0 && v == best[{slice, k}];
                out << ' ' << (is_best ? "**" + fmt_metric(v) + "**" : fmt_metric(v)) << " |";
            }
        }
        out << '\n';
    }
    return out.str();
}

void save_metrics_json(const std::vector<MetricsReport>& reports, const std::string& path) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : reports) {
        arr.push_back({{"model", r.model_name},
                       {"slice", r.slice},
                       {"mape_pct", r.mape},
                       {"rmse", r.rmse},
                       {"mae", r.mae},
                       {"r_squared", r.r_squared}});
    }
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
    out << arr.dump(2) << '\n';
}

std::vector<MetricsReport> load_metrics_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
    nlohmann::json arr;
    try {
        in >> arr;
        std::vector<MetricsReport> reports;
        for (const auto& j : arr) {
            MetricsReport r;
            r.model_name = j.at("model").get<std::string>();
            r.slice = j.at("slice").get<std::string>();
            r.mape = j.at("mape_pct").get<double>();
            r.rmse = j.at("rmse").get<double>();
            r.mae = j.at("mae").get<double>();
            r.r_squared = j.at("r_squared").get<double>();
            reports.push_back(r);
        }
        return reports;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::IoError, path + " is not a valid metrics file: " + e.what());
    }
}

void save_error_series_csv(const ErrorSeries& series, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
    out << "date,residual\n";
    char buf[64];
    for (std::size_t i = 0; i < series.dates.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.10g", series.residuals[i]);
        out << series.dates[i].iso() << ',' << buf << '\n';
    }
}

void save_comparison_md(const std::vector<MetricsReport>& reports, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
    out << comparison_table(reports);
}

} // namespace stackcast
