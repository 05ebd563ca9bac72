#include "stackcast/preprocess.hpp"

#include "stackcast/errors.hpp"
#include "stackcast/log.hpp"
#include "stackcast/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>

namespace stackcast {

namespace {

void check_columns(const ScalerState& state, const FeatureMatrix& m) {
    if (state.column_names != m.column_names) {
        throw Error(ErrorKind::ColumnMismatch,
                    "matrix columns do not match the fitted scaler");
    }
}

double scale_one(double v, double lo, double hi) {
    const double range = hi - lo;
    return range == 0.0 ? 0.0 : (v - lo) / range;
}

double unscale_one(double v, double lo, double hi) { return v * (hi - lo) + lo; }

} // namespace

ScalerState fit_scaler(const FeatureMatrix& train, bool scale_target) {
    if (train.rows() == 0 || train.cols() == 0) {
        throw Error(ErrorKind::EmptyMatrix, "cannot fit a scaler on an empty matrix");
    }
    ScalerState state;
    state.column_names = train.column_names;
    state.scale_target = scale_target;
    state.col_min.resize(train.cols());
    state.col_max.resize(train.cols());
    for (std::size_t j = 0; j < train.cols(); ++j) {
        const auto [lo, hi] = std::minmax_element(train.columns[j].begin(), train.columns[j].end());
        state.col_min[j] = *lo;
        state.col_max[j] = *hi;
        if (*lo == *hi) {
            log_warn("preprocess", "column '" + train.column_names[j] +
                                       "' is constant; it will normalize to 0");
        }
    }
    if (scale_target) {
        const auto [lo, hi] = std::minmax_element(train.target.begin(), train.target.end());
        state.target_min = *lo;
        state.target_max = *hi;
        if (*lo == *hi) {
            log_warn("preprocess", "target is constant; it will normalize to 0");
        }
    }
    return state;
}

FeatureMatrix transform(const ScalerState& state, const FeatureMatrix& m) {
    check_columns(state, m);
    FeatureMatrix out = m;
    for (std::size_t j = 0; j < m.cols(); ++j) {
        for (auto& v : out.columns[j]) v = scale_one(v, state.col_min[j], state.col_max[j]);
    }
    if (state.scale_target) out.target = transform_target(state, m.target);
    return out;
}

FeatureMatrix inverse_transform(const ScalerState& state, const FeatureMatrix& m) {
    check_columns(state, m);
    FeatureMatrix out = m;
    for (std::size_t j = 0; j < m.cols(); ++j) {
        for (auto& v : out.columns[j]) v = unscale_one(v, state.col_min[j], state.col_max[j]);
    }
    if (state.scale_target) out.target = inverse_transform_target(state, m.target);
    return out;
}

std::vector<double> transform_target(const ScalerState& state, const std::vector<double>& y) {
    if (!state.scale_target) return y;
    std::vector<double> out = y;
    for (auto& v : out) v = scale_one(v, state.target_min, state.target_max);
    return out;
}

std::vector<double> inverse_transform_target(const ScalerState& state,
                                             const std::vector<double>& y) {
    if (!state.scale_target) return y;
    std::vector<double> out = y;
    for (auto& v : out) v = unscale_one(v, state.target_min, state.target_max);
    return out;
}

void save_scaler_json(const ScalerState& state, const std::string& path) {
    nlohmann::json j;
    j["format"] = "minmax-scaler";
    j["version"] = 1;
    j["columns"] = state.column_names;
    j["min"] = state.col_min;
    j["max"] = state.col_max;
    j["scale_target"] = state.scale_target;
    j["target_min"] = state.target_min;
    j["target_max"] = state.target_max;
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
    out << j.dump(2) << '\n';
}

ScalerState load_scaler_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
        ScalerState state;
        state.column_names = j.at("columns").get<std::vector<std::string>>();
        state.col_min = j.at("min").get<std::vector<double>>();
        state.col_max = j.at("max").get<std::vector<double>>();
        state.scale_target = j.at("scale_target").get<bool>();
        state.target_min = j.at("target_min").get<double>();
        state.target_max = j.at("target_max").get<double>();
        if (state.col_min.size() != state.column_names.size() ||
            state.col_max.size() != state.column_names.size()) {
            throw Error(ErrorKind::IoError, path + " has inconsistent column counts");
        }
        return state;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::IoError, path + " is not a valid scaler file: " + e.what());
    }
}

} // namespace stackcast
