#pragma once

#include "stackcast/feature_matrix.hpp"

#include <string>
#include <vector>

namespace stackcast {

/// Column-wise min-max ranges captured from a training slice. This is the
/// only object that crosses the train/test boundary, so test statistics can
/// never leak into scaling by construction.
struct ScalerState {
    std::vector<std::string> column_names;
    std::vector<double> col_min;
    std::vector<double> col_max;
    bool scale_target = true;
    double target_min = 0.0;
    double target_max = 0.0;
};

/// Records per-column minima and maxima of `train` (and of its target when
/// scale_target). Constant columns are flagged with a warning; they later
/// normalize to 0.
ScalerState fit_scaler(const FeatureMatrix& train, bool scale_target = true);

/// (x - min) / (max - min) per column. Values outside the fitted range map
/// outside [0,1] on purpose: clamping would break invertibility.
FeatureMatrix transform(const ScalerState& state, const FeatureMatrix& m);

/// Exact inverse of transform: x * (max - min) + min.
FeatureMatrix inverse_transform(const ScalerState& state, const FeatureMatrix& m);

std::vector<double> transform_target(const ScalerState& state, const std::vector<double>& y);
std::vector<double> inverse_transform_target(const ScalerState& state,
                                             const std::vector<double>& y);

/// JSON sidecar stored next to every trained model.
void save_scaler_json(const ScalerState& state, const std::string& path);
ScalerState load_scaler_json(const std::string& path);

} // namespace stackcast
