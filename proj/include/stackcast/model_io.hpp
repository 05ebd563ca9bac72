#pragma once

#include "stackcast/learner.hpp"
#include "stackcast/stacking.hpp"

#include <string>
#include <variant>
#include <vector>

namespace stackcast {

using Model = std::variant<ElasticNetModel, ForestModel, SvrModel, StackedModel>;

/// What load_model_json hands back: the model plus the scaler sidecar
/// reference recorded when it was saved (possibly empty).
struct LoadedModel {
    Model model;
    std::string scaler_ref;
};

std::string model_kind_name(const Model& model); // "glmnet", "rf", "svr", "stack"

const std::vector<std::string>& model_column_names(const Model& model);

std::vector<double> predict(const Model& model, const FeatureMatrix& m);

Model to_model(LearnerModel model);

/// Writes a versioned JSON document: format tag, kind, hyperparameters,
/// every fitted quantity prediction needs, training column names, and the
/// scaler reference. Stacked models embed their base and meta documents
/// whole. Numbers are printed at round-trip precision, so loading gives
/// bit-identical predictions.
void save_model_json(const Model& model, const std::string& path,
                     const std::string& scaler_ref = "");

/// IoError when the file cannot be read, StageError when it parses but is
/// not a model document this version understands.
LoadedModel load_model_json(const std::string& path);

} // namespace stackcast
