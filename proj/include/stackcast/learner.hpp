#pragma once

#include "stackcast/elastic_net.hpp"
#include "stackcast/forest.hpp"
#include "stackcast/svr.hpp"

#include <string>
#include <variant>
#include <vector>

namespace stackcast {

enum class LearnerKind { Glmnet, Forest, Svr };

/// One learner choice plus its hyperparameters. Only the member matching
/// `kind` is consulted; keeping all three flat avoids visitation ceremony
/// in config parsing and grid construction.
struct LearnerSpec {
    LearnerKind kind = LearnerKind::Glmnet;
    ElasticNetParams glmnet;
    ForestParams forest;
    SvrParams svr;
};

using LearnerModel = std::variant<ElasticNetModel, ForestModel, SvrModel>;

const char* learner_kind_name(LearnerKind kind); // "glmnet", "rf", "svr"
LearnerKind parse_learner_kind(const std::string& name);

LearnerModel fit_learner(const FeatureMatrix& m, const LearnerSpec& spec, int jobs = 1);
std::vector<double> predict(const LearnerModel& model, const FeatureMatrix& m);

} // namespace stackcast
