#include "stackcast/learner.hpp"

#include "stackcast/errors.hpp"

namespace stackcast {

const char* learner_kind_name(LearnerKind kind)
{
    switch (kind) {
    case LearnerKind::Glmnet: return "glmnet";
    case LearnerKind::Forest: return "rf";
    case LearnerKind::Svr: return "svr";
    }
    return "unknown";
}

LearnerKind parse_learner_kind(const std::string& name)
{
    if (name == "glmnet") return LearnerKind::Glmnet;
    if (name == "rf") return LearnerKind::Forest;
    if (name == "svr") return LearnerKind::Svr;
    throw Error(ErrorKind::ConfigError, "unknown learner kind: " + name);
}

LearnerModel fit_learner(const FeatureMatrix& m, const LearnerSpec& spec, int jobs)
{
    switch (spec.kind) {
    case LearnerKind::Glmnet: return fit_elastic_net(m, spec.glmnet);
    case LearnerKind::Forest: return fit_forest(m, spec.forest, jobs);
    case LearnerKind::Svr: return fit_svr(m, spec.svr);
    }
    throw Error(ErrorKind::ConfigError, "unknown learner kind");
}

std::vector<double> predict(const LearnerModel& model, const FeatureMatrix& m)
{
    return std::visit([&](const auto& fitted) { return predict(fitted, m); }, model);
}

} // namespace stackcast
