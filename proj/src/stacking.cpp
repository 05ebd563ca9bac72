#include "stackcast/stacking.hpp"

#include "stackcast/errors.hpp"
#include "stackcast/parallel.hpp"

#include <sstream>
#include <string>
#include <utility>

namespace stackcast {

namespace {

FeatureMatrix meta_matrix(const std::vector<std::vector<double>>& features,
                          const std::vector<std::string>& names, const std::vector<Date>& dates,
                          const std::vector<double>& target)
{
    FeatureMatrix m;
    m.columns = features;
    m.column_names = names;
    m.dates = dates;
    m.target = target;
    return m;
}

} // namespace

StackConfig default_stack_config()
{
    StackConfig cfg;
    LearnerSpec forest;
    forest.kind = LearnerKind::Forest;
    LearnerSpec net;
    net.kind = LearnerKind::Glmnet;
    cfg.base_specs = {forest, net};
    cfg.meta_spec.kind = LearnerKind::Svr;
    cfg.meta_spec.svr.cost = 1.0;
    return cfg;
}

StackedModel fit_stack(const FeatureMatrix& m, const StackConfig& cfg, int jobs)
{
    if (cfg.base_specs.empty()) {
        throw Error(ErrorKind::ConfigError, "stacking needs at least one base learner");
    }
    if (cfg.folds < 2) throw Error(ErrorKind::ConfigError, "stacking needs at least 2 folds");
    if (cfg.repeats < 1) throw Error(ErrorKind::ConfigError, "stacking repeats must be at least 1");
    const std::size_t n = m.rows();
    if (n < static_cast<std::size_t>(cfg.folds)) {
        throw Error(ErrorKind::TooFewRows, "fewer rows than stacking folds");
    }

    CvSpec cv;
    cv.folds = cfg.folds;
    cv.repeats = cfg.repeats;
    cv.rng_seed = cfg.rng_seed;
    const auto splits = kfold_splits(n, cv);

    StackedModel model;
    model.config = cfg;
    model.column_names = m.column_names;
    model.fold_of_row.assign(static_cast<std::size_t>(cfg.repeats), std::vector<int>(n, -1));
    for (const auto& split : splits) {
        for (std::size_t i : split.validation_rows) {
            model.fold_of_row[static_cast<std::size_t>(split.repeat)][i] = split.fold;
        }
    }

    const std::size_t bases = cfg.base_specs.size();
    for (std::size_t b = 0; b < bases; ++b) {
        std::ostringstream name;
        name << "base" << b << '_' << learner_kind_name(cfg.base_specs[b].kind);
        model.base_names.push_back(name.str());
    }

    // every (base, split) pair is an independent training task; predictions
    // land in per-task slots so the later accumulation is order-fixed
    std::vector<std::vector<double>> task_preds(bases * splits.size());
    parallel_for_index(task_preds.size(), jobs, [&](std::size_t t) {
        const std::size_t b = t / splits.size();
        const FoldSplit& split = splits[t % splits.size()];
        try {
            const auto train = take_rows(m, split.train_rows);
            const auto val = take_rows(m, split.validation_rows);
            task_preds[t] = predict(fit_learner(train, cfg.base_specs[b], 1), val);
        } catch (const Error& e) {
            std::ostringstream oss;
            oss << model.base_names[b] << " repeat " << split.repeat << " fold " << split.fold
                << ": " << e.what();
            throw Error(e.kind(), oss.str(), e.line());
        }
    });

    model.oof_meta_features.assign(bases, std::vector<double>(n, 0.0));
    for (std::size_t b = 0; b < bases; ++b) {
        for (std::size_t s = 0; s < splits.size(); ++s) {
            const auto& split = splits[s];
            const auto& preds = task_preds[b * splits.size() + s];
            for (std::size_t k = 0; k < split.validation_rows.size(); ++k) {
                model.oof_meta_features[b][split.validation_rows[k]] += preds[k];
            }
        }
        for (double& v : model.oof_meta_features[b]) v /= static_cast<double>(cfg.repeats);
    }

    model.meta = fit_learner(
        meta_matrix(model.oof_meta_features, model.base_names, m.dates, m.target), cfg.meta_spec,
        1);

    model.base_models.resize(bases);
    parallel_for_index(bases, jobs, [&](std::size_t b) {
        model.base_models[b] = fit_learner(m, cfg.base_specs[b], 1);
    });
    return model;
}

std::vector<double> predict(const StackedModel& model, const FeatureMatrix& m)
{
    if (m.column_names != model.column_names) {
        throw Error(ErrorKind::ColumnMismatch, "prediction columns differ from training columns");
    }
    std::vector<std::vector<double>> features;
    features.reserve(model.base_models.size());
    for (const auto& base : model.base_models) features.push_back(predict(base, m));
    return predict(model.meta,
                   meta_matrix(features, model.base_names, m.dates,
                               std::vector<double>(m.rows(), 0.0)));
}

} // namespace stackcast
