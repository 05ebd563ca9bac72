#include "stackcast/model_io.hpp"

#include "stackcast/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <utility>

namespace stackcast {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "stackcast-model";
constexpr int kVersion = 1;

json params_json(const ElasticNetParams& p) {
    return {{"alpha", p.alpha}, {"lambda", p.lambda}, {"max_iter", p.max_iter}, {"tol", p.tol}};
}

ElasticNetParams glmnet_params(const json& j) {
    ElasticNetParams p;
    p.alpha = j.at("alpha").get<double>();
    p.lambda = j.at("lambda").get<double>();
    p.max_iter = j.at("max_iter").get<int>();
    p.tol = j.at("tol").get<double>();
    return p;
}

json params_json(const ForestParams& p) {
    return {{"ntree", p.ntree},
            {"mtry", p.mtry},
            {"bag_fraction", p.bag_fraction},
            {"bootstrap", p.bootstrap},
            {"min_node_size", p.min_node_size},
            {"rng_seed", p.rng_seed}};
}

ForestParams forest_params(const json& j) {
    ForestParams p;
    p.ntree = j.at("ntree").get<int>();
    p.mtry = j.at("mtry").get<int>();
    p.bag_fraction = j.at("bag_fraction").get<double>();
    p.bootstrap = j.at("bootstrap").get<bool>();
    p.min_node_size = j.at("min_node_size").get<int>();
    p.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    return p;
}

json params_json(const SvrParams& p) {
    return {{"cost", p.cost}, {"epsilon", p.epsilon}, {"tol", p.tol}, {"max_passes", p.max_passes}};
}

SvrParams svr_params(const json& j) {
    SvrParams p;
    p.cost = j.at("cost").get<double>();
    p.epsilon = j.at("epsilon").get<double>();
    p.tol = j.at("tol").get<double>();
    p.max_passes = j.at("max_passes").get<int>();
    return p;
}

json spec_json(const LearnerSpec& spec) {
    json j;
    j["kind"] = learner_kind_name(spec.kind);
    switch (spec.kind) {
    case LearnerKind::Glmnet: j["params"] = params_json(spec.glmnet); break;
    case LearnerKind::Forest: j["params"] = params_json(spec.forest); break;
    case LearnerKind::Svr: j["params"] = params_json(spec.svr); break;
    }
    return j;
}

LearnerSpec spec_from_json(const json& j) {
    LearnerSpec spec;
    spec.kind = parse_learner_kind(j.at("kind").get<std::string>());
    switch (spec.kind) {
    case LearnerKind::Glmnet: spec.glmnet = glmnet_params(j.at("params")); break;
    case LearnerKind::Forest: spec.forest = forest_params(j.at("params")); break;
    case LearnerKind::Svr: spec.svr = svr_params(j.at("params")); break;
    }
    return spec;
}

json header(const char* kind, const std::vector<std::string>& columns,
            const std::string& scaler_ref) {
    json j;
    j["format"] = kFormat;
    j["version"] = kVersion;
    j["kind"] = kind;
    j["column_names"] = columns;
    j["scaler_ref"] = scaler_ref;
    return j;
}

json doc_of(const ElasticNetModel& m, const std::string& scaler_ref) {
    json j = header("glmnet", m.column_names, scaler_ref);
    j["params"] = params_json(m.params);
    j["intercept"] = m.intercept;
    j["coefficients"] = m.coefficients;
    j["converged"] = m.converged;
    j["sweeps"] = m.sweeps;
    return j;
}

json doc_of(const ForestModel& m, const std::string& scaler_ref) {
    json j = header("rf", m.column_names, scaler_ref);
    j["params"] = params_json(m.params);
    j["importance"] = m.importance;
    // column-per-field layout keeps tree storage flat and compact
    json trees = json::array();
    for (const auto& tree : m.trees) {
        json t;
        auto& feature = t["feature"] = json::array();
        auto& threshold = t["threshold"] = json::array();
        auto& left = t["left"] = json::array();
        auto& right = t["right"] = json::array();
        auto& value = t["value"] = json::array();
        for (const auto& node : tree.nodes) {
            feature.push_back(node.feature);
            threshold.push_back(node.threshold);
            left.push_back(node.left);
            right.push_back(node.right);
            value.push_back(node.value);
        }
        trees.push_back(std::move(t));
    }
    j["trees"] = std::move(trees);
    j["oob_rmse"] = std::isnan(m.oob_rmse) ? json() : json(m.oob_rmse);
    return j;
}

json doc_of(const SvrModel& m, const std::string& scaler_ref) {
    json j = header("svr", m.column_names, scaler_ref);
    j["params"] = params_json(m.params);
    j["weights"] = m.weights;
    j["bias"] = m.bias;
    j["dual_coefficients"] = m.dual_coefficients;
    j["support"] = m.support;
    j["converged"] = m.converged;
    j["iterations"] = m.iterations;
    return j;
}

json doc_of_learner(const LearnerModel& m) {
    return std::visit([](const auto& x) { return doc_of(x, ""); }, m);
}

json doc_of(const StackedModel& m, const std::string& scaler_ref) {
    json j = header("stack", m.column_names, scaler_ref);
    json cfg;
    cfg["folds"] = m.config.folds;
    cfg["repeats"] = m.config.repeats;
    cfg["rng_seed"] = m.config.rng_seed;
    cfg["base_specs"] = json::array();
    for (const auto& spec : m.config.base_specs) cfg["base_specs"].push_back(spec_json(spec));
    cfg["meta_spec"] = spec_json(m.config.meta_spec);
    j["config"] = std::move(cfg);
    j["base_names"] = m.base_names;
    j["bases"] = json::array();
    for (const auto& base : m.base_models) j["bases"].push_back(doc_of_learner(base));
    j["meta"] = doc_of_learner(m.meta);
    return j;
}

ElasticNetModel glmnet_from_doc(const json& j) {
    ElasticNetModel m;
    m.column_names = j.at("column_names").get<std::vector<std::string>>();
    m.params = glmnet_params(j.at("params"));
    m.intercept = j.at("intercept").get<double>();
    m.coefficients = j.at("coefficients").get<std::vector<double>>();
    m.converged = j.at("converged").get<bool>();
    m.sweeps = j.at("sweeps").get<int>();
    return m;
}

ForestModel forest_from_doc(const json& j) {
    ForestModel m;
    m.column_names = j.at("column_names").get<std::vector<std::string>>();
    m.params = forest_params(j.at("params"));
    m.importance = j.at("importance").get<std::vector<double>>();
    for (const auto& t : j.at("trees")) {
        Tree tree;
        const auto feature = t.at("feature").get<std::vector<int>>();
        const auto threshold = t.at("threshold").get<std::vector<double>>();
        const auto left = t.at("left").get<std::vector<int>>();
        const auto right = t.at("right").get<std::vector<int>>();
        const auto value = t.at("value").get<std::vector<double>>();
        if (threshold.size() != feature.size() || left.size() != feature.size() ||
            right.size() != feature.size() || value.size() != feature.size()) {
            throw Error(ErrorKind::StageError, "tree arrays have mismatched lengths");
        }
        tree.nodes.resize(feature.size());
        for (std::size_t i = 0; i < feature.size(); ++i) {
            tree.nodes[i] = {feature[i], threshold[i], left[i], right[i], value[i]};
        }
        m.trees.push_back(std::move(tree));
    }
    const auto& oob = j.at("oob_rmse");
    m.oob_rmse = oob.is_null() ? std::numeric_limits<double>::quiet_NaN() : oob.get<double>();
    return m;
}

SvrModel svr_from_doc(const json& j) {
    SvrModel m;
    m.column_names = j.at("column_names").get<std::vector<std::string>>();
    m.params = svr_params(j.at("params"));
    m.weights = j.at("weights").get<std::vector<double>>();
    m.bias = j.at("bias").get<double>();
    m.dual_coefficients = j.at("dual_coefficients").get<std::vector<double>>();
    m.support = j.at("support").get<std::vector<std::size_t>>();
    m.converged = j.at("converged").get<bool>();
    m.iterations = j.at("iterations").get<long>();
    return m;
}

void check_header(const json& j) {
    if (j.at("format").get<std::string>() != kFormat) {
        throw Error(ErrorKind::StageError, "not a model document");
    }
    const int version = j.at("version").get<int>();
    if (version != kVersion) {
        throw Error(ErrorKind::StageError,
                    "model document version " + std::to_string(version) + " is unsupported");
    }
}

LearnerModel learner_from_doc(const json& j) {
    check_header(j);
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "glmnet") return glmnet_from_doc(j);
    if (kind == "rf") return forest_from_doc(j);
    if (kind == "svr") return svr_from_doc(j);
    throw Error(ErrorKind::StageError, "unexpected embedded model kind: " + kind);
}

StackedModel stack_from_doc(const json& j) {
    StackedModel m;
    m.column_names = j.at("column_names").get<std::vector<std::string>>();
    const auto& cfg = j.at("config");
    m.config.folds = cfg.at("folds").get<int>();
    m.config.repeats = cfg.at("repeats").get<int>();
    m.config.rng_seed = cfg.at("rng_seed").get<std::uint64_t>();
    for (const auto& spec : cfg.at("base_specs")) {
        m.config.base_specs.push_back(spec_from_json(spec));
    }
    m.config.meta_spec = spec_from_json(cfg.at("meta_spec"));
    m.base_names = j.at("base_names").get<std::vector<std::string>>();
    for (const auto& base : j.at("bases")) m.base_models.push_back(learner_from_doc(base));
    m.meta = learner_from_doc(j.at("meta"));
    if (m.base_models.size() != m.base_names.size()) {
        throw Error(ErrorKind::StageError, "base model and base name counts disagree");
    }
    return m;
}

} // namespace

std::string model_kind_name(const Model& model) {
    if (std::holds_alternative<StackedModel>(model)) return "stack";
    if (std::holds_alternative<ForestModel>(model)) return "rf";
    if (std::holds_alternative<SvrModel>(model)) return "svr";
    return "glmnet";
}

const std::vector<std::string>& model_column_names(const Model& model) {
    return std::visit(
        [](const auto& m) -> const std::vector<std::string>& { return m.column_names; }, model);
}

std::vector<double> predict(const Model& model, const FeatureMatrix& m) {
    return std::visit([&m](const auto& fitted) { return predict(fitted, m); }, model);
}

Model to_model(LearnerModel model) {
    return std::visit([](auto&& x) -> Model { return std::move(x); }, std::move(model));
}

void save_model_json(const Model& model, const std::string& path,
                     const std::string& scaler_ref) {
    const json doc =
        std::visit([&](const auto& m) { return doc_of(m, scaler_ref); }, model);
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
    out << doc.dump(2) << '\n';
}

LoadedModel load_model_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::StageError, path + " is not valid JSON: " + e.what());
    }
    try {
        check_header(j);
        LoadedModel loaded;
        loaded.scaler_ref = j.at("scaler_ref").get<std::string>();
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "stack") {
            loaded.model = stack_from_doc(j);
        } else {
            loaded.model = to_model(learner_from_doc(j));
        }
        return loaded;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::StageError, path + " is not a valid model document: " + e.what());
    }
}

} // namespace stackcast
