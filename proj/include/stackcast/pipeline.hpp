#pragma once

#include "stackcast/config.hpp"

#include <string>
#include <vector>

namespace stackcast {

/// One pipeline stage as recorded in manifest.json.
struct StageRecord {
    std::string name;       // "features", "select", "train-rf", "evaluate"
    int version = 1;        // schema of the files the stage writes
    std::string input_hash; // fingerprint of everything the stage read
    double seconds = 0.0;
    bool skipped = false;   // outputs already matched input_hash
};

/// Stage commands. Each writes its files under cfg.out_dir, skips itself
/// when existing outputs already match the current input fingerprint, and
/// throws Error on failure. Exit-code mapping belongs to the caller.
StageRecord cmd_features(const PipelineConfig& cfg);
StageRecord cmd_select(const PipelineConfig& cfg);
StageRecord cmd_train(const PipelineConfig& cfg, const std::string& model);
StageRecord cmd_evaluate(const PipelineConfig& cfg);

/// features -> select -> train (glmnet, rf, svr, stack) -> evaluate, then
/// writes manifest.json. Errors gain the failing stage's name as context.
std::vector<StageRecord> cmd_run_all(const PipelineConfig& cfg);

} // namespace stackcast
