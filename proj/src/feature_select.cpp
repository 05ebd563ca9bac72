#include "stackcast/feature_select.hpp"

#include "stackcast/errors.hpp"
#include "stackcast/rng.hpp"
#include "stackcast/text.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <numeric>

namespace stackcast {

namespace {

constexpr std::uint64_t kShadowStream = 0x5ad0e5;
constexpr std::uint64_t kForestStream = 0xb0f0de;
constexpr std::uint64_t kPermuteStream = 0x9e2153;

// P(X >= h) and P(X <= h) for X ~ Binomial(n, 1/2), via the pmf recurrence.
// n stays small (max_runs), so plain doubles are plenty.
std::pair<double, double> binomial_tails(int h, int n) {
    double pmf = std::pow(0.5, n);
    double below = 0.0, at = 0.0, above = 0.0;
    for (int k = 0; k <= n; ++k) {
        if (k < h) below += pmf;
        else if (k == h) at = pmf;
        else above += pmf;
        pmf *= static_cast<double>(n - k) / static_cast<double>(k + 1);
    }
    return {at + above, below + at};
}

double rmse_of(const std::vector<double>& a, const std::vector<double>& b) {
    double se = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) se += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(se / static_cast<double>(a.size()));
}

// Importance as the prediction damage done by scrambling one column: fit
// once, then per column permute, re-predict, and score the RMSE increase.
std::vector<double> permutation_importance(const ForestModel& model, FeatureMatrix work,
                                           Rng& rng) {
    const auto baseline = predict(model, work);
    const double base_rmse = rmse_of(work.target, baseline);
    std::vector<double> importance(work.columns.size(), 0.0);
    std::vector<std::size_t> order(work.rows());
    for (std::size_t j = 0; j < work.columns.size(); ++j) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        rng.shuffle(order);
        const std::vector<double> saved = work.columns[j];
        for (std::size_t i = 0; i < order.size(); ++i) work.columns[j][i] = saved[order[i]];
        importance[j] = rmse_of(work.target, predict(model, work)) - base_rmse;
        work.columns[j] = saved;
    }
    return importance;
}

} // namespace

const char* to_string(BorutaDecision decision) {
    switch (decision) {
    case BorutaDecision::Confirmed: return "Confirmed";
    case BorutaDecision::Rejected: return "Rejected";
    default: return "Tentative";
    }
}

BorutaResult run_boruta(const FeatureMatrix& m, const BorutaConfig& cfg, int jobs) {
    if (m.columns.size() < 2) {
        throw Error(ErrorKind::TooFewFeatures, "selection needs at least 2 features");
    }
    if (m.rows() < 20) {
        throw Error(ErrorKind::TooFewRows, "selection needs at least 20 rows");
    }
    if (cfg.max_runs < 1) throw Error(ErrorKind::ConfigError, "max_runs must be positive");
    if (!(cfg.p_value > 0.0 && cfg.p_value < 1.0)) {
        throw Error(ErrorKind::ConfigError, "p_value must lie strictly between 0 and 1");
    }

    const std::size_t p = m.columns.size();
    const std::size_t n = m.rows();

    BorutaResult result;
    result.verdicts.resize(p);
    result.importance_samples.resize(p);
    for (std::size_t j = 0; j < p; ++j) result.verdicts[j].feature_name = m.column_names[j];

    std::vector<bool> decided(p, false);
    std::vector<bool> alive(p, true); // rejected features leave the forest
    std::vector<std::size_t> order(n);

    for (int run = 0; run < cfg.max_runs; ++run) {
        std::size_t undecided = 0;
        for (std::size_t j = 0; j < p; ++j) undecided += decided[j] ? 0u : 1u;
        if (undecided == 0) break;

        // fresh probes every run
        Rng shadow_rng(Rng::derive(cfg.rng_seed, kShadowStream, static_cast<std::uint64_t>(run)));
        FeatureMatrix augmented;
        augmented.dates = m.dates;
        augmented.target = m.target;
        std::vector<std::size_t> live_cols;
        for (std::size_t j = 0; j < p; ++j) {
            if (!alive[j]) continue;
            live_cols.push_back(j);
            augmented.columns.push_back(m.columns[j]);
            augmented.column_names.push_back(m.column_names[j]);
        }
        // never fewer than five probes, or the hit bar collapses once most
        // features have been rejected and survivors start beating it by luck
        const std::size_t live = live_cols.size();
        const std::size_t shadows = std::max<std::size_t>(live, 5);
        for (std::size_t k = 0; k < shadows; ++k) {
            std::iota(order.begin(), order.end(), std::size_t{0});
            shadow_rng.shuffle(order);
            std::vector<double> shadow(n);
            const auto& src = augmented.columns[k % live];
            for (std::size_t i = 0; i < n; ++i) shadow[i] = src[order[i]];
            augmented.columns.push_back(std::move(shadow));
            augmented.column_names.push_back("__shadow_" + std::to_string(k));
        }

        ForestParams fp = cfg.forest_params;
        fp.rng_seed = Rng::derive(cfg.rng_seed, kForestStream, static_cast<std::uint64_t>(run));
        const ForestModel forest = fit_forest(augmented, fp, jobs);

        std::vector<double> importance = forest.importance;
        if (cfg.permutation_importance) {
            Rng perm_rng(
                Rng::derive(cfg.rng_seed, kPermuteStream, static_cast<std::uint64_t>(run)));
            importance = permutation_importance(forest, augmented, perm_rng);
        }

        double sh_min = std::numeric_limits<double>::infinity();
        double sh_max = -std::numeric_limits<double>::infinity();
        double sh_sum = 0.0;
        for (std::size_t k = live; k < live + shadows; ++k) {
            sh_min = std::min(sh_min, importance[k]);
            sh_max = std::max(sh_max, importance[k]);
            sh_sum += importance[k];
        }
        result.shadow_min.push_back(sh_min);
        result.shadow_mean.push_back(sh_sum / static_cast<double>(shadows));
        result.shadow_max.push_back(sh_max);

        for (std::size_t k = 0; k < live; ++k) {
            const std::size_t j = live_cols[k];
            auto& verdict = result.verdicts[j];
            result.importance_samples[j].push_back(importance[k]);
            verdict.runs += 1;
            if (!decided[j] && importance[k] > sh_max) verdict.hit_count += 1;
        }

        // opposing one-sided tests, Bonferroni over the features still open
        const double adjusted = cfg.p_value / static_cast<double>(undecided);
        for (std::size_t j = 0; j < p; ++j) {
            if (decided[j]) continue;
            const auto [upper, lower] =
                binomial_tails(result.verdicts[j].hit_count, result.verdicts[j].runs);
            if (upper < adjusted) {
                result.verdicts[j].decision = BorutaDecision::Confirmed;
                decided[j] = true;
            } else if (lower < adjusted) {
                result.verdicts[j].decision = BorutaDecision::Rejected;
                decided[j] = true;
                alive[j] = false;
            }
        }
        result.runs = run + 1;
    }

    for (std::size_t j = 0; j < p; ++j) {
        auto& verdict = result.verdicts[j];
        if (!decided[j]) verdict.decision = BorutaDecision::Tentative;
        const auto& samples = result.importance_samples[j];
        if (!samples.empty()) {
            verdict.mean_importance = std::accumulate(samples.begin(), samples.end(), 0.0) /
                                      static_cast<double>(samples.size());
        }
    }
    return result;
}

std::vector<FeatureVerdict> importance_report(const std::vector<FeatureVerdict>& verdicts) {
    std::vector<FeatureVerdict> ranked = verdicts;
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.mean_importance > b.mean_importance;
    });
    return ranked;
}

std::vector<std::string> selected_features(const std::vector<FeatureVerdict>& verdicts,
                                           bool drop_tentative) {
    std::vector<std::string> keep;
    for (const auto& v : verdicts) {
        if (v.decision == BorutaDecision::Confirmed ||
            (!drop_tentative && v.decision == BorutaDecision::Tentative)) {
            keep.push_back(v.feature_name);
        }
    }
    return keep;
}

void save_boruta_report_csv(const std::vector<FeatureVerdict>& verdicts,
                            const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
    out << "feature,decision,mean_importance,hit_count\n";
    for (const auto& v : importance_report(verdicts)) {
        out << v.feature_name << ',' << to_string(v.decision) << ','
            << format_double(v.mean_importance) << ',' << v.hit_count << '\n';
    }
}

void save_boruta_boxplot_csv(const BorutaResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
    out << "name,run,importance\n";
    for (std::size_t j = 0; j < result.verdicts.size(); ++j) {
        const auto& samples = result.importance_samples[j];
        for (std::size_t r = 0; r < samples.size(); ++r) {
            out << result.verdicts[j].feature_name << ',' << r << ','
                << format_double(samples[r]) << '\n';
        }
    }
    for (std::size_t r = 0; r < result.shadow_max.size(); ++r) {
        out << "shadowMin," << r << ',' << format_double(result.shadow_min[r]) << '\n';
        out << "shadowMean," << r << ',' << format_double(result.shadow_mean[r]) << '\n';
        out << "shadowMax," << r << ',' << format_double(result.shadow_max[r]) << '\n';
    }
}

} // namespace stackcast
