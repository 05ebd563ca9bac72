#pragma once

#include "stackcast/feature_matrix.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace stackcast {

struct SvrParams {
    double cost = 1.0;      // box constraint C on each dual coefficient
    double epsilon = 0.1;   // half-width of the zero-loss tube
    double tol = 1e-3;      // stop when duality gap <= tol * (1 + |primal|)
    int max_passes = 10000; // sweep budget; one sweep = 2N pair updates
};

struct SvrModel {
    std::vector<double> weights; // w in prediction w.x + b
    double bias = 0.0;
    std::vector<double> dual_coefficients; // alpha_i^* - alpha_i per training row
    std::vector<std::size_t> support;      // rows with nonzero dual coefficient
    std::vector<std::string> column_names;
    SvrParams params;
    bool converged = true;
    long iterations = 0; // pair updates performed
};

/// Linear epsilon-insensitive support vector regression,
///
///   minimize 0.5 |w|^2 + C sum_i max(0, |y_i - (w.x_i + b)| - epsilon),
///
/// solved in the dual by pairwise coordinate steps on the maximal violating
/// pair. The weight vector is rebuilt from the final dual coefficients, so
/// w = sum_i (alpha_i^* - alpha_i) x_i holds to roundoff. Exhausting the
/// pass budget logs a warning and flags the model instead of throwing.
/// A single training row yields the constant model w = 0, b = y_0.
SvrModel fit_svr(const FeatureMatrix& m, const SvrParams& p);

std::vector<double> predict(const SvrModel& model, const FeatureMatrix& m);

} // namespace stackcast
