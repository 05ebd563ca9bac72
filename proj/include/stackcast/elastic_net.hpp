#pragma once

#include "stackcast/feature_matrix.hpp"

#include <string>
#include <vector>

namespace stackcast {

struct ElasticNetParams {
    double alpha = 0.5;  // mixing: 1 = lasso, 0 = ridge
    double lambda = 0.0; // penalty strength
    int max_iter = 1000; // full coordinate sweeps
    double tol = 1e-7;   // max coefficient change per sweep, standardized scale
};

struct ElasticNetModel {
    double intercept = 0.0;
    std::vector<double> coefficients; // original (unstandardized) scale
    std::vector<std::string> column_names;
    ElasticNetParams params;
    bool converged = true;
    int sweeps = 0;
};

/// Cyclic coordinate descent with soft-thresholding on the objective
///
///   (1/N) sum_i 0.5 (y_i - a0 - a.x_i)^2
///     + lambda [ (1-alpha) |a|_2^2 / 2 + alpha |a|_1 ]
///
/// Features are standardized internally (population stddev) and the
/// intercept is left unpenalized; coefficients come back on the original
/// scale. Hitting max_iter logs a warning and flags the model instead of
/// throwing. `objective_trace`, when given, receives the standardized-scale
/// objective after initialization and after every sweep; coordinate descent
/// never increases it.
ElasticNetModel fit_elastic_net(const FeatureMatrix& m, const ElasticNetParams& p,
                                std::vector<double>* objective_trace = nullptr);

std::vector<double> predict(const ElasticNetModel& model, const FeatureMatrix& m);

/// Smallest lambda that zeroes every coefficient:
/// max_j |(1/N) x~_j . (y - ybar)| / max(alpha, 0.001).
double elastic_net_lambda_max(const FeatureMatrix& m, double alpha);

struct ElasticNetPath {
    std::vector<double> lambdas; // descending
    std::vector<ElasticNetModel> models;
};

/// Fits a log-spaced descending lambda grid from lambda_max down to
/// lambda_max * lambda_min_ratio, warm-starting each solve from the last.
ElasticNetPath fit_elastic_net_path(const FeatureMatrix& m, double alpha, int n_lambdas = 100,
                                    double lambda_min_ratio = 1e-4, double tol = 1e-7,
                                    int max_iter = 1000);

} // namespace stackcast
