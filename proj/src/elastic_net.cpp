#include "stackcast/elastic_net.hpp"

#include "stackcast/errors.hpp"
#include "stackcast/log.hpp"

#include <algorithm>
#include <cmath>

namespace stackcast {

namespace {

void validate_params(const ElasticNetParams& p) {
    if (p.alpha < 0.0 || p.alpha > 1.0) {
        throw Error(ErrorKind::ConfigError, "elastic net alpha must lie in [0,1]");
    }
    if (p.lambda < 0.0) throw Error(ErrorKind::ConfigError, "elastic net lambda must be >= 0");
    if (p.tol <= 0.0) throw Error(ErrorKind::ConfigError, "elastic net tol must be > 0");
    if (p.max_iter < 1) throw Error(ErrorKind::ConfigError, "elastic net max_iter must be >= 1");
}

void validate_matrix(const FeatureMatrix& m) {
    if (m.rows() == 0) throw Error(ErrorKind::EmptyMatrix, "no rows to fit on");
    for (const auto& col : m.columns) {
        for (double v : col) {
            if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteInput, "non-finite feature value");
        }
    }
    for (double v : m.target) {
        if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteInput, "non-finite target value");
    }
}

struct Standardized {
    std::vector<std::vector<double>> z; // mean 0, population variance 1 per column
    std::vector<double> mu;
    std::vector<double> sigma; // 1.0 for constant columns (their z is all zero)
    std::vector<double> yc;    // y - ybar
    double ybar = 0.0;
};

Standardized standardize(const FeatureMatrix& m) {
    const std::size_t n = m.rows();
    const std::size_t p = m.cols();
    Standardized s;
    s.z.assign(p, std::vector<double>(n));
    s.mu.resize(p);
    s.sigma.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        double mean = 0.0;
        for (double v : m.columns[j]) mean += v;
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (double v : m.columns[j]) {
            const double d = v - mean;
            ss += d * d;
        }
        const double sigma = std::sqrt(ss / static_cast<double>(n));
        s.mu[j] = mean;
        s.sigma[j] = sigma == 0.0 ? 1.0 : sigma;
        for (std::size_t i = 0; i < n; ++i) {
            s.z[j][i] = sigma == 0.0 ? 0.0 : (m.columns[j][i] - mean) / sigma;
        }
    }
    double ybar = 0.0;
    for (double v : m.target) ybar += v;
    s.ybar = ybar / static_cast<double>(n);
    s.yc.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.yc[i] = m.target[i] - s.ybar;
    return s;
}

double soft(double z, double t) {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

/// Objective on the standardized problem for current residual r = yc - Z beta.
double standardized_objective(const std::vector<double>& r, const std::vector<double>& beta,
                              double lambda, double alpha) {
    double loss = 0.0;
    for (double v : r) loss += 0.5 * v * v;
    loss /= static_cast<double>(r.size());
    double l1 = 0.0;
    double l2 = 0.0;
    for (double b : beta) {
        l1 += std::abs(b);
        l2 += b * b;
    }
    return loss + lambda * ((1.0 - alpha) * 0.5 * l2 + alpha * l1);
}

struct CdResult {
    std::vector<double> beta;
    bool converged = true;
    int sweeps = 0;
};

CdResult coordinate_descent(const Standardized& s, const ElasticNetParams& p,
                            std::vector<double> beta0, std::vector<double>* trace) {
    const std::size_t n = s.yc.size();
    const std::size_t pcount = s.z.size();
    const double inv_n = 1.0 / static_cast<double>(n);
    const double shrink = p.lambda * p.alpha;
    const double denom = 1.0 + p.lambda * (1.0 - p.alpha);

    CdResult result;
    result.beta = std::move(beta0);
    result.beta.resize(pcount, 0.0);

    std::vector<double> r = s.yc;
    for (std::size_t j = 0; j < pcount; ++j) {
        if (result.beta[j] == 0.0) continue;
        for (std::size_t i = 0; i < n; ++i) r[i] -= result.beta[j] * s.z[j][i];
    }
    if (trace) trace->push_back(standardized_objective(r, result.beta, p.lambda, p.alpha));

    for (int sweep = 0; sweep < p.max_iter; ++sweep) {
        double max_delta = 0.0;
        for (std::size_t j = 0; j < pcount; ++j) {
            const double old = result.beta[j];
            double rho = 0.0;
            for (std::size_t i = 0; i < n; ++i) rho += s.z[j][i] * r[i];
            rho = rho * inv_n + old; // (1/N) z_j . (r + old * z_j), since z_j is unit variance
            const double updated = soft(rho, shrink) / denom;
            if (updated != old) {
                const double delta = updated - old;
                for (std::size_t i = 0; i < n; ++i) r[i] -= delta * s.z[j][i];
                result.beta[j] = updated;
                max_delta = std::max(max_delta, std::abs(delta));
            }
        }
        result.sweeps = sweep + 1;
        if (trace) trace->push_back(standardized_objective(r, result.beta, p.lambda, p.alpha));
        if (max_delta < p.tol) return result;
    }
    result.converged = false;
    return result;
}

ElasticNetModel finalize(const FeatureMatrix& m, const Standardized& s, const ElasticNetParams& p,
                         CdResult cd) {
    ElasticNetModel model;
    model.params = p;
    model.column_names = m.column_names;
    model.converged = cd.converged;
    model.sweeps = cd.sweeps;
    model.coefficients.resize(m.cols());
    double intercept = s.ybar;
    for (std::size_t j = 0; j < m.cols(); ++j) {
        model.coefficients[j] = cd.beta[j] / s.sigma[j];
        intercept -= model.coefficients[j] * s.mu[j];
    }
    model.intercept = intercept;
    if (!cd.converged) {
        log_warn("glmnet", "coordinate descent hit max_iter=" + std::to_string(p.max_iter) +
                               " before reaching tol");
    }
    return model;
}

} // namespace

ElasticNetModel fit_elastic_net(const FeatureMatrix& m, const ElasticNetParams& p,
                                std::vector<double>* objective_trace) {
    validate_params(p);
    validate_matrix(m);
    if (m.rows() == 1) {
        ElasticNetModel model;
        model.params = p;
        model.column_names = m.column_names;
        model.coefficients.assign(m.cols(), 0.0);
        model.intercept = m.target[0];
        return model;
    }
    const auto s = standardize(m);
    auto cd = coordinate_descent(s, p, {}, objective_trace);
    return finalize(m, s, p, std::move(cd));
}

std::vector<double> predict(const ElasticNetModel& model, const FeatureMatrix& m) {
    if (model.column_names != m.column_names) {
        throw Error(ErrorKind::ColumnMismatch, "prediction columns differ from training columns");
    }
    std::vector<double> out(m.rows(), model.intercept);
    for (std::size_t j = 0; j < m.cols(); ++j) {
        const double c = model.coefficients[j];
        if (c == 0.0) continue;
        for (std::size_t i = 0; i < m.rows(); ++i) out[i] += c * m.columns[j][i];
    }
    return out;
}

double elastic_net_lambda_max(const FeatureMatrix& m, double alpha) {
    validate_matrix(m);
    const auto s = standardize(m);
    const double inv_n = 1.0 / static_cast<double>(m.rows());
    double best = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) {
        double dot = 0.0;
        for (std::size_t i = 0; i < m.rows(); ++i) dot += s.z[j][i] * s.yc[i];
        best = std::max(best, std::abs(dot) * inv_n);
    }
    return best / std::max(alpha, 0.001);
}

ElasticNetPath fit_elastic_net_path(const FeatureMatrix& m, double alpha, int n_lambdas,
                                    double lambda_min_ratio, double tol, int max_iter) {
    if (n_lambdas < 1) throw Error(ErrorKind::ConfigError, "lambda path needs >= 1 point");
    validate_matrix(m);
    const double lambda_max = elastic_net_lambda_max(m, alpha);

    ElasticNetPath path;
    path.lambdas.resize(static_cast<std::size_t>(n_lambdas));
    if (n_lambdas == 1 || lambda_max == 0.0) {
        std::fill(path.lambdas.begin(), path.lambdas.end(), lambda_max);
    } else {
        const double log_hi = std::log(lambda_max);
        const double log_lo = std::log(lambda_max * lambda_min_ratio);
        for (int k = 0; k < n_lambdas; ++k) {
            const double t = static_cast<double>(k) / (n_lambdas - 1);
            path.lambdas[static_cast<std::size_t>(k)] = std::exp(log_hi + t * (log_lo - log_hi));
        }
    }

    const auto s = standardize(m);
    std::vector<double> warm; // standardized coefficients carried along the path
    for (double lambda : path.lambdas) {
        ElasticNetParams p;
        p.alpha = alpha;
        p.lambda = lambda;
        p.tol = tol;
        p.max_iter = max_iter;
        auto cd = coordinate_descent(s, p, warm, nullptr);
        warm = cd.beta;
        path.models.push_back(finalize(m, s, p, std::move(cd)));
    }
    return path;
}

} // namespace stackcast
