#include "stackcast/svr.hpp"

#include "stackcast/errors.hpp"
#include "stackcast/log.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace stackcast {

namespace {

void validate(const FeatureMatrix& m, const SvrParams& p)
{
    if (m.rows() == 0) throw Error(ErrorKind::EmptyMatrix, "no rows to fit on");
    for (const auto& col : m.columns) {
        for (double v : col) {
            if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteInput, "non-finite feature value");
        }
    }
    for (double v : m.target) {
        if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteInput, "non-finite target value");
    }
    if (!(p.cost > 0.0)) throw Error(ErrorKind::ConfigError, "svr cost must be positive");
    if (!(p.epsilon >= 0.0)) throw Error(ErrorKind::ConfigError, "svr epsilon must be non-negative");
    if (!(p.tol > 0.0)) throw Error(ErrorKind::ConfigError, "svr tol must be positive");
    if (p.max_passes < 1) throw Error(ErrorKind::ConfigError, "svr max_passes must be at least 1");
}

// One scan over both dual sides: the most increase-worthy coefficient, the
// most decrease-worthy one, and a bias estimate (mean gradient score over
// strictly interior coefficients, else the midpoint of the optimal range).
struct PairScan {
    double up_score = 0.0;
    double lo_score = 0.0;
    std::size_t up_row = 0;
    std::size_t lo_row = 0;
    bool up_on_star = true; // which side of the split coefficient moves
    bool lo_on_star = true;
    double bias = 0.0;
};

} // namespace

SvrModel fit_svr(const FeatureMatrix& m, const SvrParams& p)
{
    validate(m, p);
    const std::size_t n = m.rows();
    const std::size_t pc = m.cols();
    const auto& y = m.target;

    SvrModel model;
    model.column_names = m.column_names;
    model.params = p;
    model.weights.assign(pc, 0.0);
    model.dual_coefficients.assign(n, 0.0);
    if (n == 1) {
        // nothing to trade off against; predict the one observed value
        model.bias = y[0];
        return model;
    }

    std::vector<double> rows(n * pc);
    for (std::size_t j = 0; j < pc; ++j) {
        for (std::size_t i = 0; i < n; ++i) rows[i * pc + j] = m.columns[j][i];
    }
    const auto row_dot = [&](std::size_t a, std::size_t b) {
        double s = 0.0;
        for (std::size_t k = 0; k < pc; ++k) s += rows[a * pc + k] * rows[b * pc + k];
        return s;
    };

    const double C = p.cost;
    const double eps = p.epsilon;
    const double snap = 1e-12 * C;
    std::vector<double> astar(n, 0.0); // pushes the fit up at its row
    std::vector<double> alpha(n, 0.0); // pushes it down
    std::vector<double> w(pc, 0.0);
    std::vector<double> h(n, 0.0); // w.x_i, kept in sync with w

    // Gradient score of raising astar[i] is gs = y_i - h_i - eps; lowering
    // alpha[i] scores gs + 2 eps. A coefficient may rise only below C and
    // fall only above 0, and at the optimum every allowed rise scores no
    // more than every allowed fall. The bias is pinned between the two.
    const auto scan = [&]() {
        PairScan s;
        double up_best = -1.0, lo_best = 1.0; // overwritten on first hit
        bool up_set = false, lo_set = false;
        double free_sum = 0.0;
        std::size_t free_count = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double gs = y[i] - h[i] - eps;
            const double ga = gs + 2.0 * eps;
            if (astar[i] < C && (!up_set || gs > up_best)) {
                up_best = gs; s.up_row = i; s.up_on_star = true; up_set = true;
            }
            if (alpha[i] > 0.0 && (!up_set || ga > up_best)) {
                up_best = ga; s.up_row = i; s.up_on_star = false; up_set = true;
            }
            if (astar[i] > 0.0 && (!lo_set || gs < lo_best)) {
                lo_best = gs; s.lo_row = i; s.lo_on_star = true; lo_set = true;
            }
            if (alpha[i] < C && (!lo_set || ga < lo_best)) {
                lo_best = ga; s.lo_row = i; s.lo_on_star = false; lo_set = true;
            }
            if (astar[i] > 0.0 && astar[i] < C) { free_sum += gs; ++free_count; }
            if (alpha[i] > 0.0 && alpha[i] < C) { free_sum += ga; ++free_count; }
        }
        s.up_score = up_best;
        s.lo_score = lo_best;
        s.bias = free_count > 0 ? free_sum / static_cast<double>(free_count)
                                : 0.5 * (up_best + lo_best);
        return s;
    };

    const long cap = static_cast<long>(p.max_passes) * 2 * static_cast<long>(n);
    long iter = 0;
    bool converged = false;

    while (true) {
        const PairScan s = scan();

        double primal = 0.0;
        for (std::size_t k = 0; k < pc; ++k) primal += 0.5 * w[k] * w[k];
        for (std::size_t i = 0; i < n; ++i) {
            primal += C * std::max(0.0, std::abs(y[i] - h[i] - s.bias) - eps);
        }
        double dual = 0.0; // negated dual objective; gap = primal + dual
        for (std::size_t i = 0; i < n; ++i) {
            const double beta = astar[i] - alpha[i];
            dual += 0.5 * beta * h[i] + eps * (astar[i] + alpha[i]) - y[i] * beta;
        }
        if (primal + dual <= p.tol * (1.0 + std::abs(primal))) {
            converged = true;
            break;
        }
        const double spread = s.up_score - s.lo_score;
        if (spread <= 1e-12 * (1.0 + std::abs(s.up_score) + std::abs(s.lo_score))) {
            converged = true; // no improving pair left; this is the dual optimum
            break;
        }
        if (iter >= cap) break;

        const std::size_t u = s.up_row;
        const std::size_t l = s.lo_row;
        // net coefficient of row u rises by delta and of row l falls by it;
        // curvature along that direction is |x_u - x_l|^2
        const double eta = row_dot(u, u) + row_dot(l, l) - 2.0 * row_dot(u, l);
        const double room_u = s.up_on_star ? C - astar[u] : alpha[u];
        const double room_l = s.lo_on_star ? astar[l] : C - alpha[l];
        double delta = std::min(room_u, room_l);
        if (eta > 1e-12) delta = std::min(delta, spread / eta);

        if (s.up_on_star) astar[u] += delta; else alpha[u] -= delta;
        if (s.lo_on_star) astar[l] -= delta; else alpha[l] += delta;
        for (double* v : {&astar[u], &alpha[u], &astar[l], &alpha[l]}) {
            if (*v < snap) *v = 0.0;
            else if (*v > C - snap) *v = C;
        }
        for (std::size_t k = 0; k < pc; ++k) {
            w[k] += delta * (rows[u * pc + k] - rows[l * pc + k]);
        }
        for (std::size_t i = 0; i < n; ++i) {
            double hi = 0.0;
            for (std::size_t k = 0; k < pc; ++k) hi += w[k] * rows[i * pc + k];
            h[i] = hi;
        }
        ++iter;
    }

    // shave the shared part of each pair so one side is exactly zero
    for (std::size_t i = 0; i < n; ++i) {
        const double both = std::min(astar[i], alpha[i]);
        astar[i] -= both;
        alpha[i] -= both;
        model.dual_coefficients[i] = astar[i] - alpha[i];
    }
    // rebuild the weights from the duals so the reconstruction identity is
    // exact, then refresh the fitted values and bias to match
    std::fill(w.begin(), w.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double beta = model.dual_coefficients[i];
        if (beta == 0.0) continue;
        model.support.push_back(i);
        for (std::size_t k = 0; k < pc; ++k) w[k] += beta * rows[i * pc + k];
    }
    for (std::size_t i = 0; i < n; ++i) {
        double hi = 0.0;
        for (std::size_t k = 0; k < pc; ++k) hi += w[k] * rows[i * pc + k];
        h[i] = hi;
    }
    model.weights = w;
    model.bias = scan().bias;
    model.converged = converged;
    model.iterations = iter;
    if (!converged) {
        log_warn("svr", "pass budget exhausted before the duality gap closed");
    }
    return model;
}

std::vector<double> predict(const SvrModel& model, const FeatureMatrix& m)
{
    if (m.column_names != model.column_names) {
        throw Error(ErrorKind::ColumnMismatch, "prediction columns differ from training columns");
    }
    std::vector<double> out(m.rows(), model.bias);
    for (std::size_t j = 0; j < m.cols(); ++j) {
        for (std::size_t i = 0; i < m.rows(); ++i) out[i] += model.weights[j] * m.columns[j][i];
    }
    return out;
}

} // namespace stackcast
