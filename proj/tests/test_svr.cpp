#include "stackcast/svr.hpp"

#include "stackcast/errors.hpp"
#include "stackcast/rng.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <vector>

using namespace stackcast;

namespace {

FeatureMatrix matrix_1d(const std::vector<double>& x, const std::vector<double>& y) {
    FeatureMatrix m;
    m.columns = {x};
    m.column_names = {"x"};
    m.target = y;
    m.dates.assign(y.size(), Date{2020, 1, 1});
    return m;
}

FeatureMatrix matrix_from(const std::vector<std::vector<double>>& columns,
                          const std::vector<double>& y) {
    FeatureMatrix m;
    m.columns = columns;
    m.target = y;
    for (std::size_t j = 0; j < columns.size(); ++j) m.column_names.push_back("x" + std::to_string(j));
    m.dates.assign(y.size(), Date{2020, 1, 1});
    return m;
}

// box constraints, complementary slackness, and weight reconstruction
void check_kkt(const SvrModel& model, const FeatureMatrix& m) {
    const double C = model.params.cost;
    const double eps = model.params.epsilon;
    const auto fitted = predict(model, m);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double beta = model.dual_coefficients[i];
        CHECK(std::abs(beta) <= C + 1e-6);
        const double resid = std::abs(m.target[i] - fitted[i]);
        if (resid < eps - 1e-6) CHECK(std::abs(beta) <= 1e-6);
    }
    for (std::size_t k = 0; k < m.cols(); ++k) {
        double wk = 0.0;
        for (std::size_t i = 0; i < m.rows(); ++i) {
            wk += model.dual_coefficients[i] * m.columns[k][i];
        }
        CHECK(model.weights[k] == doctest::Approx(wk).epsilon(1e-10));
    }
}

} // namespace

TEST_CASE("svr: constant target collapses to the bias with no support vectors") {
    const auto m = matrix_1d({1.0, 2.0, 3.0, 4.0}, {5.5, 5.5, 5.5, 5.5});
    SvrParams p;
    p.epsilon = 0.1;
    const auto model = fit_svr(m, p);
    CHECK(model.weights[0] == 0.0);
    CHECK(model.bias == doctest::Approx(5.5).epsilon(1e-12));
    CHECK(model.support.empty());
    CHECK(model.converged);
    CHECK(model.iterations == 0);
}

TEST_CASE("svr: prediction is w.x + b") {
    SvrModel model;
    model.weights = {2.0};
    model.bias = 1.0;
    model.column_names = {"x"};
    auto m = matrix_1d({3.0}, {0.0});
    CHECK(predict(model, m)[0] == doctest::Approx(7.0));
}

TEST_CASE("svr: six-point fixture matches the grid-search oracle") {
    const std::vector<double> x = {-1.0, -0.4, 0.1, 0.6, 1.3, 2.0};
    const std::vector<double> y = {-0.9, -0.1, 0.4, 0.5, 1.6, 2.1};
    const auto m = matrix_1d(x, y);
    SvrParams p;
    p.cost = 1.0;
    p.epsilon = 0.1;
    p.tol = 1e-10;
    const auto model = fit_svr(m, p);
    REQUIRE(model.converged);

    const auto best = oracle::svr_minimize_1d(x, y, p.cost, p.epsilon);
    const double got = oracle::svr_primal_1d(x, y, model.weights[0], model.bias, p.cost, p.epsilon);
    CHECK(got <= best.objective + 1e-4);
    CHECK(got >= best.objective - 1e-4); // the oracle is itself a minimizer
    check_kkt(model, m);
}

TEST_CASE("svr: random eight-point problems match the oracle and satisfy kkt") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        CAPTURE(seed);
        Rng rng(500 + seed);
        std::vector<double> x(8), y(8);
        for (std::size_t i = 0; i < 8; ++i) {
            x[i] = rng.uniform(-2.0, 2.0);
            y[i] = 0.8 * x[i] + rng.normal() * 0.4;
        }
        const auto m = matrix_1d(x, y);
        SvrParams p;
        p.cost = 1.0 + 0.25 * static_cast<double>(seed % 4);
        p.epsilon = 0.05 + 0.05 * static_cast<double>(seed % 3);
        p.tol = 1e-10;
        const auto model = fit_svr(m, p);
        REQUIRE(model.converged);

        const auto best = oracle::svr_minimize_1d(x, y, p.cost, p.epsilon);
        const double got =
            oracle::svr_primal_1d(x, y, model.weights[0], model.bias, p.cost, p.epsilon);
        CHECK(got <= best.objective + 1e-4);
        check_kkt(model, m);
    }
}

TEST_CASE("svr: zero epsilon and a large budget interpolate exact linear data") {
    std::vector<double> x(12), y(12);
    for (std::size_t i = 0; i < 12; ++i) {
        x[i] = -1.0 + static_cast<double>(i) / 5.5;
        y[i] = 2.0 * x[i] + 1.0;
    }
    const auto m = matrix_1d(x, y);
    SvrParams p;
    p.cost = 1e6;
    p.epsilon = 0.0;
    p.tol = 1e-10;
    const auto model = fit_svr(m, p);
    CHECK(model.weights[0] == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(model.bias == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("svr: support indices are exactly the rows with nonzero duals") {
    Rng rng(42);
    std::vector<double> x(30), y(30);
    for (std::size_t i = 0; i < 30; ++i) {
        x[i] = rng.uniform(-1.0, 1.0);
        y[i] = 1.5 * x[i] + rng.normal() * 0.2;
    }
    const auto m = matrix_1d(x, y);
    SvrParams p;
    p.epsilon = 0.3;
    p.tol = 1e-8;
    const auto model = fit_svr(m, p);
    REQUIRE(model.converged);

    std::vector<std::size_t> nonzero;
    for (std::size_t i = 0; i < 30; ++i) {
        if (model.dual_coefficients[i] != 0.0) nonzero.push_back(i);
    }
    CHECK(model.support == nonzero);
    CHECK(model.support.size() < 30); // the wide tube must swallow some rows
    check_kkt(model, m);
}

TEST_CASE("svr: multi-feature fit beats random local perturbations") {
    Rng rng(77);
    auto columns = synthetic::random_columns(rng, 40, 3);
    const auto y = synthetic::linear_response(rng, columns, {1.0, -0.5, 0.25}, 0.3, 0.1);
    const auto m = matrix_from(columns, y);
    SvrParams p;
    p.cost = 2.0;
    p.epsilon = 0.05;
    p.tol = 1e-10;
    const auto model = fit_svr(m, p);
    REQUIRE(model.converged);
    check_kkt(model, m);

    const auto primal = [&](const std::vector<double>& w, double b) {
        double obj = 0.0;
        for (double wk : w) obj += 0.5 * wk * wk;
        for (std::size_t i = 0; i < m.rows(); ++i) {
            double f = b;
            for (std::size_t k = 0; k < 3; ++k) f += w[k] * columns[k][i];
            obj += p.cost * std::max(0.0, std::abs(y[i] - f) - p.epsilon);
        }
        return obj;
    };
    const double ours = primal(model.weights, model.bias);
    for (double scale : {1e-3, 1e-2, 1e-1}) {
        for (int trial = 0; trial < 200; ++trial) {
            auto w = model.weights;
            for (auto& wk : w) wk += rng.normal() * scale;
            const double b = model.bias + rng.normal() * scale;
            CHECK(primal(w, b) >= ours - 1e-6);
        }
    }
}

TEST_CASE("svr: row permutation leaves the solution unchanged") {
    Rng rng(99);
    std::vector<double> x(25), y(25);
    for (std::size_t i = 0; i < 25; ++i) {
        x[i] = rng.uniform(-2.0, 2.0);
        y[i] = 0.7 * x[i] - 0.2 + rng.normal() * 0.15;
    }
    const auto m = matrix_1d(x, y);
    SvrParams p;
    p.epsilon = 0.1;
    p.tol = 1e-10;
    const auto base = fit_svr(m, p);

    std::vector<std::size_t> order(25);
    for (std::size_t i = 0; i < 25; ++i) order[i] = i;
    Rng shuffle_rng(7);
    shuffle_rng.shuffle(order);
    std::vector<double> xp(25), yp(25);
    for (std::size_t i = 0; i < 25; ++i) {
        xp[i] = x[order[i]];
        yp[i] = y[order[i]];
    }
    const auto permuted = fit_svr(matrix_1d(xp, yp), p);
    CHECK(base.weights[0] == doctest::Approx(permuted.weights[0]).epsilon(1e-6));
    CHECK(base.bias == doctest::Approx(permuted.bias).epsilon(1e-6));
}

TEST_CASE("svr: single row gives an intercept-only model") {
    const auto m = matrix_1d({3.0}, {4.5});
    const auto model = fit_svr(m, SvrParams{});
    CHECK(model.weights[0] == 0.0);
    CHECK(model.bias == 4.5);
    CHECK(model.support.empty());
    CHECK(model.converged);
}

TEST_CASE("svr: exhausted pass budget flags the model instead of throwing") {
    Rng rng(11);
    std::vector<double> x(50), y(50);
    for (std::size_t i = 0; i < 50; ++i) {
        x[i] = rng.uniform(-1.0, 1.0);
        y[i] = std::sin(3.0 * x[i]) + rng.normal() * 0.05;
    }
    const auto m = matrix_1d(x, y);
    SvrParams p;
    p.cost = 100.0;
    p.epsilon = 0.001;
    p.tol = 1e-14;
    p.max_passes = 1;
    const auto model = fit_svr(m, p);
    CHECK_FALSE(model.converged);
    CHECK(model.iterations == 100); // one sweep = 2N pair updates
    // a starved solve still honors the box and the weight reconstruction
    for (std::size_t i = 0; i < 50; ++i) {
        CHECK(std::abs(model.dual_coefficients[i]) <= p.cost + 1e-12);
    }
    double w0 = 0.0;
    for (std::size_t i = 0; i < 50; ++i) w0 += model.dual_coefficients[i] * x[i];
    CHECK(model.weights[0] == doctest::Approx(w0).epsilon(1e-10));
}

TEST_CASE("svr: input validation") {
    FeatureMatrix empty;
    empty.column_names = {"x"};
    empty.columns = {{}};
    CHECK_THROWS_AS(fit_svr(empty, SvrParams{}), Error);

    auto m = matrix_1d({1.0, 2.0}, {1.0, std::nan("")});
    try {
        fit_svr(m, SvrParams{});
        FAIL("expected error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NonFiniteInput);
    }

    auto ok = matrix_1d({1.0, 2.0}, {1.0, 2.0});
    SvrParams bad;
    bad.cost = 0.0;
    CHECK_THROWS_AS(fit_svr(ok, bad), Error);
    bad = SvrParams{};
    bad.epsilon = -0.1;
    CHECK_THROWS_AS(fit_svr(ok, bad), Error);
    bad = SvrParams{};
    bad.max_passes = 0;
    CHECK_THROWS_AS(fit_svr(ok, bad), Error);

    const auto model = fit_svr(ok, SvrParams{});
    auto renamed = ok;
    renamed.column_names = {"zzz"};
    CHECK_THROWS_AS(predict(model, renamed), Error);
}
