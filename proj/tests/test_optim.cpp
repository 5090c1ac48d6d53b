/// Adam bias-correction algebra and L-BFGS convergence on quadratics and
/// Rosenbrock, including the line-search failure path.

#include <cmath>
#include <random>

#include "doctest.h"
#include "qpinn/optim.hpp"

using namespace qpinn;

TEST_SUITE_BEGIN("optim");

TEST_CASE("adam leaves parameters alone on zero gradient from reset state") {
    AdamState st(3);
    std::vector<double> p = {1.0, -2.0, 0.5};
    const std::vector<double> g(3, 0.0);
    adam_step(st, p, g);
    CHECK(p == std::vector<double>{1.0, -2.0, 0.5});
}

TEST_CASE("adam first step matches the bias-corrected closed form") {
    AdamConfig cfg;
    AdamState st(4, cfg);
    std::vector<double> p = {0.0, 1.0, -3.0, 2.0};
    const std::vector<double> p0 = p;
    const std::vector<double> g = {0.5, -2.0, 1e-3, 40.0};
    adam_step(st, p, g);
    for (int i = 0; i < 4; ++i) {
        // m_hat = g, v_hat = g^2 after one step: update = lr g / (|g| + eps)
        const double want = cfg.lr * g[i] / (std::abs(g[i]) + cfg.eps);
        CHECK(std::abs(std::abs(p[i] - p0[i]) - std::abs(want)) <= 1e-12);
        // direction is -sign(g)
        CHECK((p[i] - p0[i]) * g[i] <= 0.0);
    }
}

TEST_CASE("momentum accumulates: two steps differ from one at doubled lr") {
    const std::vector<double> g = {1.0, -0.5};
    AdamState two(2);
    std::vector<double> p_two = {0.0, 0.0};
    adam_step(two, p_two, g);
    adam_step(two, p_two, g);

    AdamConfig doubled;
    doubled.lr *= 2.0;
    AdamState one(2, doubled);
    std::vector<double> p_one = {0.0, 0.0};
    adam_step(one, p_one, g);

    CHECK(p_two[0] != p_one[0]);
}

TEST_CASE("lr decay schedule shrinks later steps") {
    AdamConfig cfg;
    cfg.lr_decay = 0.5;
    AdamState st(1, cfg);
    std::vector<double> p = {0.0};
    const std::vector<double> g = {1.0};
    adam_step(st, p, g);
    const double first = std::abs(p[0]);
    std::vector<double> p2 = {0.0};
    AdamState st2(1, cfg);
    st2.step_count = 1;  // as if one step had already happened
    adam_step(st2, p2, g);
    CHECK(std::abs(p2[0]) < first);
}

namespace {

// f(x) = 0.5 x^T A x - b^T x with SPD A
struct Quadratic {
    std::vector<std::vector<double>> A;
    std::vector<double> b;

    static Quadratic random(std::mt19937_64& rng, int n) {
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        std::vector<std::vector<double>> M(n, std::vector<double>(n));
        for (auto& row : M)
            for (double& x : row) x = u(rng);
        Quadratic q;
        q.A.assign(n, std::vector<double>(n, 0.0));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                for (int k = 0; k < n; ++k) q.A[i][j] += M[k][i] * M[k][j];
                if (i == j) q.A[i][j] += 0.5;  // safely positive definite
            }
        q.b.resize(n);
        for (double& x : q.b) x = u(rng);
        return q;
    }

    double eval(std::span<const double> x, std::span<double> g) const {
        const int n = static_cast<int>(b.size());
        double f = 0.0;
        for (int i = 0; i < n; ++i) {
            double Ax = 0.0;
            for (int j = 0; j < n; ++j) Ax += A[i][j] * x[j];
            g[i] = Ax - b[i];
            f += 0.5 * x[i] * Ax - b[i] * x[i];
        }
        return f;
    }

    std::vector<double> minimizer() const {
        // solve A x = b by Gaussian elimination; A is small and SPD
        const int n = static_cast<int>(b.size());
        std::vector<std::vector<double>> M = A;
        std::vector<double> rhs = b;
        for (int c = 0; c < n; ++c) {
            int piv = c;
            for (int r = c + 1; r < n; ++r)
                if (std::abs(M[r][c]) > std::abs(M[piv][c])) piv = r;
            std::swap(M[c], M[piv]);
            std::swap(rhs[c], rhs[piv]);
            for (int r = c + 1; r < n; ++r) {
                const double f = M[r][c] / M[c][c];
                for (int k = c; k < n; ++k) M[r][k] -= f * M[c][k];
                rhs[r] -= f * rhs[c];
            }
        }
        std::vector<double> x(n);
        for (int r = n - 1; r >= 0; --r) {
            double s = rhs[r];
            for (int k = r + 1; k < n; ++k) s -= M[r][k] * x[k];
            x[r] = s / M[r][r];
        }
        return x;
    }
};

}  // namespace

TEST_CASE("lbfgs solves a 2-D convex quadratic within 10 iterations") {
    std::mt19937_64 rng(31);
    const Quadratic q = Quadratic::random(rng, 2);
    const auto xstar = q.minimizer();
    LbfgsState st(2);
    std::vector<double> x = {4.0, -3.0};
    const LossFn fn = [&](std::span<const double> p, std::span<double> g) {
        return q.eval(p, g);
    };
    for (int it = 0; it < 10; ++it) lbfgs_step(st, x, fn);
    CHECK(std::abs(x[0] - xstar[0]) <= 1e-8);
    CHECK(std::abs(x[1] - xstar[1]) <= 1e-8);
}

TEST_CASE("first iteration moves along steepest descent") {
    std::mt19937_64 rng(5);
    const Quadratic q = Quadratic::random(rng, 3);
    LbfgsState st(3);
    std::vector<double> x = {1.0, 2.0, -1.0};
    std::vector<double> g0(3);
    q.eval(x, g0);
    const std::vector<double> x0 = x;
    const LossFn fn = [&](std::span<const double> p, std::span<double> g) {
        return q.eval(p, g);
    };
    lbfgs_step(st, x, fn);
    // displacement is collinear with -g0
    const double d0 = x[0] - x0[0], d1 = x[1] - x0[1], d2 = x[2] - x0[2];
    const double cross01 = d0 * g0[1] - d1 * g0[0];
    const double cross12 = d1 * g0[2] - d2 * g0[1];
    CHECK(std::abs(cross01) <= 1e-12 * std::abs(d0 * g0[1]) + 1e-12);
    CHECK(std::abs(cross12) <= 1e-12 * std::abs(d1 * g0[2]) + 1e-12);
    CHECK(d0 * g0[0] < 0.0);
}

TEST_CASE("exact line search terminates on SPD quadratics within n+2 steps") {
    std::mt19937_64 rng(77);
    for (const int n : {2, 4, 7, 10}) {
        CAPTURE(n);
        const Quadratic q = Quadratic::random(rng, n);
        LbfgsConfig cfg;
        cfg.line_search = LbfgsConfig::LineSearch::ExactQuadratic;
        cfg.history = 10;
        LbfgsState st(n, cfg);
        std::vector<double> x(n, 2.0);
        const LossFn fn = [&](std::span<const double> p, std::span<double> g) {
            return q.eval(p, g);
        };
        double gnorm = 1.0;
        for (int it = 0; it < n + 2 && gnorm > 1e-10; ++it) {
            lbfgs_step(st, x, fn);
            std::vector<double> g(n);
            q.eval(x, g);
            gnorm = 0.0;
            for (double v : g) gnorm = std::max(gnorm, std::abs(v));
        }
        CHECK(gnorm <= 1e-10);
    }
}

TEST_CASE("lbfgs drives Rosenbrock below 1e-6 within 200 iterations") {
    const LossFn rosen = [](std::span<const double> p, std::span<double> g) {
        const double x = p[0], y = p[1];
        g[0] = -2.0 * (1.0 - x) - 400.0 * x * (y - x * x);
        g[1] = 200.0 * (y - x * x);
        return (1.0 - x) * (1.0 - x) + 100.0 * (y - x * x) * (y - x * x);
    };
    LbfgsState st(2);
    std::vector<double> x = {-1.2, 1.0};
    double loss = 1.0;
    int used = 0;
    for (; used < 200 && loss > 1e-6; ++used) loss = lbfgs_step(st, x, rosen).loss;
    CHECK(loss <= 1e-6);
    CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-2));
    CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-2));
    MESSAGE("rosenbrock iterations: ", used);
}

TEST_CASE("zero gradient leaves parameters unchanged") {
    LbfgsState st(2);
    std::vector<double> x = {3.0, -1.0};
    const LossFn flat = [](std::span<const double>, std::span<double> g) {
        g[0] = 0.0;
        g[1] = 0.0;
        return 5.0;
    };
    const auto res = lbfgs_step(st, x, flat);
    CHECK_FALSE(res.step_taken);
    CHECK(x == std::vector<double>{3.0, -1.0});
    CHECK(res.note.find("zero gradient") != std::string::npos);
}

TEST_CASE("line-search failure skips the step and clears history") {
    // smooth at the start point but NaN everywhere else: no step can satisfy
    // the Wolfe conditions, so the optimizer must give up cleanly
    LbfgsState st(1);
    std::vector<double> x = {1.0};
    bool first = true;
    const LossFn trap = [&](std::span<const double> p, std::span<double> g) {
        g[0] = 2.0 * p[0];
        if (first) {
            first = false;
            return p[0] * p[0];
        }
        return std::nan("");
    };
    const auto res = lbfgs_step(st, x, trap);
    CHECK_FALSE(res.step_taken);
    CHECK(x[0] == 1.0);
    CHECK(res.note.find("line search failed") != std::string::npos);
    CHECK(st.pairs.empty());
}

TEST_CASE("stored curvature pairs satisfy s.y > 0") {
    std::mt19937_64 rng(9);
    const Quadratic q = Quadratic::random(rng, 5);
    LbfgsState st(5);
    std::vector<double> x(5, 1.5);
    const LossFn fn = [&](std::span<const double> p, std::span<double> g) {
        return q.eval(p, g);
    };
    for (int it = 0; it < 8; ++it) lbfgs_step(st, x, fn);
    for (std::size_t i = 0; i < st.pairs.size(); ++i) {
        const auto& [s, y] = st.pairs[i];
        double sy = 0.0;
        for (std::size_t k = 0; k < s.size(); ++k) sy += s[k] * y[k];
        CHECK(sy > 0.0);
    }
}

TEST_SUITE_END();
