#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "frontlab/error.hpp"
#include "frontlab/pde_sim.hpp"

using namespace frontlab;

namespace {

ReactionSpec make_spec(const std::string& kind, double beta, const std::string& a_kind, std::vector<double> a) {
    ReactionConfig cfg;
    cfg.kind = kind;
    cfg.beta = beta;
    cfg.a_kind = a_kind;
    cfg.a_params = std::move(a);
    return validated(make_reaction(cfg), {-20.0, 20.0, 401, 201});
}

struct Setup {
    ReactionSpec spec;
    LinearizedSolution v;
    ProfileTransforms tr;
    EnvelopeFields fields() const { return {&v, &tr}; }
};

Setup kpp_setup(double lambda, double X) {
    auto spec = make_spec("kpp", 0.0, "constant", {1.0});
    auto v = single_mode(eigenfunction(spec, lambda, X, intervals_for_mesh(X, 1e-2)));
    auto tr = build_transforms(spec, v.alpha());
    return {std::move(spec), std::move(v), std::move(tr)};
}

SimulationConfig slab_config(const Setup& s, double xl, double xr, double dx, double dt) {
    SimulationConfig c;
    c.x_left = xl;
    c.x_right = xr;
    c.dx = dx;
    c.dt = dt;
    std::tie(c.t0, c.t1) = auto_time_window(s.fields(), xl, xr, dx);
    return c;
}

}  // namespace

TEST_CASE("front position examples") {
    std::vector<double> x, u;
    for (int i = 0; i <= 4000; ++i) {
        x.push_back(-10.0 + i * 5e-3);
        u.push_back(std::min(std::exp(-x.back() / std::sqrt(2.0)), 1.0));
    }
    CHECK(front_position(x, u, 0.5) == doctest::Approx(std::sqrt(2.0) * std::log(2.0)).epsilon(1e-5));

    // unique crossing against bisection on the interpolant
    std::vector<double> w;
    for (double xi : x) w.push_back(1.0 / (1.0 + std::exp(xi - 0.3)));
    const double X = front_position(x, w, 0.5);
    double lo = -10.0, hi = 10.0;
    for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        const std::size_t i = std::min<std::size_t>(std::size_t((mid + 10.0) / 5e-3), x.size() - 2);
        const double val = w[i] + (w[i + 1] - w[i]) * (mid - x[i]) / (x[i + 1] - x[i]);
        (val > 0.5 ? lo : hi) = mid;
    }
    CHECK(X == doctest::Approx(lo).epsilon(1e-12));

    std::vector<double> bump;
    for (double xi : x) bump.push_back(std::exp(-(xi - 2.0) * (xi - 2.0) * std::log(2.0)));
    CHECK(front_position(x, bump, 0.5) == doctest::Approx(3.0).epsilon(1e-5));

    std::vector<double> flat(x.size(), 0.2);
    try {
        front_position(x, flat, 0.5);
        FAIL("expected front-absent");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::front_absent);
    }
}

TEST_CASE("front width examples") {
    std::vector<double> x, u1, u2;
    for (int i = 0; i <= 20000; ++i) {
        x.push_back(-5.0 + i * 5e-4);
        u1.push_back(std::min(std::exp(-x.back()), 1.0));
        u2.push_back(std::min(std::exp(-2.0 * x.back()), 1.0));
    }
    auto a = front_width(x, u1, 0.1), b = front_width(x, u2, 0.1);
    CHECK_FALSE(a.empty);
    CHECK(a.width == doctest::Approx(std::log(9.0)).epsilon(1e-6));
    CHECK(b.width == doctest::Approx(0.5 * a.width).epsilon(1e-6));
    std::vector<double> zero(x.size(), 0.0);
    auto c = front_width(x, zero, 0.1);
    CHECK(c.empty);
    CHECK(c.width == 0.0);
    CHECK_THROWS_AS(front_width(x, u1, 0.5), Error);
}

TEST_CASE("equilibria and constant states are fixed points") {
    auto spec = make_spec("cubic", 1.0, "gaussian", {1.0, 0.5, 1.0});
    const auto g = UniformGrid::spanning(-10.0, 10.0, 400);
    for (double theta : {0.0, 0.5, 1.0}) {
        Stepper st(spec, g, 0.05, theta);
        std::vector<double> zero(g.n, 0.0), one(g.n, 1.0);
        for (int k = 0; k < 50; ++k) {
            st.step(zero, 0.0, 0.0);
            st.step(one, 1.0, 1.0);
        }
        CHECK(*std::max_element(zero.begin(), zero.end()) == 0.0);
        CHECK(*std::min_element(one.begin(), one.end()) == 1.0);
        Stepper heat(spec, g, 0.05, theta, 0.0);
        std::vector<double> half(g.n, 0.5);
        for (int k = 0; k < 50; ++k) heat.step(half, 0.5, 0.5);
        for (double h : half) CHECK(h == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(st.clamp_count() == 0);
    }
}

TEST_CASE("step size beyond the order-preserving bound is rejected") {
    auto spec = make_spec("kpp", 0.0, "constant", {1.0});
    const auto g = UniformGrid::spanning(-10.0, 10.0, 200);
    const double bound = Stepper::monotone_dt(spec, g, 0.5, 1.0, 1.0);
    CHECK(bound == doctest::Approx(1.0 / 1.5));
    CHECK_NOTHROW(Stepper(spec, g, 0.99 * bound, 0.5));
    CHECK_THROWS_AS(Stepper(spec, g, 1.01 * bound, 0.5), Error);
}

TEST_CASE("discrete comparison principle on random ordered pairs") {
    auto spec = make_spec("cubic_modulated", 2.0, "sine", {1.0, 0.3, 1.0});
    const auto g = UniformGrid::spanning(-20.0, 20.0, 400);
    const double dt = Stepper::monotone_dt(spec, g, 0.5);
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int pair = 0; pair < 10; ++pair) {
        Stepper s1(spec, g, dt, 0.5), s2(spec, g, dt, 0.5);
        std::vector<double> lo(g.n), hi(g.n);
        for (std::size_t i = 0; i < g.n; ++i) {
            const double p = U(rng), q = U(rng);
            lo[i] = std::min(p, q);
            hi[i] = std::max(p, q);
        }
        const double bl = std::min(lo.front(), hi.front()), br = std::min(lo.back(), hi.back());
        bool ordered = true;
        for (int k = 0; k < 200; ++k) {
            s1.step(lo, bl, br);
            s2.step(hi, bl + 0.1 * U(rng) * (1.0 - bl), br);
            for (std::size_t i = 0; i < g.n; ++i) ordered = ordered && lo[i] <= hi[i];
        }
        CHECK(ordered);
        CHECK(s1.clamp_count() == 0);
        CHECK(s2.clamp_count() == 0);
    }
}

TEST_CASE("one-ulp perturbations keep their order through rounding") {
    for (double theta : {0.0, 0.5}) {
        auto spec = make_spec("cubic", 1.0, "gaussian", {1.0, 0.5, 1.0});
        const auto g = UniformGrid::spanning(-20.0, 20.0, 400);
        const double dt = Stepper::monotone_dt(spec, g, theta);
        Stepper s1(spec, g, dt, theta), s2(spec, g, dt, theta);
        std::mt19937 rng(7);
        std::uniform_real_distribution<double> U(0.0, 1.0);
        std::vector<double> lo(g.n), hi(g.n);
        for (std::size_t i = 0; i < g.n; ++i) {
            lo[i] = 0.999 + 0.001 * U(rng);
            hi[i] = U(rng) < 0.5 ? std::nextafter(lo[i], 2.0) : lo[i];
        }
        bool ordered = true;
        for (int k = 0; k < 1000; ++k) {
            s1.step(lo, lo.front(), lo.back());
            s2.step(hi, hi.front(), hi.back());
            for (std::size_t i = 0; i < g.n; ++i) ordered = ordered && lo[i] <= hi[i];
        }
        CHECK(ordered);
    }
}

TEST_CASE("KPP run stays in the sandwich, increases in time, and moves at lambda/sqrt(lambda-1)") {
    auto s = kpp_setup(1.5, 70.0);
    auto cfg = slab_config(s, -60.0, 60.0, 2e-2, 6.25e-4);
    auto sol = run(s.spec, s.fields(), cfg);
    CHECK(sol.clamp_count == 0);
    CHECK(sol.min_step_increment >= -1e-8);
    const std::size_t m = sol.times.size(), n = sol.x.size();
    double worst = 0.0;
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t i = 10; i + 10 < n; ++i) {
            worst = std::max(worst, sol.lower[j][i] - sol.u[j][i]);
            worst = std::max(worst, sol.u[j][i] - sol.upper[j][i]);
            CHECK(sol.u[j][i] >= 0.0);
            CHECK(sol.u[j][i] <= 1.0);
        }
    CHECK(worst <= 1e-4);
    auto est = speed_estimate(sol);
    CHECK(est.speed == doctest::Approx(1.5 / std::sqrt(0.5)).epsilon(5e-3));
    CHECK(std::abs(est.drift) < 1e-2);
    CHECK(summary_json(sol)["steps"] == sol.steps);
}

TEST_CASE("self-convergence under (dx, dt) -> (dx/2, dt/4) is second order") {
    auto s = kpp_setup(1.5, 40.0);
    auto base = slab_config(s, -30.0, 30.0, 0.1, 0.1);
    base.snapshots = 11;
    std::vector<FrontSolution> runs;
    for (int level = 0; level < 4; ++level) {
        auto c = base;
        c.dx = 0.1 / std::pow(2.0, level);
        c.dt = 0.1 / std::pow(4.0, level);
        runs.push_back(run(s.spec, s.fields(), c));
    }
    auto diff = [&](const FrontSolution& a, const FrontSolution& b) {
        const std::size_t r = (b.full_nodes - 1) / (a.full_nodes - 1);
        double d = 0.0;
        for (std::size_t i = 10; i + 10 < a.x.size(); ++i) d = std::max(d, std::abs(a.u.back()[i] - b.u.back()[i * r]));
        return d;
    };
    const double e1 = diff(runs[1], runs[2]), e2 = diff(runs[2], runs[3]);
    const double C = e2 / (0.025 * 0.025);
    MESSAGE("self-convergence C = " << C << ", observed order " << std::log2(e1 / e2));
    CHECK(std::log2(e1 / e2) > 1.7);
    CHECK(e1 <= 2.0 * C * 0.05 * 0.05);
}

TEST_CASE("translating the seed translates the front") {
    auto spec = make_spec("kpp", 0.0, "constant", {1.0});
    const auto g = UniformGrid::spanning(-40.0, 40.0, 4000);
    const std::size_t shift = 150;
    Stepper s1(spec, g, 0.02, 0.5), s2(spec, g, 0.02, 0.5);
    std::vector<double> u1(g.n), u2(g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
        u1[i] = 1.0 / (1.0 + std::exp(2.0 * (g.x(i) + 15.0)));
        u2[i] = i >= shift ? u1[i - shift] : 1.0;
    }
    const auto xs = g.nodes();
    for (int k = 0; k < 500; ++k) {
        s1.step(u1, 1.0, 0.0);
        s2.step(u2, 1.0, 0.0);
    }
    const double X1 = front_position(xs, u1, 0.5), X2 = front_position(xs, u2, 0.5);
    CHECK(std::abs((X2 - X1) - double(shift) * g.dx) <= g.dx);
}

TEST_CASE("reaction switched off leaves no front") {
    auto s = kpp_setup(1.5, 70.0);
    auto cfg = slab_config(s, -60.0, 60.0, 5e-2, 5e-2);
    auto on = run(s.spec, s.fields(), cfg);
    cfg.reaction_scale = 0.0;
    auto off = run(s.spec, s.fields(), cfg);
    const double X_on = front_position(on.x, on.u.back(), 0.5), X_off = front_position(off.x, off.u.back(), 0.5);
    const double X_start = front_position(off.x, off.u.front(), 0.5);
    CHECK(X_on - X_start > 50.0);
    CHECK(X_off - X_start < 10.0);
    // relaxation makes the profile flatter, never steeper
    CHECK(front_width(off.x, off.u.back(), 0.1).width > front_width(off.x, off.u.front(), 0.1).width);
}

TEST_CASE("front leaving the domain raises domain-exhausted") {
    auto s = kpp_setup(1.5, 70.0);
    auto cfg = slab_config(s, -60.0, 60.0, 5e-2, 5e-2);
    cfg.t1 += 30.0;
    try {
        run(s.spec, s.fields(), cfg);
        FAIL("expected domain-exhausted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::domain_exhausted);
    }
    cfg.x_right = 80.0;
    CHECK_THROWS_AS(run(s.spec, s.fields(), cfg), Error);
}
