#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "frontlab/error.hpp"
#include "frontlab/verify.hpp"

using namespace frontlab;

namespace {

ReactionSpec make_spec(const std::string& kind, double beta) {
    ReactionConfig cfg;
    cfg.kind = kind;
    cfg.beta = beta;
    return validated(make_reaction(cfg), {-20.0, 20.0, 401, 201});
}

struct Case {
    ReactionSpec spec;
    LinearizedSolution v;
    ProfileTransforms tr;
    FrontSolution sol;
};

Case simulate(const std::string& kind, double beta, double lambda, double dx, double dt) {
    auto spec = make_spec(kind, beta);
    auto v = single_mode(eigenfunction(spec, lambda, 70.0, intervals_for_mesh(70.0, 1e-2)));
    auto tr = build_transforms(spec, v.alpha());
    EnvelopeFields f{&v, &tr};
    SimulationConfig c;
    c.x_left = -60.0;
    c.x_right = 60.0;
    c.dx = dx;
    c.dt = dt;
    std::tie(c.t0, c.t1) = auto_time_window(f, c.x_left, c.x_right, dx);
    auto sol = run(spec, f, c);
    return {std::move(spec), std::move(v), std::move(tr), std::move(sol)};
}

const Case& kpp() {
    static const Case c = simulate("kpp", 0.0, 1.5, 2e-2, 6.25e-4);
    return c;
}

const Case& quadratic() {
    static const Case c = simulate("cubic", 1.0, 1.1, 2e-2, 2.5e-3);
    return c;
}

FrontSolution synthetic(std::vector<std::vector<double>> u) {
    FrontSolution s;
    for (std::size_t i = 0; i < u.front().size(); ++i) s.x.push_back(-5.0 + 0.1 * double(i));
    for (std::size_t j = 0; j < u.size(); ++j) s.times.push_back(double(j));
    s.u = u;
    s.lower = s.upper = s.v = u;
    s.dx = 0.1;
    s.t0 = 0.0;
    s.t1 = double(u.size() - 1);
    return s;
}

}  // namespace

TEST_CASE("sandwich: KPP run passes, seed is tight, reversed envelopes fail") {
    const auto& c = kpp();
    auto rec = check_sandwich(c.sol, 1e-4);
    CHECK(rec.pass);
    CHECK(c.sol.u.front() == c.sol.lower.front());
    auto reversed = c.sol;
    std::swap(reversed.lower, reversed.upper);
    auto bad = check_sandwich(reversed, 1e-4);
    CHECK_FALSE(bad.pass);
    CHECK(bad.worst_margin < 0.0);
    CHECK(check_sandwich(c.sol, 2e-4).pass);
}

TEST_CASE("monotone in time: run passes, stationary state is not strict, decreasing field fails") {
    auto m = check_monotone_time(kpp().sol, 1e-8);
    CHECK(m.record.pass);
    CHECK(m.strict);
    std::vector<std::vector<double>> ones(5, std::vector<double>(101, 1.0));
    auto s = check_monotone_time(synthetic(ones), 1e-8, {0.0, 0.0, 0.0});
    CHECK(s.record.worst_margin == 0.0);
    CHECK_FALSE(s.strict);
    std::vector<std::vector<double>> dec;
    for (int j = 0; j < 5; ++j) dec.emplace_back(101, 1.0 - 0.1 * j);
    CHECK_FALSE(check_monotone_time(synthetic(dec), 1e-8).record.pass);
}

TEST_CASE("width bound formula and measured widths") {
    const auto& c = kpp();
    const double L = c.v.doubling_length();
    // grid-resolved, never below the exact halving distance
    CHECK(L >= std::log(2.0) / std::sqrt(0.5));
    CHECK(L <= std::log(2.0) / std::sqrt(0.5) + 1e-2);
    double prev_lit = 1e300, prev_ratio = 1e300;
    for (double eps : {0.05, 0.1, 0.2, 0.3, 0.4, 0.45, 0.49}) {
        auto b = width_bound(eps, L, c.tr);
        CHECK(b.literal <= prev_lit);
        CHECK(b.ratio <= prev_ratio);
        prev_lit = b.literal;
        prev_ratio = b.ratio;
    }
    CHECK_THROWS_AS(width_bound(0.5, L, c.tr), Error);
    auto w = check_width(c.sol, 0.1, L, c.tr);
    MESSAGE("KPP width " << w.max_width << " literal " << w.bound.literal << " ratio " << w.bound.ratio);
    CHECK(w.max_width <= w.bound.ratio);
    auto q = check_width(quadratic().sol, 0.1, quadratic().v.doubling_length(), quadratic().tr);
    MESSAGE("u(1+u) width " << q.max_width << " literal " << q.bound.literal << " ratio " << q.bound.ratio);
    CHECK(q.max_width <= q.bound.ratio);
}

TEST_CASE("ratio limit through the envelopes") {
    const auto& c = kpp();
    // tail decay of the discrete solution differs from phi by O(dx^2) per unit length
    auto rec = check_ratio_limit(c.sol, c.tr, 1e-3, 1e-3);
    CHECK(rec.pass);
    for (double v : {1e-6, 1e-5, 1e-4, 1e-3}) {
        CHECK(c.tr.h(v) / v == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(std::abs(c.tr.ht(v) / v - 1.0) <= std::abs(c.tr.dht(1e-12) - 1.0) + c.tr.curvature_bound(1e-3) * v);
    }
    CHECK(check_ratio_limit(quadratic().sol, quadratic().tr, 1e-3, 5e-3).pass);
    auto none = check_ratio_limit(c.sol, c.tr, 1e-300, 1e-4);
    CHECK_FALSE(none.pass);
    CHECK(none.detail.find("inconclusive") != std::string::npos);
}

TEST_CASE("front limits: implied by the sandwich, fail when the front sits at the edge") {
    for (const Case* c : {&kpp(), &quadratic()}) {
        for (double tol : {1e-4, 1e-3}) {
            if (check_sandwich(c->sol, tol).pass) CHECK(check_front_limits(c->sol, tol).pass);
        }
    }
    std::vector<std::vector<double>> edge;
    for (int j = 0; j < 5; ++j) {
        std::vector<double> row;
        for (int i = 0; i <= 100; ++i) row.push_back(0.5 * std::erfc(-5.0 + 0.1 * i + 5.5 - 0.1 * j));
        edge.push_back(row);
    }
    auto rec = check_front_limits(synthetic(edge), 1e-3, {0.0, 0.0, 0.0});
    CHECK_FALSE(rec.pass);
    CHECK(rec.detail.find("edge") != std::string::npos);
}

TEST_CASE("report lists every property once") {
    const auto& c = kpp();
    VerifyOptions o;
    o.sandwich_tol = 1e-4;
    auto rep = verify_all(c.sol, c.tr, c.v.doubling_length(), o, {"abc", c.sol.dx, c.sol.dt, c.sol.t0, c.sol.t1});
    std::vector<std::string> names;
    for (const auto& r : rep.records) names.push_back(r.name);
    CHECK(names == std::vector<std::string>{"sandwich", "monotone_time", "width", "ratio_limit", "front_limits"});
    auto j = rep.to_json();
    CHECK(j["provenance"]["config_hash"] == "abc");
    CHECK(j["records"].size() == 5);
    CHECK(rep.table().find("sandwich") != std::string::npos);
}

TEST_CASE("sandwich violations shrink under refinement") {
    auto coarse = simulate("cubic", 1.0, 1.1, 4e-2, 1e-2);
    auto fine = simulate("cubic", 1.0, 1.1, 2e-2, 2.5e-3);
    const double a = -std::min(check_sandwich(coarse.sol, 0.0).worst_margin, 0.0);
    const double b = -std::min(check_sandwich(fine.sol, 0.0).worst_margin, 0.0);
    MESSAGE("violations " << a << " -> " << b);
    CHECK(b <= 1.1 * a);
}
