#include <cmath>

#include "doctest.h"
#include "frontlab/error.hpp"
#include "frontlab/profile.hpp"

using namespace frontlab;

namespace {

const double alpha_nu2 = (std::sqrt(2.0) - 1.0) * (std::sqrt(2.0) - 1.0);

// Classical RK4 on U'' + cU' + g(U) = 0, returning V at the first U <= level.
double rk4_phase_value(const EnvelopeFunction& g, double c, double U, double V, double level) {
    const double h = 1e-3;
    auto F = [&](double u, double v, double& du, double& dv) {
        du = v;
        dv = -c * v - g.g(u);
    };
    double pu = U, pv = V;
    while (U > level) {
        double k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v;
        F(U, V, k1u, k1v);
        F(U + 0.5 * h * k1u, V + 0.5 * h * k1v, k2u, k2v);
        F(U + 0.5 * h * k2u, V + 0.5 * h * k2v, k3u, k3v);
        F(U + h * k3u, V + h * k3v, k4u, k4v);
        pu = U;
        pv = V;
        U += h / 6 * (k1u + 2 * k2u + 2 * k3u + k4u);
        V += h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
    }
    const double t = (pu - level) / (pu - U);
    return pv + t * (V - pv);
}

}  // namespace

TEST_CASE("wave speed") {
    CHECK(wave_speed(0.25, 1.0) == doctest::Approx(2.5));
    CHECK(wave_speed(0.99, 1.0) == doctest::Approx(std::sqrt(0.99) + 1.0 / std::sqrt(0.99)));
    CHECK(wave_speed(0.99, 1.0) >= 2.0);
    CHECK(wave_speed(alpha_nu2, 2.0) == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-14));
    CHECK_THROWS_AS(wave_speed(0.2, 2.0), Error);
    CHECK_THROWS_AS(wave_speed(1.0, 1.0), Error);
    try {
        wave_speed(0.0, 1.0);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::threshold);
    }
    for (double nu : {1.0, 1.5, 2.0, 5.0})
        CHECK(wave_speed(alpha_ceiling(nu) * 0.999, nu) >= 2.0 * std::sqrt(nu));
}

TEST_CASE("KPP super profile is the pure slow exponential and h is the identity") {
    auto sol = solve_super_profile(linear_envelope(), 0.25, 1.0);
    CHECK(std::abs(sol.s0) < 1e-9);
    CHECK(sol.A_tail == doctest::Approx(1.0).epsilon(1e-9));
    for (std::size_t i = 0; i < sol.U.size(); i += 97)
        CHECK(std::abs(sol.U[i] / std::exp(-0.5 * sol.s.x(i)) - 1.0) < 1e-8);
    auto tr = build_transforms(sol, solve_sub_profile(logistic_envelope(), 0.25, 1.0));
    double worst = 0.0;
    for (int k = 0; k <= 10000; ++k) {
        const double v = k / 10000.0;
        worst = std::max(worst, std::abs(tr.h(v) - v));
    }
    CHECK(worst < 1e-8);
    CHECK(tr.v_max() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("super profile for u(1+u) at the boundary alpha") {
    const auto g1 = quadratic_envelope(1.0);
    auto sol = solve_super_profile(g1, alpha_nu2, 2.0);
    CHECK(triangle_margin(sol) >= -1e-10);
    CHECK(convexity_margin(sol) >= -1e-10);
    CHECK(ode_residual(sol) <= 1e-8);
    CHECK(boundary_flux_margin(g1, sol.c) >= -1e-10);
    CHECK(sol.V.front() >= -sol.c / 2.0);
    CHECK(sol.U.front() == 1.0);
    CHECK(sol.s.front() == doctest::Approx(sol.s0));
    for (auto& r : profile_certificates(sol)) CHECK_MESSAGE(r.pass, r.name);

    // independent fixed-step integration of the same trajectory
    for (double level : {0.8, 0.5, 0.2, 0.05}) {
        const double ref = rk4_phase_value(g1, sol.c, 1.0, -std::sqrt(alpha_nu2) * 2.0, level);
        double got = 0;
        for (std::size_t i = 1; i < sol.U.size(); ++i)
            if (sol.U[i] <= level) {
                const double t = (sol.U[i - 1] - level) / (sol.U[i - 1] - sol.U[i]);
                got = sol.V[i - 1] + t * (sol.V[i] - sol.V[i - 1]);
                break;
            }
        CHECK(got == doctest::Approx(ref).epsilon(1e-5));
        CHECK(-ref >= std::sqrt(alpha_nu2) * g1.g(level));
    }
}

TEST_CASE("sub profile for the logistic envelope") {
    auto sub = solve_sub_profile(logistic_envelope(), 0.25, 1.0);
    const std::size_t n = sub.U.size();
    const double slope = (std::log(sub.U[n - 1]) - std::log(sub.U[n - 1001])) / (1000 * sub.s.dx);
    CHECK(slope == doctest::Approx(-0.5).epsilon(1e-4));
    CHECK(sub.r_plus == doctest::Approx(0.5 * (-2.5 + std::sqrt(6.25 + 4.0))));
    CHECK(convexity_margin(sub) >= -1e-10);
    auto tr = build_transforms(solve_super_profile(linear_envelope(), 0.25, 1.0), sub);
    CHECK(tr.dht(0.0) == doctest::Approx(1.0).epsilon(1e-6));
    // 1 - h~ decays like v^{-r+/sqrt(alpha)} = v^{-0.7016}; the normalised profile
    // gives 1 - h~(e^10) ~ 1.06e-3, which no construction can improve.
    const double p = sub.r_plus / 0.5;
    CHECK(1.0 - tr.ht(std::exp(10.0)) == doctest::Approx(1.0609e-3).epsilon(1e-3));
    CHECK((1.0 - tr.ht(std::exp(20.0))) / (1.0 - tr.ht(std::exp(10.0))) == doctest::Approx(std::exp(-10.0 * p)));
    CHECK(1.0 - tr.ht(std::exp(40.0)) < 1e-10);
    for (int k = 0; k <= 2000; ++k) {
        const double v = std::exp(-20.0 + 35.0 * k / 2000.0);
        CHECK(tr.ht(v) <= v + 1e-10);
        CHECK(tr.ht(v) < 1.0);
    }
}

TEST_CASE("transform contract for the acceptance envelope pair") {
    const double alpha = 0.157;
    ReactionConfig cfg;
    cfg.kind = "cubic";
    cfg.beta = 1.0;
    cfg.a_kind = "sine";
    cfg.a_params = {1.0, 0.05, 1.0};
    auto spec = validated(make_reaction(cfg), {-20.0, 20.0, 401, 201});
    auto tr = build_transforms(spec, alpha);
    for (auto& r : tr.certificates()) CHECK_MESSAGE(r.pass, r.name << " margin " << r.worst_margin);
    CHECK(tr.h(tr.v_max()) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(tr.dh(0.0) == doctest::Approx(1.0).epsilon(1e-6));
    for (int k = 0; k < 500; ++k) {
        const double v = tr.v_max() * std::exp(-25.0 * k / 500.0);
        CHECK(tr.d2h(v) >= 0.0);
    }
    for (double y : {1e-9, 1e-4, 0.1, 0.5, 0.9, 0.999}) {
        CHECK(tr.h(tr.h_inv(y)) == doctest::Approx(y).epsilon(1e-10));
        CHECK(tr.ht(tr.ht_inv(y)) == doctest::Approx(y).epsilon(1e-10));
    }
    CHECK(tr.h_inv(2.0) > tr.v_max());
    CHECK_THROWS_AS(tr.ht_inv(1.0), Error);
    CHECK_THROWS_AS(tr.h(-1.0), Error);
}

TEST_CASE("interpolant derivatives agree with centred differences") {
    const double alpha = 0.157;
    auto tr = build_transforms(solve_super_profile(quadratic_envelope(1.0), alpha, 2.0),
                               solve_sub_profile(logistic_envelope(), alpha, 2.0));
    for (int k = 1; k < 40; ++k) {
        const double v = tr.v_max() * std::exp(-6.0 * k / 40.0);
        const double e = 1e-3 * v;
        const double d1 = (tr.h(v + e) - tr.h(v - e)) / (2 * e);
        const double d2 = (tr.h(v + e) - 2 * tr.h(v) + tr.h(v - e)) / (e * e);
        CHECK(d1 == doctest::Approx(tr.dh(v)).epsilon(1e-5));
        CHECK(d2 == doctest::Approx(tr.d2h(v)).epsilon(1e-5));
        const double t1 = (tr.ht(v + e) - tr.ht(v - e)) / (2 * e);
        CHECK(t1 == doctest::Approx(tr.dht(v)).epsilon(1e-5));
    }
}

TEST_CASE("normalisation removes the launch translation") {
    const auto g1 = quadratic_envelope(1.0);
    auto a = solve_super_profile(g1, 0.157, 2.0);
    ProfileOptions shifted;
    shifted.s_start = 3.7;
    auto b = solve_super_profile(g1, 0.157, 2.0, shifted);
    auto sub = solve_sub_profile(logistic_envelope(), 0.157, 2.0);
    auto ta = build_transforms(a, sub), tb = build_transforms(b, sub);
    for (int k = 0; k <= 200; ++k) {
        const double v = ta.v_max() * std::exp(-20.0 * k / 200.0);
        CHECK(std::abs(ta.h(v) - tb.h(v)) <= 1e-8);
    }
}

TEST_CASE("degenerate g0'(1) = 0 uses launch continuation") {
    EnvelopeFunction g0{"u(1-u)^2", EnvelopeTag::lower, [](double u) { return u * (1 - u) * (1 - u); },
                        [](double u) { return (1 - u) * (1 - u) - 2 * u * (1 - u); }};
    try {
        auto sub = solve_sub_profile(g0, 0.25, 1.0);
        CHECK(sub.delta < 1e-2);
        CHECK(sub.U.front() < 1.0);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::degeneracy);
    }
}

TEST_CASE("wrong envelope tag is rejected") {
    CHECK_THROWS_AS(solve_super_profile(logistic_envelope(), 0.25, 1.0), Error);
    CHECK_THROWS_AS(solve_sub_profile(linear_envelope(), 0.25, 1.0), Error);
}
