#include <cmath>
#include <vector>

#include <lapacke.h>

#include "doctest.h"
#include "frontlab/error.hpp"
#include "frontlab/spectral.hpp"

using namespace frontlab;

namespace {

ReactionSpec kpp_with(const std::string& a_kind, std::vector<double> params) {
    ReactionConfig cfg;
    cfg.a_kind = a_kind;
    cfg.a_params = std::move(params);
    return validated(make_reaction(cfg), {-20.0, 20.0, 401, 101});
}

ReactionSpec constant_kpp(double a0 = 1.0) { return kpp_with("constant", {a0}); }
ReactionSpec gaussian_kpp() { return kpp_with("gaussian", {1.0, 0.5, 1.0}); }

// Top eigenvalue of the plain three-point Dirichlet matrix by LAPACK.
double dense_top(const std::function<double(double)>& a, double X, int intervals) {
    const double h = 2.0 * X / intervals;
    const int m = intervals - 1;
    std::vector<double> d(m), e(m - 1, 1.0 / (h * h));
    for (int i = 0; i < m; ++i) d[i] = -2.0 / (h * h) + a(-X + h * (i + 1));
    std::vector<double> w(m), z(1);
    std::vector<int> isuppz(2);
    int found = 0;
    const int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'N', 'I', m, d.data(), e.data(), 0.0, 0.0, m, m, 0.0,
                                    &found, w.data(), z.data(), 1, isuppz.data());
    REQUIRE(info == 0);
    REQUIRE(found == 1);
    return w[0];
}

// kappa tan kappa = mu, kappa^2 + mu^2 = depth, for a well of half-width 1.
double square_well_top(double base, double depth) {
    double lo = 1e-12, hi = std::min(std::sqrt(depth), M_PI / 2.0) - 1e-12;
    auto g = [depth](double k) { return k * std::tan(k) - std::sqrt(depth - k * k); };
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) < 0.0 ? lo : hi) = mid;
    }
    const double k = 0.5 * (lo + hi);
    return base + depth - k * k;
}

}  // namespace

TEST_CASE("lambda0 of a constant coefficient is the constant") {
    auto b = sup_spectrum(constant_kpp(), 100.0, 2000);
    CHECK(b.lambda0 == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(b.lambda0 <= 1.0);
    CHECK(b.history.size() == 3);
}

TEST_CASE("lambda0 for a gaussian bump against a dense tridiagonal eigensolver") {
    auto spec = gaussian_kpp();
    const double X = 20.0;
    const int n = 20000;  // mesh 2e-3
    const double oracle = dense_top(spec.a, X, n);
    // both solvers are accurate to about eps * ||T|| ~ 1e-10
    CHECK(dirichlet_top_eigenvalue(spec, X, n) == doctest::Approx(oracle).epsilon(1e-9));
    CHECK(oracle > 1.0);
    CHECK(oracle < 1.5);
    CHECK(oracle == doctest::Approx(1.1195655861).epsilon(1e-9));
    auto b = sup_spectrum(spec, X, 4000);
    CHECK(b.lambda0 == doctest::Approx(oracle).epsilon(1e-6));
    CHECK(b.lambda0 >= spec.bounds.a_minus);
    CHECK(b.lambda0 <= spec.bounds.a_plus);
}

TEST_CASE("lambda0 for a square well against the dispersion relation") {
    auto spec = kpp_with("indicator", {1.0, 0.5, 1.0});
    const double exact = square_well_top(1.0, 0.5);
    auto b = sup_spectrum(spec, 25.0, 2000);
    CHECK(b.lambda0 == doctest::Approx(exact).epsilon(1e-6));
}

TEST_CASE("lambda0 estimate is monotone in the window") {
    auto spec = gaussian_kpp();
    double prev = -1.0;
    for (double X : {2.0, 4.0, 8.0, 16.0}) {
        const double v = dirichlet_top_eigenvalue(spec, X, std::size_t(X * 200));
        CHECK(v >= prev - 1e-12);
        prev = v;
    }
}

TEST_CASE("constant coefficient eigenfunction is the exponential") {
    auto spec = constant_kpp();
    const double X = 40.0;
    auto pair = eigenfunction(spec, 1.5, X, intervals_for_mesh(X, 1e-2), {.lambda0 = 1.0});
    const std::size_t mid = pair.grid.n / 2;
    CHECK(pair.grid.x(mid) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(pair.phi[mid] == 1.0);
    const std::size_t i1 = mid + 100;
    CHECK(pair.grid.x(i1) == doctest::Approx(1.0));
    CHECK(std::abs(pair.phi[i1] - 0.49307) < 1e-5);
    double worst = 0.0;
    for (std::size_t i = 0; i < pair.grid.n; ++i) {
        const double x = pair.grid.x(i);
        if (std::abs(x) > 0.9 * X) continue;
        const double exact = std::exp(-x / std::sqrt(2.0));
        worst = std::max(worst, std::abs(pair.phi[i] / exact - 1.0));
    }
    CHECK(worst < 1e-6);
    CHECK(pair.alpha == doctest::Approx(0.5));
    auto gb = gradient_bound(spec, pair);
    CHECK(gb.pass);
    CHECK(std::abs(gb.worst_relative) < 1e-8);  // equality case
    CHECK(pair.residual < 1e-6);
}

TEST_CASE("doubling length of pure exponentials") {
    auto spec = constant_kpp();
    for (auto [lambda, expect] : {std::pair{1.5, std::sqrt(2.0) * std::log(2.0)}, std::pair{1.25, 2.0 * std::log(2.0)}}) {
        const double X = 20.0;
        auto pair = eigenfunction(spec, lambda, X, intervals_for_mesh(X, 1e-2));
        CHECK(std::abs(pair.doubling_length - expect) <= pair.grid.dx + 1e-12);
        CHECK(pair.doubling_length >= expect - 1e-12);
    }
}

TEST_CASE("gaussian eigenfunction: residual, gradient bound and mesh refinement") {
    auto spec = gaussian_kpp();
    const double lambda = 1.8, X = 20.0;
    auto coarse = eigenfunction(spec, lambda, X, intervals_for_mesh(X, 1e-2));
    auto fine = eigenfunction(spec, lambda, X, intervals_for_mesh(X, 5e-3));
    CHECK(coarse.residual < 1e-6);
    CHECK(gradient_bound(spec, coarse).pass);
    CHECK(coarse.gradient_margin <= 1e-10);
    CHECK(coarse.alpha == doctest::Approx(1.0 - (2.0 - 1.8) / 1.5));
    double worst = 0.0;
    for (std::size_t i = 0; i < coarse.grid.n; ++i) {
        if (std::abs(coarse.grid.x(i)) > 0.8 * X) continue;
        worst = std::max(worst, std::abs(coarse.phi[i] / fine.phi[2 * i] - 1.0));
    }
    CHECK(worst < 1e-6);

    // exhaustive pair scan
    const auto& p = coarse.phi;
    std::size_t kmin = 0;
    for (std::size_t k = 1; k < p.size() && kmin == 0; ++k) {
        bool all = true;
        for (std::size_t i = 0; i + k < p.size() && all; ++i)
            for (std::size_t j = i + k; j < p.size() && all; ++j) all = p[i] >= 2.0 * p[j];
        if (all) kmin = k;
    }
    CHECK(coarse.doubling_length == doctest::Approx(double(kmin) * coarse.grid.dx));
}

TEST_CASE("eigenfunction error paths") {
    auto spec = gaussian_kpp();
    const double lambda0 = sup_spectrum(spec, 20.0, 2000).lambda0;
    CHECK_THROWS_AS(eigenfunction(spec, lambda0 * 0.99, 20.0, 4000, {.lambda0 = lambda0}), Error);
    try {
        eigenfunction(spec, 1.05, 20.0, 4000);
        FAIL("expected failure below lambda0");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::no_decaying_solution);
    }
    try {
        eigenfunction(spec, 2.1, 20.0, 4000, {.require_below_threshold = true});
        FAIL("expected threshold error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::threshold);
    }
    auto pair = eigenfunction(constant_kpp(), 1.01, 2.0, 400);
    CHECK(std::isnan(pair.doubling_length));
    CHECK_THROWS_AS(doubling_length(pair), Error);
}
