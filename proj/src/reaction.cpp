#include "frontlab/reaction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

// Boost 1.74's pchip calls isnan unqualified.
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include "frontlab/error.hpp"

namespace frontlab {

namespace {

std::string point_text(double x, double u) {
    std::ostringstream os;
    os.precision(10);
    os << "(x=" << x << ", u=" << u << ")";
    return os.str();
}

std::string point_text(double x) {
    std::ostringstream os;
    os.precision(10);
    os << "x=" << x;
    return os.str();
}

double param(const std::vector<double>& p, std::size_t i, double fallback) {
    return i < p.size() ? p[i] : fallback;
}

// Brent minimisation of fn on [lo, hi]; returns (argmin, min).
template <class F>
std::pair<double, double> local_min(F fn, double lo, double hi) {
    if (!(hi > lo)) return {lo, fn(lo)};
    return boost::math::tools::brent_find_minima(fn, lo, hi, 40);
}

EnvelopeFunction envelope_by_kind(const std::string& kind, double beta) {
    if (kind == "logistic") return logistic_envelope();
    if (kind == "linear") return linear_envelope();
    if (kind == "quadratic") return quadratic_envelope(beta);
    throw Error(ErrorKind::config, "unknown envelope kind '" + kind + "'");
}

}  // namespace

EnvelopeFunction logistic_envelope() {
    return {"logistic", EnvelopeTag::lower, [](double u) { return u * (1.0 - u); },
            [](double u) { return 1.0 - 2.0 * u; }};
}

EnvelopeFunction linear_envelope() {
    return {"linear", EnvelopeTag::upper, [](double u) { return u; }, [](double) { return 1.0; }};
}

EnvelopeFunction quadratic_envelope(double beta) {
    return {"quadratic", EnvelopeTag::upper, [beta](double u) { return u * (1.0 + beta * u); },
            [beta](double u) { return 1.0 + 2.0 * beta * u; }};
}

double envelope_nu(const EnvelopeFunction& g1) {
    constexpr double u_floor = 1e-6;
    constexpr int n = 1001;
    auto ratio = [&](double u) { return g1(u) / u; };
    double best = g1.dg(0.0);
    double best_u = 0.0;
    int best_j = -1;
    for (int j = 0; j < n; ++j) {
        const double u = u_floor + (1.0 - u_floor) * j / (n - 1);
        const double r = ratio(u);
        if (r > best) {
            best = r;
            best_u = u;
            best_j = j;
        }
    }
    if (best_j >= 0) {
        const double step = (1.0 - u_floor) / (n - 1);
        const double lo = std::max(u_floor, best_u - step);
        const double hi = std::min(1.0, best_u + step);
        auto refined = local_min([&](double u) { return -ratio(u); }, lo, hi);
        best = std::max(best, -refined.second);
    }
    return best;
}

CoefficientField make_coefficient(const std::string& kind, const std::vector<double>& p) {
    CoefficientField field{kind, p, {}};
    if (kind == "constant") {
        const double c = param(p, 0, 1.0);
        field.value = [c](double) { return c; };
    } else if (kind == "gaussian") {
        const double base = param(p, 0, 1.0), amp = param(p, 1, 0.5), width = param(p, 2, 1.0);
        field.value = [=](double x) { return base + amp * std::exp(-(x / width) * (x / width)); };
    } else if (kind == "sine") {
        const double base = param(p, 0, 1.0), amp = param(p, 1, 0.0), k = param(p, 2, 1.0);
        field.value = [=](double x) { return base + amp * std::sin(k * x); };
    } else if (kind == "indicator") {
        const double base = param(p, 0, 1.0), amp = param(p, 1, 0.5), half = param(p, 2, 1.0);
        // Mean value on the jump itself keeps nodal discretisations symmetric.
        field.value = [=](double x) {
            const double r = std::abs(x);
            return base + (r < half ? amp : r == half ? 0.5 * amp : 0.0);
        };
    } else {
        throw Error(ErrorKind::config, "unknown coefficient kind '" + kind + "'");
    }
    return field;
}

ReactionSpec make_reaction(const ReactionConfig& cfg) {
    ReactionSpec spec;
    spec.name = cfg.kind;
    spec.a = make_coefficient(cfg.a_kind, cfg.a_params);
    const auto a = spec.a.value;
    const double beta = cfg.beta;

    if (cfg.kind == "kpp") {
        spec.f = [a](double x, double u) { return a(x) * u * (1.0 - u); };
        spec.f_u = [a](double x, double u) { return a(x) * (1.0 - 2.0 * u); };
        spec.kernel = [](long double, long double u) { return u * (1.0L - u); };
        spec.kernel_beta = 0.0;
        spec.g0 = logistic_envelope();
        spec.g1 = linear_envelope();
    } else if (cfg.kind == "cubic") {
        spec.f = [a, beta](double x, double u) { return a(x) * u * (1.0 - u) * (1.0 + beta * u); };
        spec.f_u = [a, beta](double x, double u) {
            // d/du [u + (beta-1)u^2 - beta u^3]
            return a(x) * (1.0 + 2.0 * (beta - 1.0) * u - 3.0 * beta * u * u);
        };
        spec.kernel = [beta](long double, long double u) { return u * (1.0L - u) * (1.0L + beta * u); };
        spec.kernel_beta = beta;
        spec.g0 = logistic_envelope();
        spec.g1 = quadratic_envelope(beta);
    } else if (cfg.kind == "cubic_modulated") {
        auto m = [](double x) { return 0.5 * (1.0 + std::sin(x)); };
        spec.f = [a, beta, m](double x, double u) {
            return a(x) * u * (1.0 - u) * (1.0 + beta * m(x) * u);
        };
        spec.f_u = [a, beta, m](double x, double u) {
            const double b = beta * m(x);
            return a(x) * (1.0 + 2.0 * (b - 1.0) * u - 3.0 * b * u * u);
        };
        spec.kernel = [beta](long double mx, long double u) { return u * (1.0L - u) * (1.0L + beta * mx * u); };
        spec.modulation = m;
        spec.kernel_beta = beta;
        spec.g0 = logistic_envelope();
        spec.g1 = quadratic_envelope(beta);
    } else if (cfg.kind == "tabulated") {
        if (cfg.table_u.size() < 4 || cfg.table_u.size() != cfg.table_f.size())
            throw Error(ErrorKind::config, "tabulated reaction needs >= 4 matching (u, f) samples");
        if (cfg.table_u.front() != 0.0 || cfg.table_u.back() != 1.0)
            throw Error(ErrorKind::config, "tabulated reaction must span u in [0, 1]");
        auto xs = cfg.table_u;
        auto ys = cfg.table_f;
        // Shape-preserving cubic with the unit slope at u = 0 imposed exactly.
        auto shape = std::make_shared<boost::math::interpolators::pchip<std::vector<double>>>(
            std::move(xs), std::move(ys), 1.0);
        spec.f = [a, shape](double x, double u) { return a(x) * (*shape)(std::clamp(u, 0.0, 1.0)); };
        spec.f_u = [a, shape](double x, double u) { return a(x) * shape->prime(std::clamp(u, 0.0, 1.0)); };
        spec.kernel = [shape](long double, long double u) {
            return static_cast<long double>((*shape)(std::clamp(double(u), 0.0, 1.0)));
        };
        if (cfg.g0_kind.empty() || cfg.g1_kind.empty())
            throw Error(ErrorKind::config, "tabulated reaction requires g0_kind and g1_kind");
    } else {
        throw Error(ErrorKind::config, "unknown reaction kind '" + cfg.kind + "'");
    }
    if (!cfg.g0_kind.empty()) spec.g0 = envelope_by_kind(cfg.g0_kind, beta);
    if (!cfg.g1_kind.empty()) spec.g1 = envelope_by_kind(cfg.g1_kind, beta);
    if (spec.g0.tag != EnvelopeTag::lower)
        throw Error(ErrorKind::config, "g0 must be a lower envelope, got '" + spec.g0.name + "'");
    if (spec.g1.tag != EnvelopeTag::upper)
        throw Error(ErrorKind::config, "g1 must be an upper envelope, got '" + spec.g1.name + "'");
    if (!cfg.A_kind.empty()) spec.diffusion = make_coefficient(cfg.A_kind, cfg.A_params);
    if (!cfg.q_kind.empty()) spec.drift = make_coefficient(cfg.q_kind, cfg.q_params);
    return spec;
}

bool ValidationReport::valid() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
}

const HypothesisCheck& ValidationReport::check(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return c;
    throw Error(ErrorKind::internal, "no hypothesis named '" + name + "'");
}

nlohmann::json ValidationReport::to_json() const {
    nlohmann::json j;
    j["valid"] = valid();
    auto& arr = j["hypotheses"] = nlohmann::json::array();
    for (const auto& c : checks)
        arr.push_back({{"name", c.name}, {"pass", c.pass}, {"worst_violation", c.worst_violation},
                       {"where", c.where}});
    j["bounds"] = {{"a_minus", bounds.a_minus},         {"a_plus", bounds.a_plus},
                   {"nu", bounds.nu},                   {"gap_integral", bounds.gap_integral},
                   {"aA_minus", bounds.aA_minus},       {"q_plus", bounds.q_plus},
                   {"lambda1", bounds.lambda1}};
    return j;
}

ValidationReport validate_spec(const ReactionSpec& spec, const SampleGrid& grid) {
    if (grid.nx < 2 || grid.nu < 3 || !(grid.x_max > grid.x_min))
        throw Error(ErrorKind::config, "degenerate validation grid");

    ValidationReport report;
    const std::size_t nx = grid.nx, nu = grid.nu;
    const double hx = (grid.x_max - grid.x_min) / double(nx - 1);
    const double hu = 1.0 / double(nu - 1);
    auto xs = [&](std::size_t i) { return grid.x_min + hx * double(i); };
    auto us = [&](std::size_t j) { return hu * double(j); };

    // Coefficient samples.
    std::vector<double> a(nx);
    for (std::size_t i = 0; i < nx; ++i) {
        a[i] = spec.a(xs(i));
        if (!std::isfinite(a[i]))
            throw Error(ErrorKind::invalid_spec, "non-finite a at " + point_text(xs(i)));
    }

    // a-, a+ by sampled extremum refined locally.
    {
        auto lo_it = std::min_element(a.begin(), a.end());
        auto hi_it = std::max_element(a.begin(), a.end());
        const std::size_t ilo = std::size_t(lo_it - a.begin()), ihi = std::size_t(hi_it - a.begin());
        double amin = *lo_it, amax = *hi_it;
        auto bracket = [&](std::size_t i) {
            return std::pair{xs(i == 0 ? 0 : i - 1), xs(std::min(nx - 1, i + 1))};
        };
        auto [l1, r1] = bracket(ilo);
        amin = std::min(amin, local_min([&](double x) { return spec.a(x); }, l1, r1).second);
        auto [l2, r2] = bracket(ihi);
        amax = std::max(amax, -local_min([&](double x) { return -spec.a(x); }, l2, r2).second);
        report.bounds.a_minus = amin;
        report.bounds.a_plus = amax;
        HypothesisCheck c{"coefficient_bounds", amin > 0.0 && std::isfinite(amax),
                          amin > 0.0 ? 0.0 : -amin, amin > 0.0 ? "" : point_text(xs(ilo))};
        report.checks.push_back(c);
    }

    // Envelope shapes.
    auto shape_check = [&](const EnvelopeFunction& g, const std::string& name) {
        HypothesisCheck c{name, true, 0.0, ""};
        auto note = [&](double viol, double u) {
            if (viol > c.worst_violation) {
                c.worst_violation = viol;
                c.where = "u=" + std::to_string(u);
            }
        };
        note(std::abs(g(0.0)) > 1e-12 ? std::abs(g(0.0)) : 0.0, 0.0);
        note(std::abs(g.dg(0.0) - 1.0) > 1e-9 ? std::abs(g.dg(0.0) - 1.0) : 0.0, 0.0);
        for (std::size_t j = 0; j < nu; ++j) {
            const double u = us(j), gu = g(u), dgu = g.dg(u);
            if (!std::isfinite(gu) || !std::isfinite(dgu))
                throw Error(ErrorKind::envelope, name + " non-finite at u=" + std::to_string(u));
            if (g.tag == EnvelopeTag::lower) {
                if (j > 0 && j + 1 < nu && !(gu > 0.0)) note(std::max(-gu, 1e-300), u);
                if (dgu > 1.0 + 1e-12) note(dgu - 1.0, u);
            } else {
                if (dgu < 1.0 - 1e-12) note(1.0 - dgu, u);
            }
        }
        if (g.tag == EnvelopeTag::lower && std::abs(g(1.0)) > 1e-12) note(std::abs(g(1.0)), 1.0);
        c.pass = c.worst_violation == 0.0;
        return c;
    };
    report.checks.push_back(shape_check(spec.g0, "g0_shape"));
    report.checks.push_back(shape_check(spec.g1, "g1_shape"));

    // nu, with a guard against an unbounded g1(u)/u near 0.
    {
        const double r4 = spec.g1(1e-4) / 1e-4, r8 = spec.g1(1e-8) / 1e-8;
        if (!std::isfinite(r4) || !std::isfinite(r8) || r8 > 10.0 * std::abs(r4) + 10.0)
            throw Error(ErrorKind::envelope, "g1(u)/u is unbounded near u = 0");
        report.bounds.nu = envelope_nu(spec.g1);
        const bool ok = report.bounds.nu >= 1.0 - 1e-12 && std::isfinite(report.bounds.nu);
        report.checks.push_back({"nu", ok, ok ? 0.0 : 1.0 - report.bounds.nu, ""});
    }

    // Equilibria, linearisation, envelope sandwich.
    HypothesisCheck equilibria{"equilibria", true, 0.0, ""};
    HypothesisCheck linearization{"linearization", true, 0.0, ""};
    HypothesisCheck sandwich{"envelope_bounds", true, 0.0, ""};
    constexpr double eta = 1e-6;
    std::vector<double> lo(nu), hi(nu);
    for (std::size_t i = 0; i < nx; ++i) {
        const double x = xs(i), ax = a[i];
        const double slack = 1e-12 * ax;
        for (double u : {0.0, 1.0}) {
            const double fv = spec.f(x, u);
            if (!std::isfinite(fv)) throw Error(ErrorKind::invalid_spec, "non-finite f at " + point_text(x, u));
            const double viol = std::abs(fv) - 1e-12 * std::max(1.0, ax);
            if (viol > equilibria.worst_violation) {
                equilibria.worst_violation = viol;
                equilibria.where = point_text(x, u);
            }
        }
        {
            const double slope = spec.f(x, eta) / eta;
            const double viol = std::abs(slope - ax) - 1e-4 * ax;
            if (viol > linearization.worst_violation) {
                linearization.worst_violation = viol;
                linearization.where = point_text(x);
            }
        }
        for (std::size_t j = 0; j < nu; ++j) {
            const double u = us(j);
            const double fv = spec.f(x, u);
            if (!std::isfinite(fv)) throw Error(ErrorKind::invalid_spec, "non-finite f at " + point_text(x, u));
            lo[j] = fv - ax * spec.g0(u);
            hi[j] = ax * spec.g1(u) - fv;
        }
        // Refine near-violations by a local search around the discrete minimum.
        auto refine = [&](const std::vector<double>& margin, auto margin_fn) {
            auto it = std::min_element(margin.begin() + 1, margin.end() - 1);
            const std::size_t j = std::size_t(it - margin.begin());
            double worst = std::min({*it, margin.front(), margin.back()});
            double at = us(j);
            if (*it < 1e-6 * ax) {
                auto [um, vm] = local_min(margin_fn, us(j - 1), us(j + 1));
                if (vm < worst) {
                    worst = vm;
                    at = um;
                }
            }
            return std::pair{worst, at};
        };
        auto [wlo, ulo] = refine(lo, [&](double u) { return spec.f(x, u) - ax * spec.g0(u); });
        auto [whi, uhi] = refine(hi, [&](double u) { return ax * spec.g1(u) - spec.f(x, u); });
        for (auto [w, u] : {std::pair{wlo, ulo}, std::pair{whi, uhi}}) {
            const double viol = -w - slack;
            if (viol > sandwich.worst_violation) {
                sandwich.worst_violation = viol;
                sandwich.where = point_text(x, u);
            }
        }
    }
    equilibria.pass = equilibria.worst_violation <= 0.0;
    linearization.pass = linearization.worst_violation <= 0.0;
    sandwich.pass = sandwich.worst_violation <= 0.0;
    equilibria.worst_violation = std::max(0.0, equilibria.worst_violation);
    linearization.worst_violation = std::max(0.0, linearization.worst_violation);
    report.checks.push_back(equilibria);
    report.checks.push_back(linearization);
    report.checks.push_back(sandwich);

    // Envelope gap integral, integrand extended continuously at 0.
    {
        constexpr double delta = 1e-8;
        auto gap = [&](double u) { return spec.g1(u) - spec.g0(u); };
        const double h = 1e-4;
        const double limit = 0.5 * (gap(2.0 * h) - 2.0 * gap(h) + gap(0.0)) / (h * h);
        double err = 0.0;
        const double body = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(
            [&](double u) { return gap(u) / (u * u); }, delta, 1.0, 15, 1e-12, &err);
        const double total = body + limit * delta;
        report.bounds.gap_integral = total;
        const bool ok = std::isfinite(total) && std::isfinite(limit) && err < 1e-6 * std::max(1.0, std::abs(total));
        report.checks.push_back({"gap_integral", ok, ok ? 0.0 : std::abs(err), ""});
    }

    // Diffusion/drift fields.
    if (spec.has_transport()) {
        double aA_min = std::numeric_limits<double>::infinity(), q_max = 0.0, A_min = aA_min;
        std::size_t iA = 0;
        for (std::size_t i = 0; i < nx; ++i) {
            const double x = xs(i), A = spec.diffusion_at(x), q = spec.drift_at(x);
            if (!std::isfinite(A) || !std::isfinite(q))
                throw Error(ErrorKind::invalid_spec, "non-finite A or q at " + point_text(x));
            if (A < A_min) {
                A_min = A;
                iA = i;
            }
            aA_min = std::min(aA_min, a[i] * A);
            q_max = std::max(q_max, std::abs(q));
        }
        report.bounds.aA_minus = aA_min;
        report.bounds.q_plus = q_max;
        report.checks.push_back({"diffusion_positive", A_min > 0.0, A_min > 0.0 ? 0.0 : -A_min,
                                 A_min > 0.0 ? "" : point_text(xs(iA))});
        const double gate = 2.0 * std::sqrt(std::max(0.0, aA_min));
        report.checks.push_back({"drift_gate", q_max <= gate, std::max(0.0, q_max - gate),
                                 q_max <= gate ? "" : "q+ exceeds 2 sqrt((aA)-)"});
        const double root = std::sqrt(std::max(0.0, aA_min));
        double l1 = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < nx; ++i) {
            const double x = xs(i);
            l1 = std::min(l1, a[i] + root * (root - std::abs(spec.drift_at(x))) / spec.diffusion_at(x));
        }
        report.bounds.lambda1 = l1;
    } else {
        report.bounds.aA_minus = report.bounds.a_minus;
        report.bounds.lambda1 = 2.0 * report.bounds.a_minus;
    }
    return report;
}

ReactionSpec validated(ReactionSpec spec, const SampleGrid& grid) {
    const auto report = validate_spec(spec, grid);
    if (!report.valid()) {
        std::string failed;
        for (const auto& c : report.checks)
            if (!c.pass) failed += (failed.empty() ? "" : ", ") + c.name + (c.where.empty() ? "" : " at " + c.where);
        throw Error(ErrorKind::invalid_spec, "hypotheses failed: " + failed);
    }
    spec.bounds = report.bounds;
    spec.validated = true;
    return spec;
}

double nu_correction(double nu) {
    if (nu < 1.0 - 1e-12) throw Error(ErrorKind::envelope, "nu < 1");
    const double m = std::max(0.0, nu - 1.0);
    return 2.0 * std::sqrt(m) / (std::sqrt(nu) + std::sqrt(m));
}

double threshold_rhs(double a_minus, double a_plus, double nu) {
    return 2.0 * a_minus - nu_correction(nu) * a_plus;
}

double threshold_rhs(const ReactionSpec& spec) {
    if (!spec.validated) throw Error(ErrorKind::invalid_spec, "threshold_rhs needs a validated spec");
    const auto& b = spec.bounds;
    if (spec.has_transport()) return b.lambda1 - nu_correction(b.nu) * b.a_plus;
    return threshold_rhs(b.a_minus, b.a_plus, b.nu);
}

}  // namespace frontlab
