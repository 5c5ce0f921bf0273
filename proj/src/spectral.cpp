#include "frontlab/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <boost/numeric/odeint.hpp>

#include "frontlab/error.hpp"

namespace frontlab {

namespace odeint = boost::numeric::odeint;

namespace {

// Number of eigenvalues of T strictly below mu (Sturm count via LDL^T pivots).
std::size_t count_below(std::span<const double> d, std::span<const double> e, double mu) {
    std::size_t count = 0;
    double q = d[0] - mu;
    if (q < 0.0) ++count;
    for (std::size_t i = 1; i < d.size(); ++i) {
        if (q == 0.0) q = std::numeric_limits<double>::epsilon() * (std::abs(e[i - 1]) + 1.0);
        q = (d[i] - mu) - e[i - 1] * e[i - 1] / q;
        if (q < 0.0) ++count;
    }
    return count;
}

struct Tridiagonal {
    std::vector<double> diag;
    std::vector<double> off;
};

// Symmetric form of d/dx(A d/dx) + q d/dx + a on interior nodes of [-X, X]
// with Dirichlet ends. The drift enters through its symmetric part -q'/2,
// taken from face values so the form matches the variational quotient.
Tridiagonal assemble(const ReactionSpec& spec, double half_width, std::size_t intervals) {
    const double h = 2.0 * half_width / double(intervals);
    const std::size_t m = intervals - 1;
    Tridiagonal t;
    t.diag.resize(m);
    t.off.resize(m > 0 ? m - 1 : 0);
    auto face_A = [&](double xf) { return spec.diffusion_at(xf); };
    auto face_q = [&](double xf) { return spec.drift_at(xf); };
    for (std::size_t k = 0; k < m; ++k) {
        const double x = -half_width + h * double(k + 1);
        const double Al = face_A(x - 0.5 * h), Ar = face_A(x + 0.5 * h);
        double d = -(Al + Ar) / (h * h) + spec.a(x);
        if (spec.drift) d += (face_q(x - 0.5 * h) - face_q(x + 0.5 * h)) / (2.0 * h);
        t.diag[k] = d;
        if (k + 1 < m) t.off[k] = Ar / (h * h);
    }
    return t;
}

using State = std::array<double, 2>;

}  // namespace

double largest_eigenvalue(std::span<const double> d, std::span<const double> e) {
    const std::size_t n = d.size();
    if (n == 0) throw Error(ErrorKind::internal, "empty matrix");
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = (i > 0 ? std::abs(e[i - 1]) : 0.0) + (i + 1 < n ? std::abs(e[i]) : 0.0);
        lo = std::min(lo, d[i] - r);
        hi = std::max(hi, d[i] + r);
    }
    const double tol = 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi));
    constexpr int max_iter = 200;
    int it = 0;
    while (hi - lo > tol && it < max_iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (count_below(d, e, mid) == n)
            hi = mid;
        else
            lo = mid;
        ++it;
    }
    if (it >= max_iter && hi - lo > tol)
        throw Error(ErrorKind::iteration_limit,
                    "Sturm bisection did not converge, bracket width " + std::to_string(hi - lo));
    return 0.5 * (lo + hi);
}

double dirichlet_top_eigenvalue(const ReactionSpec& spec, double half_width, std::size_t intervals) {
    if (intervals < 4) throw Error(ErrorKind::config, "need at least 4 intervals");
    const auto t = assemble(spec, half_width, intervals);
    return largest_eigenvalue(t.diag, t.off);
}

SpectralBound sup_spectrum(const ReactionSpec& spec, double half_width, std::size_t resolution) {
    SpectralBound out;
    out.half_width = half_width;
    out.resolution = resolution;
    std::array<double, 3> raw{};
    for (std::size_t level = 0; level < 3; ++level) {
        const std::size_t n = resolution << level;
        raw[level] = dirichlet_top_eigenvalue(spec, half_width, n);
        out.history.push_back({half_width, 2.0 * half_width / double(n), raw[level]});
    }
    // h^2 then h^4 elimination.
    const double r01 = (4.0 * raw[1] - raw[0]) / 3.0;
    const double r12 = (4.0 * raw[2] - raw[1]) / 3.0;
    out.lambda0 = (16.0 * r12 - r01) / 15.0;
    return out;
}

double default_half_width(double lambda, double lambda0) {
    const double gap = lambda - lambda0;
    if (!(gap > 0.0)) return 200.0;
    return std::min(30.0 / std::sqrt(gap), 200.0);
}

std::size_t intervals_for_mesh(double half_width, double mesh) {
    auto n = static_cast<std::size_t>(std::ceil(2.0 * half_width / mesh));
    if (n % 2 == 1) ++n;
    return std::max<std::size_t>(n, 4);
}

double alpha_for(const ReactionSpec& spec, double lambda) {
    if (!spec.validated) throw Error(ErrorKind::invalid_spec, "alpha needs a validated spec");
    const auto& b = spec.bounds;
    const double top = spec.has_transport() ? b.lambda1 : 2.0 * b.a_minus;
    return 1.0 - (top - lambda) / b.a_plus;
}

Eigenpair eigenfunction(const ReactionSpec& spec, double lambda, double half_width, std::size_t resolution,
                        const EigenOptions& opt) {
    if (!spec.validated) throw Error(ErrorKind::invalid_spec, "eigenfunction needs a validated spec");
    if (resolution % 2 == 1) ++resolution;
    if (opt.lambda0 && !(lambda > *opt.lambda0 * (1.0 + opt.margin_fraction)))
        throw Error(ErrorKind::no_decaying_solution,
                    "lambda = " + std::to_string(lambda) + " does not exceed lambda0 = " +
                        std::to_string(*opt.lambda0) + " by the required margin");
    const double alpha = alpha_for(spec, lambda);
    if (opt.require_below_threshold && !(alpha < 1.0))
        throw Error(ErrorKind::threshold, "lambda must lie below 2a- (alpha < 1)");

    Eigenpair pair;
    pair.lambda = lambda;
    pair.grid = UniformGrid::spanning(-half_width, half_width, resolution);
    pair.alpha = alpha;
    const std::size_t n = pair.grid.n, mid = resolution / 2;
    pair.phi.assign(n, 0.0);
    pair.dphi.assign(n, 0.0);

    // Integrate in y = -x so both sweeps run forward; state = (phi, A phi').
    auto rhs = [&](const State& s, State& ds, double y) {
        const double x = -y;
        const double A = spec.diffusion_at(x), q = spec.drift_at(x);
        const double dphi = s[1] / A;
        ds[0] = -dphi;
        ds[1] = -((lambda - spec.a(x)) * s[0] - q * dphi);
    };
    auto stepper = odeint::make_controlled(opt.abs_tol, opt.rel_tol, odeint::runge_kutta_dopri5<State>());

    const double X = half_width;
    const double AX = spec.diffusion_at(X), qX = spec.drift_at(X);
    double aX = spec.a(X);
    double disc = qX * qX + 4.0 * AX * (lambda - aX);
    if (!(disc > 0.0)) {
        // oscillating coefficients: start from the mean of a over the last 10 units
        double mean = 0.0;
        for (int k = 0; k <= 1000; ++k) mean += spec.a(X - 10.0 * k / 1000.0) / 1001.0;
        aX = mean;
        disc = qX * qX + 4.0 * AX * (lambda - aX);
    }
    if (!(disc > 0.0))
        throw Error(ErrorKind::no_decaying_solution, "no decaying asymptotic mode at the right window end");
    const double rate = (-qX - std::sqrt(disc)) / (2.0 * AX);  // decaying root of A r^2 + q r + a - lambda

    auto sweep = [&](State s, std::size_t from, std::size_t to) {
        // nodes from..to in decreasing x
        std::vector<double> ys;
        for (std::size_t i = from + 1; i-- > to;) ys.push_back(-pair.grid.x(i));
        std::size_t k = 0;
        odeint::integrate_times(stepper, rhs, s, ys.begin(), ys.end(), pair.grid.dx / 4.0,
                                [&](const State& st, double) {
                                    const std::size_t i = from - k++;
                                    pair.phi[i] = st[0];
                                    pair.dphi[i] = st[1] / spec.diffusion_at(pair.grid.x(i));
                                });
    };
    sweep(State{1.0, AX * rate}, n - 1, mid);
    const double scale = pair.phi[mid];
    if (!(scale > 0.0) || !std::isfinite(scale))
        throw Error(ErrorKind::no_decaying_solution, "shooting solution vanished before x = 0");
    for (std::size_t i = mid; i < n; ++i) {
        pair.phi[i] /= scale;
        pair.dphi[i] /= scale;
    }
    sweep(State{1.0, spec.diffusion_at(0.0) * pair.dphi[mid]}, mid, 0);

    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(pair.phi[i]))
            throw Error(ErrorKind::blowup, "eigenfunction overflow; reduce the window");
        if (!(pair.phi[i] > 0.0))
            throw Error(ErrorKind::no_decaying_solution,
                        "shooting solution changes sign at x = " + std::to_string(pair.grid.x(i)) +
                            " (lambda at or below lambda0)");
    }
    if (!(pair.dphi.front() < 0.0) || !(pair.dphi.back() < 0.0))
        throw Error(ErrorKind::no_decaying_solution, "log-slope at a window end is not negative");

    try {
        pair.doubling_length = doubling_length(pair);
    } catch (const Error&) {
        pair.doubling_length = std::numeric_limits<double>::quiet_NaN();
    }
    pair.residual = eigen_residual(spec, pair);
    const auto gb = gradient_bound(spec, pair);
    pair.gradient_margin = gb.scale > 0.0 ? gb.worst_margin / gb.scale : gb.worst_margin;
    return pair;
}

double doubling_length(const Eigenpair& pair) {
    const std::size_t n = pair.phi.size();
    std::vector<double> lg(n);
    for (std::size_t i = 0; i < n; ++i) lg[i] = std::log(pair.phi[i]);
    const double ln2 = std::log(2.0);
    for (std::size_t k = 1; k < n; ++k) {
        bool ok = true;
        for (std::size_t i = 0; i + k < n; ++i) {
            if (lg[i] - lg[i + k] < ln2) {
                ok = false;
                break;
            }
        }
        if (ok) return double(k) * pair.grid.dx;
    }
    throw Error(ErrorKind::window_too_small, "phi never halves within the window");
}

double eigen_residual(const ReactionSpec& spec, const Eigenpair& pair) {
    const auto& g = pair.grid;
    const double h = g.dx;
    const auto& p = pair.phi;
    double worst = 0.0;
    for (std::size_t i = 2; i + 2 < g.n; ++i) {
        const double x = g.x(i);
        double op;
        if (spec.has_transport()) {
            auto flux = [&](std::size_t j) { return spec.diffusion_at(g.x(j)) * pair.dphi[j]; };
            const double dflux = (-flux(i + 2) + 8.0 * flux(i + 1) - 8.0 * flux(i - 1) + flux(i - 2)) / (12.0 * h);
            op = dflux + spec.drift_at(x) * pair.dphi[i];
        } else {
            op = (-p[i + 2] + 16.0 * p[i + 1] - 30.0 * p[i] + 16.0 * p[i - 1] - p[i - 2]) / (12.0 * h * h);
        }
        const double r = op + (spec.a(x) - pair.lambda) * p[i];
        const double loc = std::max({p[i - 2], p[i - 1], p[i], p[i + 1], p[i + 2]});
        worst = std::max(worst, std::abs(r) / (std::abs(pair.lambda) * loc));
    }
    return worst;
}

GradientBoundReport gradient_bound(const ReactionSpec& spec, const Eigenpair& pair, double slack) {
    GradientBoundReport rep;
    rep.worst_margin = -std::numeric_limits<double>::infinity();
    rep.worst_relative = rep.worst_margin;
    for (std::size_t i = 0; i < pair.grid.n; ++i) {
        const double x = pair.grid.x(i);
        const double rhs = pair.alpha * spec.a(x) * pair.phi[i] * pair.phi[i];
        const double lhs = spec.diffusion_at(x) * pair.dphi[i] * pair.dphi[i];
        rep.scale = std::max(rep.scale, spec.a(x) * pair.phi[i] * pair.phi[i]);
        if (lhs - rhs > rep.worst_margin) {
            rep.worst_margin = lhs - rhs;
            rep.worst_index = i;
        }
        if (rhs > 0.0) rep.worst_relative = std::max(rep.worst_relative, (lhs - rhs) / rhs);
    }
    rep.pass = rep.worst_margin <= slack * rep.scale;
    return rep;
}

}  // namespace frontlab
