#include "frontlab/pde_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "frontlab/error.hpp"

namespace frontlab {

namespace {

std::string num(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

double harmonic(double p, double q) { return 2.0 * p * q / (p + q); }

double ls_slope(std::span<const double> t, std::span<const double> y) {
    const double n = double(t.size());
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        st += t[i];
        sy += y[i];
        stt += t[i] * t[i];
        sty += t[i] * y[i];
    }
    return (n * sty - st * sy) / (n * stt - st * st);
}

// v(t, x_i) from mode values at the nodes.
struct NodalV {
    std::vector<double> lambda, weight;
    std::vector<std::vector<double>> phi;

    NodalV(const LinearizedSolution& v, std::span<const double> xs) : phi(v.mode_values(xs)) {
        for (const auto& m : v.modes()) {
            lambda.push_back(m.pair.lambda);
            weight.push_back(m.weight);
        }
    }

    void eval(double t, std::vector<double>& out) const {
        out.assign(phi.front().size(), 0.0);
        for (std::size_t k = 0; k < phi.size(); ++k) {
            if (weight[k] <= 0.0) continue;
            const double e = weight[k] * std::exp(lambda[k] * t);
            for (std::size_t i = 0; i < out.size(); ++i) out[i] += e * phi[k][i];
        }
    }

    double at(double t, std::size_t i) const {
        double s = 0.0;
        for (std::size_t k = 0; k < phi.size(); ++k)
            if (weight[k] > 0.0) s += weight[k] * std::exp(lambda[k] * t) * phi[k][i];
        return s;
    }
};

}  // namespace

Stepper::Stepper(const ReactionSpec& spec, UniformGrid grid, double dt, double theta, double reaction_scale)
    : Stepper(spec, grid, dt, std::vector<double>(grid.n, theta), reaction_scale) {}

Stepper::Stepper(const ReactionSpec& spec, UniformGrid grid, double dt, std::vector<double> theta,
                 double reaction_scale)
    : spec_(&spec), grid_(grid), dt_(dt), scale_(reaction_scale), theta_(std::move(theta)) {
    const std::size_t n = grid_.n;
    if (n < 5) throw Error(ErrorKind::config, "simulation grid needs at least 5 nodes");
    if (!(dt > 0.0)) throw Error(ErrorKind::config, "dt must be positive");
    if (theta_.size() != n) throw Error(ErrorKind::config, "one theta per node required");
    for (double t : theta_)
        if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorKind::config, "theta must lie in [0, 1]");
    const double bound = monotone_dt(spec, grid_, theta_, reaction_scale, 1.0);
    if (dt > bound * (1.0 + 1e-12))
        throw Error(ErrorKind::config, "dt = " + num(dt) + " exceeds the order-preserving bound " + num(bound));

    const double h = grid_.dx;
    std::vector<double> lo(n, 0.0), di(n, 0.0), up(n, 0.0);
    a_.resize(n);
    m_.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        a_[i] = scale_ * spec.a(grid_.x(i));
        if (spec.modulation) m_[i] = spec.modulation(grid_.x(i));
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!spec.has_transport()) {
            lo[i] = up[i] = 1.0 / (h * h);
            di[i] = -2.0 / (h * h);
            continue;
        }
        const double Am = harmonic(spec.diffusion_at(grid_.x(i - 1)), spec.diffusion_at(grid_.x(i)));
        const double Ap = harmonic(spec.diffusion_at(grid_.x(i)), spec.diffusion_at(grid_.x(i + 1)));
        lo[i] = Am / (h * h);
        up[i] = Ap / (h * h);
        di[i] = -(lo[i] + up[i]);
        const double q = spec.drift_at(grid_.x(i));
        if (std::abs(q) * h / (2.0 * std::min(Am, Ap)) <= 1.0) {
            lo[i] -= q / (2.0 * h);
            up[i] += q / (2.0 * h);
        } else if (q > 0.0) {
            up[i] += q / h;
            di[i] -= q / h;
        } else {
            lo[i] -= q / h;
            di[i] += q / h;
        }
    }
    sub_.assign(n, 0.0L);
    sup_.assign(n, 0.0L);
    ncp_.assign(n, 0.0L);
    inv_.assign(n, 0.0L);
    da_.assign(n, 0.0L);
    b_.assign(n, 0.0L);
    const long double ldt = dt_;
    for (std::size_t i = 0; i < n; ++i) {
        da_[i] = ldt * a_[i];
        if (spec.kernel_beta) b_[i] = *spec.kernel_beta * (spec.modulation ? m_[i] : 1.0);
    }
    long double prev = 0.0L;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        sub_[i] = ldt * lo[i];
        sup_[i] = ldt * up[i];
        if (sub_[i] < 0.0L || sup_[i] < 0.0L) throw Error(ErrorKind::internal, "stencil lost the M-matrix sign pattern");
        const long double diag = 1.0L - ldt * di[i] - ldt * theta_[i] * a_[i];
        const long double d = diag - sub_[i] * prev;
        if (!(d > 0.0L)) throw Error(ErrorKind::internal, "step matrix lost diagonal dominance");
        inv_[i] = 1.0L / d;
        ncp_[i] = prev = sup_[i] / d;
    }
    rhs_.assign(n, 0.0L);
}

double Stepper::monotone_dt(const ReactionSpec& spec, const UniformGrid& grid, double theta, double reaction_scale,
                            double safety) {
    const std::vector<double> th(grid.n, theta);
    return monotone_dt(spec, grid, th, reaction_scale, safety);
}

double Stepper::monotone_dt(const ReactionSpec& spec, const UniformGrid& grid, std::span<const double> theta,
                            double reaction_scale, double safety) {
    double worst = 0.0;
    const std::size_t stride = std::max<std::size_t>(1, grid.n / 20000);
    for (std::size_t i = 0; i < grid.n; i += stride) {
        const double x = grid.x(i), a = reaction_scale * spec.a(x);
        double th = theta[i];
        for (std::size_t k = i; k < std::min(grid.n, i + stride); ++k) th = std::max(th, theta[k]);
        worst = std::max(worst, th * a);
        for (int k = 0; k <= 100; ++k) {
            const double u = k / 100.0;
            worst = std::max(worst, th * a - reaction_scale * spec.f_u(x, u));
        }
    }
    if (worst <= 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / (safety * worst);
}

void Stepper::step(std::vector<double>& u, double left, double right) {
    const std::size_t n = grid_.n;
    if (u.size() != n) throw Error(ErrorKind::internal, "state size does not match the grid");
    const auto& spec = *spec_;
    const bool poly = spec.kernel_beta.has_value(), fast = bool(spec.kernel);
    const long double ldt = dt_;
    // Every operation below is non-decreasing in u and in the boundary data.
    long double y = 0.0L;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const long double ui = u[i];
        long double r;
        if (poly) {
            r = ui + da_[i] * ui * ((1.0L - ui) * (1.0L + b_[i] * ui) - theta_[i]);
        } else {
            const long double f = fast ? a_[i] * spec.kernel(m_[i], ui) : scale_ * spec.f(grid_.x(i), u[i]);
            r = ui + ldt * (f - theta_[i] * a_[i] * ui);
        }
        if (i == 1) r += sub_[1] * left;
        if (i == n - 2) r += sup_[n - 2] * right;
        y = (r + sub_[i] * y) * inv_[i];
        rhs_[i] = y;
    }
    u[0] = left;
    u[n - 1] = right;
    for (std::size_t i = n - 1; i-- > 1;) {
        y = i == n - 2 ? rhs_[i] : rhs_[i] + ncp_[i] * y;
        double w = double(y);
        if (!(w >= 0.0 && w <= 1.0)) {
            if (!std::isfinite(w)) throw Error(ErrorKind::blowup, "non-finite value at x = " + num(grid_.x(i)));
            if (w < -1e-12 || w > 1.0 + 1e-12) ++clamps_;
            w = std::clamp(w, 0.0, 1.0);
        }
        if (w < std::numeric_limits<double>::min()) w = 0.0;  // no subnormals
        u[i] = w;
    }
}

std::vector<double> tail_matched_theta(const ReactionSpec& spec, const UniformGrid& grid, double lambda,
                                       double reaction_scale) {
    std::vector<double> th(grid.n, 0.0);
    for (std::size_t i = 0; i < grid.n; ++i) {
        const double a = reaction_scale * spec.a(grid.x(i));
        if (a > 0.0) th[i] = std::clamp(1.0 - lambda / (2.0 * a), 0.0, 1.0);
    }
    return th;
}

std::pair<double, double> auto_time_window(const EnvelopeFields& fields, double x_left, double x_right, double dx) {
    const double span = x_right - x_left;
    const std::size_t n = std::max<std::size_t>(2, std::size_t(std::ceil(span / std::max(dx, span / 20000.0))));
    const auto g = UniformGrid::spanning(x_left, x_right, n);
    const auto xs = g.nodes();
    NodalV nv(*fields.v, xs);
    const double level = fields.transforms->ht_inv(0.5);
    std::vector<double> buf;
    constexpr double inf = std::numeric_limits<double>::infinity();
    auto X = [&](double t) {
        nv.eval(t, buf);
        try {
            return front_position(xs, buf, level);
        } catch (const Error&) {
            return buf.front() < level ? -inf : inf;
        }
    };
    auto solve = [&](double target) {
        double lo = 0.0, hi = 0.0, step = 1.0;
        while (X(lo) > target) {
            lo -= step;
            step *= 2.0;
            if (step > 1e6) throw Error(ErrorKind::window, "cannot place the front inside the domain");
        }
        step = 1.0;
        while (X(hi) < target) {
            hi += step;
            step *= 2.0;
            if (step > 1e6) throw Error(ErrorKind::window, "cannot place the front inside the domain");
        }
        for (int k = 0; k < 100 && hi - lo > 1e-12 * std::max(1.0, std::abs(hi)); ++k) {
            const double mid = 0.5 * (lo + hi);
            (X(mid) < target ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };
    return {solve(x_left + 0.25 * span), solve(x_left + 0.75 * span)};
}

FrontSolution run(const ReactionSpec& spec, const EnvelopeFields& fields, const SimulationConfig& cfg) {
    if (!(cfg.x_right > cfg.x_left)) throw Error(ErrorKind::config, "empty spatial domain");
    if (!(cfg.t1 > cfg.t0)) throw Error(ErrorKind::config, "t1 must exceed t0");
    if (cfg.snapshots < 2) throw Error(ErrorKind::config, "need at least 2 snapshots");
    const auto intervals = std::size_t(std::llround((cfg.x_right - cfg.x_left) / cfg.dx));
    const auto grid = UniformGrid::spanning(cfg.x_left, cfg.x_right, intervals);
    if (!fields.v->contains(grid.front()) || !fields.v->contains(grid.back()))
        throw Error(ErrorKind::window, "simulation domain exceeds the eigenfunction window");

    const double T = cfg.t1 - cfg.t0;
    const std::size_t per = std::max<std::size_t>(1, std::size_t(std::ceil(T / cfg.dt / double(cfg.snapshots - 1))));
    const std::size_t steps = per * (cfg.snapshots - 1);
    const double dt = T / double(steps);
    auto theta = cfg.theta < 0.0 ? tail_matched_theta(spec, grid, fields.v->lambda_max(), cfg.reaction_scale)
                                 : std::vector<double>(grid.n, cfg.theta);
    const auto [th_lo, th_hi] = std::minmax_element(theta.begin(), theta.end());
    const double theta_min = *th_lo, theta_max = *th_hi;
    Stepper stepper(spec, grid, dt, std::move(theta), cfg.reaction_scale);

    const auto xs = grid.nodes();
    NodalV nv(*fields.v, xs);
    const auto& tr = *fields.transforms;
    const std::size_t n = grid.n, last = n - 1;

    FrontSolution sol;
    sol.dx = grid.dx;
    sol.dt = dt;
    sol.t0 = cfg.t0;
    sol.t1 = cfg.t1;
    sol.theta_min = theta_min;
    sol.theta_max = theta_max;
    sol.x_stride = std::max<std::size_t>(1, cfg.x_stride);
    sol.full_nodes = n;
    sol.steps = steps;
    for (std::size_t i = 0; i < n; i += sol.x_stride) sol.x.push_back(xs[i]);
    if ((n - 1) % sol.x_stride != 0) sol.x.push_back(xs[last]);
    auto stored = [&](std::size_t k) {
        const std::size_t i = k * sol.x_stride;
        return std::min(i, last);
    };

    std::vector<double> v, u(n), prev;
    nv.eval(cfg.t0, v);
    for (std::size_t i = 0; i < n; ++i) u[i] = tr.ht(v[i]);

    auto snapshot = [&](double t) {
        nv.eval(t, v);
        std::vector<double> su, lo, up, sv;
        for (std::size_t k = 0; k < sol.x.size(); ++k) {
            const std::size_t i = stored(k);
            su.push_back(u[i]);
            lo.push_back(tr.ht(v[i]));
            up.push_back(std::min(tr.h(v[i]), 1.0));
            sv.push_back(v[i]);
        }
        sol.times.push_back(t);
        sol.u.push_back(std::move(su));
        sol.lower.push_back(std::move(lo));
        sol.upper.push_back(std::move(up));
        sol.v.push_back(std::move(sv));
        if (cfg.reaction_scale == 0.0) return;
        double X;
        try {
            X = front_position(xs, u, 0.5);
        } catch (const Error&) {
            return;
        }
        const double limit = cfg.x_right - cfg.exhaust_fraction * (cfg.x_right - cfg.x_left);
        if (X > limit)
            throw Error(ErrorKind::domain_exhausted, "front reached x = " + num(X) + " at t = " + num(t) +
                                                         "; enlarge x_right beyond " +
                                                         num(cfg.x_right + (X - limit) + 0.5 * (cfg.x_right - cfg.x_left)));
    };

    snapshot(cfg.t0);
    const std::size_t margin = std::min<std::size_t>(10, n / 4);
    double min_inc = std::numeric_limits<double>::infinity();
    for (std::size_t s = 1; s <= steps; ++s) {
        const double t = cfg.t0 + T * double(s) / double(steps);
        prev = u;
        stepper.step(u, tr.ht(nv.at(t, 0)), tr.ht(nv.at(t, last)));
        for (std::size_t i = margin; i + margin < n; ++i) min_inc = std::min(min_inc, u[i] - prev[i]);
        if (s % per == 0) snapshot(t);
    }
    sol.min_step_increment = min_inc;
    sol.clamp_count = stepper.clamp_count();
    return sol;
}

double front_position(std::span<const double> x, std::span<const double> u, double level) {
    const std::size_t n = u.size();
    if (n == 0 || x.size() != n) throw Error(ErrorKind::front_absent, "empty profile");
    for (std::size_t i = n - 1; i-- > 0;) {
        if (u[i + 1] == level) return x[i + 1];
        if ((u[i] - level) * (u[i + 1] - level) < 0.0)
            return x[i] + (level - u[i]) / (u[i + 1] - u[i]) * (x[i + 1] - x[i]);
    }
    if (u[0] == level) return x[0];
    throw Error(ErrorKind::front_absent, "profile never attains the level " + num(level));
}

WidthMeasure front_width(std::span<const double> x, std::span<const double> u, double eps) {
    if (!(eps > 0.0 && eps < 0.5)) throw Error(ErrorKind::config, "width needs 0 < eps < 1/2");
    const double lo = eps, hi = 1.0 - eps;
    auto inside = [&](std::size_t i) { return u[i] >= lo && u[i] <= hi; };
    const std::size_t n = u.size();
    std::size_t first = n, lastin = n;
    for (std::size_t i = 0; i < n; ++i)
        if (inside(i)) {
            if (first == n) first = i;
            lastin = i;
        }
    if (first == n) return {0.0, true};
    auto edge = [&](std::size_t in, std::size_t out) {
        const double level = u[out] > hi ? hi : lo;
        return x[in] + (level - u[in]) / (u[out] - u[in]) * (x[out] - x[in]);
    };
    const double left = first > 0 ? edge(first, first - 1) : x[first];
    const double right = lastin + 1 < n ? edge(lastin, lastin + 1) : x[lastin];
    return {right - left, false};
}

SpeedEstimate speed_estimate(const FrontSolution& sol, double level) {
    const std::size_t m = sol.times.size();
    if (m < 10) throw Error(ErrorKind::config, "speed estimate needs at least 10 output times");
    SpeedEstimate est;
    for (std::size_t j = 0; j < m; ++j) est.positions.push_back(front_position(sol.x, sol.u[j], level));
    const std::size_t half = m / 2;
    std::span<const double> t(sol.times), p(est.positions);
    est.first_half = ls_slope(t.subspan(0, half + 1), p.subspan(0, half + 1));
    est.speed = ls_slope(t.subspan(half), p.subspan(half));
    est.drift = est.speed - est.first_half;
    return est;
}

nlohmann::json summary_json(const FrontSolution& sol) {
    return {{"dx", sol.dx},
            {"dt", sol.dt},
            {"t0", sol.t0},
            {"t1", sol.t1},
            {"theta_min", sol.theta_min},
            {"theta_max", sol.theta_max},
            {"steps", sol.steps},
            {"nodes", sol.full_nodes},
            {"x_stride", sol.x_stride},
            {"snapshots", sol.times.size()},
            {"min_step_increment", sol.min_step_increment},
            {"clamp_count", sol.clamp_count}};
}

}  // namespace frontlab
