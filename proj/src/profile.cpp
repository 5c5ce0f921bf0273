#include "frontlab/profile.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include "frontlab/error.hpp"

namespace frontlab {

namespace odeint = boost::numeric::odeint;

namespace {

using State = std::array<double, 2>;

std::string num(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

struct RawProfile {
    std::vector<double> U, V;
};

// Uniform samples of U'' + cU' + g(U) = 0 from (U0, V0) until U < floor.
RawProfile integrate_profile(const EnvelopeFunction& g, double c, State y, const ProfileOptions& opt) {
    auto rhs = [&](const State& s, State& ds, double) {
        ds[0] = s[1];
        ds[1] = -c * s[1] - g.g(s[0]);
    };
    auto stepper = odeint::make_controlled(opt.abs_tol, opt.rel_tol, odeint::runge_kutta_dopri5<State>());
    RawProfile out;
    out.U.push_back(y[0]);
    out.V.push_back(y[1]);
    constexpr std::size_t chunk = 4096;
    constexpr std::size_t max_knots = std::size_t(1) << 24;
    std::vector<double> times(chunk + 1);
    while (true) {
        const double t0 = opt.s_start + double(out.U.size() - 1) * opt.ds;
        for (std::size_t k = 0; k <= chunk; ++k) times[k] = t0 + double(k) * opt.ds;
        bool first = true;
        odeint::integrate_times(stepper, rhs, y, times.begin(), times.end(), opt.ds,
                                [&](const State& st, double) {
                                    if (first) {
                                        first = false;
                                        return;
                                    }
                                    out.U.push_back(st[0]);
                                    out.V.push_back(st[1]);
                                });
        const auto it = std::find_if(out.U.end() - chunk, out.U.end(), [&](double u) { return u < opt.u_floor; });
        if (it != out.U.end()) {
            const auto keep = std::size_t(it - out.U.begin()) + 1;
            out.U.resize(keep);
            out.V.resize(keep);
            if (out.U.back() <= 0.0)
                throw Error(ErrorKind::hypothesis_violation,
                            "profile crossed U = 0; the speed is too small for the envelope");
            return out;
        }
        for (std::size_t k = out.U.size() - chunk; k < out.U.size(); ++k) {
            if (out.V[k] > opt.slack || out.U[k] > 1.0 + opt.slack || !std::isfinite(out.U[k]))
                throw Error(ErrorKind::hypothesis_violation,
                            "profile left the invariant triangle at s = " + num(double(k) * opt.ds));
        }
        if (out.U.size() > max_knots)
            throw Error(ErrorKind::resolution, "profile did not decay below " + num(opt.u_floor));
    }
}

struct TailFit {
    double b0 = 0.0, b1 = 0.0, window = 0.0, rms = 0.0;
};

// Least squares ln U + sqrt(alpha) s = b0 + b1 U on the largest admissible tail.
TailFit fit_tail(const RawProfile& p, double ds, double sa) {
    for (double window : {1e-4, 1e-5, 1e-6, 1e-7, 1e-8}) {
        double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
        std::vector<std::pair<double, double>> pts;
        for (std::size_t i = 0; i < p.U.size(); ++i) {
            if (p.U[i] >= window || p.U[i] <= 0.0) continue;
            const double x = p.U[i], y = std::log(p.U[i]) + sa * double(i) * ds;
            pts.emplace_back(x, y);
            n += 1;
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        if (pts.size() < 50) continue;
        const double det = n * sxx - sx * sx;
        TailFit f;
        f.window = window;
        if (det > 0.0) {
            f.b1 = (n * sxy - sx * sy) / det;
            f.b0 = (sy - f.b1 * sx) / n;
        } else {
            f.b0 = sy / n;
        }
        double ss = 0;
        for (auto [x, y] : pts) ss += (y - f.b0 - f.b1 * x) * (y - f.b0 - f.b1 * x);
        f.rms = std::sqrt(ss / n);
        if (f.rms < 1e-6) {
            if (std::abs(f.b1) * window > 0.01)
                throw Error(ErrorKind::resolution,
                            "tail fit departs from a pure exponential by more than 1% (b1 = " + num(f.b1) + ")");
            return f;
        }
    }
    throw Error(ErrorKind::resolution,
                "no tail window with regression residual below 1e-6; the fast mode e^{-s/sqrt(alpha)} fades "
                "relative to the tail only at rate " + num(1.0 / sa - sa) + " (lower u_floor or alpha)");
}

WaveODESolution finish(const EnvelopeFunction& g, EnvelopeTag tag, double alpha, double c, RawProfile raw,
                       const ProfileOptions& opt) {
    const double sa = std::sqrt(alpha);
    const std::size_t n = raw.U.size();
    if (n < 200) throw Error(ErrorKind::resolution, "profile too short; reduce ds");
    const std::size_t back = std::min<std::size_t>(n / 4, 200);
    const double slope = (std::log(raw.U[n - 1]) - std::log(raw.U[n - 1 - back])) / (double(back) * opt.ds);
    if (std::abs(slope + 1.0 / sa) < std::abs(slope + sa))
        throw Error(ErrorKind::normalization,
                    "profile decays at the fast rate " + num(-slope) + " instead of sqrt(alpha) = " + num(sa));
    const TailFit fit = fit_tail(raw, opt.ds, sa);
    WaveODESolution sol;
    sol.tag = tag;
    sol.g = g;
    sol.alpha = alpha;
    sol.c = c;
    sol.A_tail = std::exp(fit.b0);
    sol.tail_window = fit.window;
    sol.tail_curvature = fit.b1;
    // Fit abscissae count from the launch, so the launch sits at -ln(A)/sqrt(alpha).
    sol.s0 = -fit.b0 / sa;
    sol.s = UniformGrid{sol.s0, opt.ds, n};
    sol.U = std::move(raw.U);
    sol.V = std::move(raw.V);
    sol.dV.resize(n);
    for (std::size_t i = 0; i < n; ++i) sol.dV[i] = -c * sol.V[i] - g.g(sol.U[i]);
    return sol;
}

void check_tag(const EnvelopeFunction& g, EnvelopeTag want) {
    if (g.tag != want)
        throw Error(ErrorKind::invalid_spec, "envelope " + g.name + " has the wrong tag for this profile");
}

// V at the first crossing of U = level, linear in the samples.
double phase_value(const WaveODESolution& s, double level) {
    for (std::size_t i = 1; i < s.U.size(); ++i) {
        if (s.U[i] <= level) {
            const double t = (s.U[i - 1] - level) / (s.U[i - 1] - s.U[i]);
            return s.V[i - 1] + t * (s.V[i] - s.V[i - 1]);
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

WaveODESolution launch_sub(const EnvelopeFunction& g0, double alpha, double c, double delta, bool degenerate,
                           const ProfileOptions& opt) {
    // Degenerate saddle: launch on the slow manifold V ~ -g0(U)/c instead.
    const double r = degenerate ? g0.g(1.0 - delta) / (c * delta)
                                : 0.5 * (-c + std::sqrt(c * c - 4.0 * g0.dg(1.0)));
    RawProfile raw = integrate_profile(g0, c, State{1.0 - delta, -r * delta}, opt);
    auto sol = finish(g0, EnvelopeTag::lower, alpha, c, std::move(raw), opt);
    sol.r_plus = r;
    sol.delta = delta;
    return sol;
}

}  // namespace

double alpha_ceiling(double nu) {
    if (nu < 1.0) throw Error(ErrorKind::envelope, "nu must be at least 1");
    const double d = std::sqrt(nu) - std::sqrt(nu - 1.0);
    return d * d;
}

double wave_speed(double alpha, double nu) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw Error(ErrorKind::threshold, "alpha = " + num(alpha) + " must lie in (0, 1)");
    if (nu > 1.0 && alpha > alpha_ceiling(nu) * (1.0 + 1e-12))
        throw Error(ErrorKind::threshold, "alpha = " + num(alpha) + " exceeds (sqrt(nu) - sqrt(nu-1))^2 = " +
                                              num(alpha_ceiling(nu)) + "; the threshold condition on lambda fails");
    const double sa = std::sqrt(alpha);
    return sa + 1.0 / sa;
}

WaveODESolution solve_super_profile(const EnvelopeFunction& g1, double alpha, double nu, const ProfileOptions& opt) {
    check_tag(g1, EnvelopeTag::upper);
    const double c = wave_speed(alpha, nu);
    const double sa = std::sqrt(alpha);
    RawProfile raw = integrate_profile(g1, c, State{1.0, -sa * g1.g(1.0)}, opt);
    auto sol = finish(g1, EnvelopeTag::upper, alpha, c, std::move(raw), opt);
    if (triangle_margin(sol) < -opt.slack)
        throw Error(ErrorKind::hypothesis_violation,
                    "super profile leaves the invariant triangle (margin " + num(triangle_margin(sol)) + ")");
    return sol;
}

WaveODESolution solve_sub_profile(const EnvelopeFunction& g0, double alpha, double nu, const ProfileOptions& opt) {
    check_tag(g0, EnvelopeTag::lower);
    const double c = wave_speed(alpha, nu);
    const bool degenerate = !(g0.dg(1.0) < -1e-8);
    if (!degenerate) return launch_sub(g0, alpha, c, opt.delta, false, opt);
    double delta = 1e-2;
    auto prev = launch_sub(g0, alpha, c, delta, true, opt);
    for (int k = 0; k < 6; ++k) {
        delta *= 0.5;
        auto next = launch_sub(g0, alpha, c, delta, true, opt);
        const double a = phase_value(prev, 0.5), b = phase_value(next, 0.5);
        if (std::abs(a - b) <= 1e-6 * std::abs(b)) return next;
        prev = std::move(next);
    }
    throw Error(ErrorKind::degeneracy, "degenerate g0'(1) = 0 and shrinking the launch offset did not converge");
}

double triangle_margin(const WaveODESolution& s) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < s.U.size(); ++i)
        m = std::min({m, -s.V[i], 1.0 - s.U[i], s.V[i] + 0.5 * s.c * s.U[i]});
    return m;
}

double boundary_flux_margin(const EnvelopeFunction& g, double c, std::size_t samples) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < samples; ++k) {
        const double u = double(k) / double(samples - 1);
        m = std::min(m, 0.25 * c * c * u - g.g(u));
    }
    return m;
}

double convexity_margin(const WaveODESolution& s) {
    const double sa = std::sqrt(s.alpha);
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < s.U.size(); ++i) {
        const double gap = -s.V[i] - sa * s.g.g(s.U[i]);
        m = std::min(m, s.tag == EnvelopeTag::upper ? gap : -gap);
    }
    return m;
}

double ode_residual(const WaveODESolution& s) {
    const double h = s.s.dx;
    double worst = 0.0;
    for (std::size_t i = 2; i + 2 < s.V.size(); ++i) {
        const double d = (-s.V[i + 2] + 8.0 * s.V[i + 1] - 8.0 * s.V[i - 1] + s.V[i - 2]) / (12.0 * h);
        worst = std::max(worst, std::abs(d - s.dV[i]));
    }
    return worst;
}

std::vector<CertificateRecord> profile_certificates(const WaveODESolution& s, double slack) {
    const std::string which = s.tag == EnvelopeTag::upper ? "super" : "sub";
    const std::string region = "s in [" + num(s.s.front()) + ", " + num(s.s.back()) + "]";
    std::vector<CertificateRecord> out;
    if (s.tag == EnvelopeTag::upper) {
        out.push_back(make_record("super_triangle", region, triangle_margin(s), slack));
        out.push_back(make_record("super_boundary_flux", "U in [0, 1]", boundary_flux_margin(s.g, s.c), slack));
    } else {
        double mono = std::numeric_limits<double>::infinity();
        for (double v : s.V) mono = std::min(mono, -v);
        out.push_back(make_record("sub_monotone", region, mono, slack));
    }
    out.push_back(make_record(which + "_convexity", region, convexity_margin(s), slack));
    out.push_back(make_record(which + "_ode_residual", region, -ode_residual(s), 1e-8));
    return out;
}

// Quintic Hermite interpolation of (U, V, V') on the uniform knots. Boost 1.74's
// cardinal_quintic_hermite drops a 1/dx^2 factor in double_prime between knots.
struct ProfileTransforms::Interp {
    std::vector<double> U_, V_, dV_;
    double lo, hi, h;

    explicit Interp(const WaveODESolution& s)
        : U_(s.U), V_(s.V), dV_(s.dV), lo(s.s.front()), hi(s.s.back()), h(s.s.dx) {}

    // order 0, 1, 2 derivative in s
    double eval(double x, int order) const {
        x = std::clamp(x, lo, hi);
        const double pos = (x - lo) / h;
        std::size_t i = std::min<std::size_t>(std::size_t(pos), U_.size() - 2);
        const double t = pos - double(i);
        const double y0 = U_[i], y1 = U_[i + 1];
        const double m0 = V_[i] * h, m1 = V_[i + 1] * h;
        const double a0 = dV_[i] * h * h, a1 = dV_[i + 1] * h * h;
        const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
        double H, G0, G1, K0, K1, scale;
        switch (order) {
            case 0:
                H = 10 * t3 - 15 * t4 + 6 * t5;
                G0 = t - 6 * t3 + 8 * t4 - 3 * t5;
                G1 = -4 * t3 + 7 * t4 - 3 * t5;
                K0 = 0.5 * (t2 - 3 * t3 + 3 * t4 - t5);
                K1 = 0.5 * (t3 - 2 * t4 + t5);
                return y0 + H * (y1 - y0) + G0 * m0 + G1 * m1 + K0 * a0 + K1 * a1;
            case 1:
                H = 30 * t2 - 60 * t3 + 30 * t4;
                G0 = 1 - 18 * t2 + 32 * t3 - 15 * t4;
                G1 = -12 * t2 + 28 * t3 - 15 * t4;
                K0 = 0.5 * (2 * t - 9 * t2 + 12 * t3 - 5 * t4);
                K1 = 0.5 * (3 * t2 - 8 * t3 + 5 * t4);
                scale = 1.0 / h;
                break;
            default:
                H = 60 * t - 180 * t2 + 120 * t3;
                G0 = -36 * t + 96 * t2 - 60 * t3;
                G1 = -24 * t + 84 * t2 - 60 * t3;
                K0 = 0.5 * (2 - 18 * t + 36 * t2 - 20 * t3);
                K1 = 0.5 * (6 * t - 24 * t2 + 20 * t3);
                scale = 1.0 / (h * h);
                break;
        }
        return scale * (H * (y1 - y0) + G0 * m0 + G1 * m1 + K0 * a0 + K1 * a1);
    }

    double U(double x) const { return eval(x, 0); }
    double V(double x) const { return eval(x, 1); }
    double dV(double x) const { return eval(x, 2); }
};

ProfileTransforms::ProfileTransforms(WaveODESolution super, WaveODESolution sub)
    : super_(std::move(super)), sub_(std::move(sub)) {
    if (super_.tag != EnvelopeTag::upper || sub_.tag != EnvelopeTag::lower)
        throw Error(ErrorKind::construction, "transforms need one super and one sub profile");
    if (std::abs(super_.alpha - sub_.alpha) > 1e-15 * super_.alpha)
        throw Error(ErrorKind::construction, "profiles were built for different alpha");
    for (const auto* p : {&super_, &sub_}) {
        for (std::size_t i = 1; i < p->U.size(); ++i)
            if (!(p->U[i] < p->U[i - 1]))
                throw Error(ErrorKind::construction,
                            "non-monotone profile samples at s = " + num(p->s.x(i)));
    }
    alpha_ = super_.alpha;
    c_ = super_.c;
    sa_ = std::sqrt(alpha_);
    hi_ = std::make_shared<Interp>(super_);
    lo_ = std::make_shared<Interp>(sub_);
    v_max_ = std::exp(-sa_ * super_.s.front());
    v_launch_ = std::exp(-sa_ * sub_.s.front());
    v_end_h_ = std::exp(-sa_ * super_.s.back());
    v_end_ht_ = std::exp(-sa_ * sub_.s.back());
    slope0_h_ = super_.U.back() / v_end_h_;
    slope0_ht_ = sub_.U.back() / v_end_ht_;
    slope_max_ = -super_.V.front() / (sa_ * v_max_);
    // Below the regression window h = v e^{b1 h} to the fitted order, so h''(v) ~ 2 b1;
    // the knot formula there is dominated by cancellation.
    auto fit_edge = [this](const WaveODESolution& p) {
        const auto it = std::find_if(p.U.begin(), p.U.end(), [&](double u) { return u < p.tail_window; });
        return std::exp(-sa_ * p.s.x(std::size_t(it - p.U.begin())));
    };
    v_fit_h_ = fit_edge(super_);
    v_fit_ht_ = fit_edge(sub_);
}

double ProfileTransforms::sigma(double v) const { return -std::log(v) / sa_; }

double ProfileTransforms::h(double v) const {
    if (v < 0.0) throw Error(ErrorKind::transform_domain, "h needs v >= 0, got " + num(v));
    if (v <= v_end_h_) return slope0_h_ * v;
    if (v >= v_max_) return 1.0 + slope_max_ * (v - v_max_);
    return hi_->U(sigma(v));
}

double ProfileTransforms::dh(double v) const {
    if (v <= v_end_h_) return slope0_h_;
    if (v >= v_max_) return slope_max_;
    return -hi_->V(sigma(v)) / (sa_ * v);
}

double ProfileTransforms::d2h(double v) const {
    if (v >= v_max_) return 0.0;
    if (v <= v_fit_h_) return 2.0 * super_.tail_curvature;
    const double s = sigma(v);
    return (hi_->dV(s) + sa_ * hi_->V(s)) / (alpha_ * v * v);
}

double ProfileTransforms::ht(double v) const {
    if (v < 0.0) throw Error(ErrorKind::transform_domain, "h~ needs v >= 0, got " + num(v));
    if (v <= v_end_ht_) return slope0_ht_ * v;
    if (v >= v_launch_) {
        const double p = sub_.r_plus / sa_;
        return 1.0 - (1.0 - sub_.U.front()) * std::pow(v / v_launch_, -p);
    }
    return lo_->U(sigma(v));
}

double ProfileTransforms::dht(double v) const {
    if (v <= v_end_ht_) return slope0_ht_;
    if (v >= v_launch_) {
        const double p = sub_.r_plus / sa_;
        return (1.0 - sub_.U.front()) * p / v * std::pow(v / v_launch_, -p);
    }
    return -lo_->V(sigma(v)) / (sa_ * v);
}

double ProfileTransforms::d2ht(double v) const {
    if (v <= v_fit_ht_) return 2.0 * sub_.tail_curvature;
    if (v >= v_launch_) {
        const double p = sub_.r_plus / sa_;
        return -(1.0 - sub_.U.front()) * p * (p + 1.0) / (v * v) * std::pow(v / v_launch_, -p);
    }
    const double s = sigma(v);
    return (lo_->dV(s) + sa_ * lo_->V(s)) / (alpha_ * v * v);
}

namespace {

// sigma with interpolated U(sigma) = y inside the knot range.
double invert_profile(const WaveODESolution& p, const std::function<double(double)>& U, double y) {
    const auto it = std::lower_bound(p.U.begin(), p.U.end(), y, [](double a, double b) { return a > b; });
    const std::size_t j = std::clamp<std::size_t>(std::size_t(it - p.U.begin()), 1, p.U.size() - 1);
    double lo = p.s.x(j - 1), hi = p.s.x(j);
    auto f = [&](double s) { return U(s) - y; };
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (flo * fhi > 0.0) return std::abs(flo) < std::abs(fhi) ? lo : hi;
    std::uintmax_t iters = 100;
    auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(52),
                                               iters);
    return 0.5 * (r.first + r.second);
}

}  // namespace

double ProfileTransforms::h_inv(double y) const {
    if (y < 0.0) throw Error(ErrorKind::transform_domain, "h^-1 needs y >= 0, got " + num(y));
    if (y <= super_.U.back()) return y / slope0_h_;
    if (y >= 1.0) return v_max_ + (y - 1.0) / slope_max_;
    const double s = invert_profile(super_, [&](double x) { return hi_->U(x); }, y);
    return std::exp(-sa_ * s);
}

double ProfileTransforms::ht_inv(double y) const {
    if (!(y >= 0.0 && y < 1.0))
        throw Error(ErrorKind::transform_domain, "h~^-1 needs 0 <= y < 1, got " + num(y));
    if (y <= sub_.U.back()) return y / slope0_ht_;
    if (y >= sub_.U.front()) {
        const double p = sub_.r_plus / sa_;
        return v_launch_ * std::pow((1.0 - y) / (1.0 - sub_.U.front()), -1.0 / p);
    }
    const double s = invert_profile(sub_, [&](double x) { return lo_->U(x); }, y);
    return std::exp(-sa_ * s);
}

double ProfileTransforms::curvature_bound(double v) const {
    double k = std::max(std::abs(2.0 * super_.tail_curvature), std::abs(2.0 * sub_.tail_curvature));
    for (const auto* p : {&super_, &sub_}) {
        for (std::size_t i = 0; i < p->U.size(); ++i) {
            const double vi = std::exp(-sa_ * p->s.x(i));
            if (vi > v) continue;
            if (p->U[i] < p->tail_window) break;
            k = std::max(k, std::abs(p->dV[i] + sa_ * p->V[i]) / (alpha_ * vi * vi));
        }
    }
    if (v > v_launch_) k = std::max(k, std::abs(d2ht(v_launch_)));
    return k;
}

std::vector<CertificateRecord> ProfileTransforms::certificates(double slack) const {
    auto out = profile_certificates(super_, slack);
    for (auto& r : profile_certificates(sub_, slack)) out.push_back(std::move(r));

    // Transform identities at knot midpoints.
    double res_hi = 0.0, res_lo = 0.0;
    for (std::size_t i = 0; i + 1 < super_.U.size(); ++i) {
        const double v = std::exp(-sa_ * (super_.s.x(i) + 0.5 * super_.s.dx));
        res_hi = std::max(res_hi, std::abs(alpha_ * v * v * d2h(v) - v * dh(v) + super_.g.g(h(v))));
    }
    const double v_top_lo = std::max(v_launch_ * 1e3, std::exp(10.0));
    double sub_ineq = -std::numeric_limits<double>::infinity();
    auto sub_check = [&](double v) {
        const double r = v * dht(v) - alpha_ * v * v * d2ht(v) - sub_.g.g(ht(v));
        res_lo = std::max(res_lo, std::abs(r));
        sub_ineq = std::max(sub_ineq, r);
    };
    for (std::size_t i = 0; i + 1 < sub_.U.size(); ++i) sub_check(std::exp(-sa_ * (sub_.s.x(i) + 0.5 * sub_.s.dx)));
    for (int k = 0; k <= 200; ++k) sub_check(v_launch_ * std::pow(v_top_lo / v_launch_, k / 200.0));
    out.push_back(make_record("transform_residual_h", "v in (0, v_max]", -res_hi, 1e-6));
    out.push_back(make_record("transform_inequality_h_tilde", "v in (0, " + num(v_top_lo) + "]", -sub_ineq, 1e-8));

    // Sandwich of the transforms on a geometric sample plus the knots.
    double sand = std::numeric_limits<double>::infinity(), order = sand, conc = sand;
    auto sample = [&](double v) {
        if (v <= v_max_) sand = std::min({sand, v - ht(v), h(v) - v});
        order = std::min(order, std::min(h(v), 1.0) - ht(v));
        conc = std::min(conc, -d2ht(v) * v * v);
    };
    for (int k = 0; k <= 4000; ++k) sample(std::exp(-30.0 + 40.0 * k / 4000.0));
    for (std::size_t i = 0; i < super_.U.size(); ++i) sample(std::exp(-sa_ * super_.s.x(i)));
    for (std::size_t i = 0; i < sub_.U.size(); ++i) sample(std::exp(-sa_ * sub_.s.x(i)));
    out.push_back(make_record("transform_sandwich", "v in [0, v_max]", sand, slack));
    out.push_back(make_record("transform_order", "v in [0, e^10]", order, slack));
    out.push_back(make_record("h_tilde_concave", "v in [0, e^10]", conc, slack));
    out.push_back(make_record("h_slope_at_zero", "v -> 0", -std::abs(slope0_h_ - 1.0), 1e-6));
    out.push_back(make_record("h_tilde_slope_at_zero", "v -> 0", -std::abs(slope0_ht_ - 1.0), 1e-6));
    // 1 - h~(v) = (1 - U_L)(v / v_L)^{-p} beyond the launch point, so the limit is 1 iff p > 0.
    const double p = sub_.r_plus / sa_;
    out.push_back(make_record("h_tilde_limit", "v -> inf", p, 0.0,
                              "1 - h~(e^10) = " + num(1.0 - ht(std::exp(10.0))) + ", tail exponent " + num(p)));
    return out;
}

nlohmann::json ProfileTransforms::to_json() const {
    auto side = [](const WaveODESolution& s) {
        return nlohmann::json{{"s0", s.s0},
                              {"A_tail", s.A_tail},
                              {"tail_window", s.tail_window},
                              {"knots", s.U.size()},
                              {"ds", s.s.dx}};
    };
    nlohmann::json j{{"alpha", alpha_}, {"c", c_},           {"s0", super_.s0},
                     {"A_tail", super_.A_tail}, {"vmax", v_max_}, {"super", side(super_)},
                     {"sub", side(sub_)}};
    j["sub"]["r_plus"] = sub_.r_plus;
    j["sub"]["delta"] = sub_.delta;
    j["sub"]["v_launch"] = v_launch_;
    j["certificates"] = frontlab::to_json(certificates());
    return j;
}

ProfileTransforms build_transforms(WaveODESolution super, WaveODESolution sub) {
    return ProfileTransforms(std::move(super), std::move(sub));
}

ProfileTransforms build_transforms(const ReactionSpec& spec, double alpha, const ProfileOptions& options) {
    if (!spec.validated) throw Error(ErrorKind::invalid_spec, "profiles need a validated spec");
    const double nu = spec.bounds.nu;
    return ProfileTransforms(solve_super_profile(spec.g1, alpha, nu, options),
                             solve_sub_profile(spec.g0, alpha, nu, options));
}

}  // namespace frontlab
