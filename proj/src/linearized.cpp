#include "frontlab/linearized.hpp"

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

}  // namespace

LinearizedSolution::LinearizedSolution(std::vector<WeightedMode> modes) : modes_(std::move(modes)) {
    if (modes_.empty()) throw Error(ErrorKind::degenerate_measure, "no eigenpairs to superpose");
    bool any = false;
    for (const auto& m : modes_) {
        if (!(m.weight >= 0.0) || !std::isfinite(m.weight))
            throw Error(ErrorKind::degenerate_measure, "weights must be finite and non-negative");
        any = any || m.weight > 0.0;
    }
    if (!any) throw Error(ErrorKind::degenerate_measure, "all weights are zero");
    const auto& g0 = modes_.front().pair.grid;
    for (const auto& m : modes_) {
        const auto& g = m.pair.grid;
        if (g.n != g0.n || std::abs(g.x0 - g0.x0) > 1e-12 || std::abs(g.dx - g0.dx) > 1e-15)
            throw Error(ErrorKind::window, "superposed eigenpairs must share one grid");
    }
    lambda_max_ = -std::numeric_limits<double>::infinity();
    for (const auto& m : modes_) {
        if (m.weight <= 0.0) continue;
        if (m.pair.lambda > lambda_max_) {
            lambda_max_ = m.pair.lambda;
            alpha_ = m.pair.alpha;
        }
        L_ = std::max(L_, m.pair.doubling_length);
    }
    x_min_ = g0.front();
    x_max_ = g0.back();
}

double LinearizedSolution::phi_at(const Eigenpair& p, double x, double* slope) {
    const auto& g = p.grid;
    const double pos = (x - g.x0) / g.dx;
    if (pos < -1e-9 || pos > double(g.n - 1) + 1e-9)
        throw Error(ErrorKind::window, "x = " + num(x) + " lies outside the eigenfunction window");
    const std::size_t i = std::min<std::size_t>(std::size_t(std::max(pos, 0.0)), g.n - 2);
    const double t = std::clamp(pos - double(i), 0.0, 1.0);
    if (t == 0.0) {
        if (slope) *slope = p.dphi[i];
        return p.phi[i];
    }
    // cubic Hermite on ln phi
    const double h = g.dx;
    const double y0 = std::log(p.phi[i]), y1 = std::log(p.phi[i + 1]);
    const double m0 = p.dphi[i] / p.phi[i] * h, m1 = p.dphi[i + 1] / p.phi[i + 1] * h;
    const double t2 = t * t, t3 = t2 * t;
    const double y = (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * m0 + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * m1;
    const double phi = std::exp(y);
    if (slope) {
        const double dy = ((6 * t2 - 6 * t) * y0 + (3 * t2 - 4 * t + 1) * m0 + (-6 * t2 + 6 * t) * y1 +
                           (3 * t2 - 2 * t) * m1) /
                          h;
        *slope = phi * dy;
    }
    return phi;
}

double LinearizedSolution::value(double t, double x) const {
    double v = 0.0;
    for (const auto& m : modes_)
        if (m.weight > 0.0) v += m.weight * std::exp(m.pair.lambda * t) * phi_at(m.pair, x, nullptr);
    return v;
}

double LinearizedSolution::dx(double t, double x) const {
    double d = 0.0;
    for (const auto& m : modes_) {
        if (m.weight <= 0.0) continue;
        double s = 0.0;
        phi_at(m.pair, x, &s);
        d += m.weight * std::exp(m.pair.lambda * t) * s;
    }
    return d;
}

double LinearizedSolution::dt(double t, double x) const {
    double d = 0.0;
    for (const auto& m : modes_)
        if (m.weight > 0.0)
            d += m.weight * m.pair.lambda * std::exp(m.pair.lambda * t) * phi_at(m.pair, x, nullptr);
    return d;
}

std::vector<std::vector<double>> LinearizedSolution::mode_values(std::span<const double> xs) const {
    std::vector<std::vector<double>> out;
    for (const auto& m : modes_) {
        std::vector<double> col(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) col[i] = phi_at(m.pair, xs[i], nullptr);
        out.push_back(std::move(col));
    }
    return out;
}

std::vector<std::vector<double>> LinearizedSolution::mode_slopes(std::span<const double> xs) const {
    std::vector<std::vector<double>> out;
    for (const auto& m : modes_) {
        std::vector<double> col(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) phi_at(m.pair, xs[i], &col[i]);
        out.push_back(std::move(col));
    }
    return out;
}

LinearizedSolution superpose(std::vector<WeightedMode> modes) { return LinearizedSolution(std::move(modes)); }

LinearizedSolution single_mode(Eigenpair pair) { return LinearizedSolution({WeightedMode{std::move(pair), 1.0}}); }

double EnvelopeFields::lower(double t, double x) const { return transforms->ht(v->value(t, x)); }

double EnvelopeFields::upper_raw(double t, double x) const { return transforms->h(v->value(t, x)); }

double EnvelopeFields::upper(double t, double x) const { return std::min(upper_raw(t, x), 1.0); }

EnvelopeSlab evaluate_envelopes(const EnvelopeFields& f, std::span<const double> times, std::span<const double> xs) {
    for (double x : xs)
        if (!f.v->contains(x))
            throw Error(ErrorKind::window, "slab point x = " + num(x) + " outside the eigenfunction window [" +
                                               num(f.v->x_min()) + ", " + num(f.v->x_max()) + "]");
    EnvelopeSlab s;
    s.times.assign(times.begin(), times.end());
    s.xs.assign(xs.begin(), xs.end());
    for (double t : times) {
        std::vector<double> lo(xs.size()), up(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double v = f.v->value(t, xs[i]);
            lo[i] = f.transforms->ht(v);
            up[i] = std::min(f.transforms->h(v), 1.0);
        }
        s.lower.push_back(std::move(lo));
        s.upper.push_back(std::move(up));
    }
    return s;
}

CertificateRecord gradient_certificate(const ReactionSpec& spec, const LinearizedSolution& v,
                                       std::span<const double> times, std::span<const double> xs, double slack) {
    double worst = std::numeric_limits<double>::infinity();
    double wt = 0.0, wx = 0.0;
    for (double t : times) {
        double scale = 0.0, local = std::numeric_limits<double>::infinity(), lx = 0.0;
        for (double x : xs) {
            const double val = v.value(t, x), d = v.dx(t, x), a = spec.a(x);
            scale = std::max(scale, a * val * val);
            const double m = v.alpha() * a * val * val - spec.diffusion_at(x) * d * d;
            if (m < local) {
                local = m;
                lx = x;
            }
        }
        if (scale > 0.0) local /= scale;
        if (local < worst) {
            worst = local;
            wt = t;
            wx = lx;
        }
    }
    return make_record("gradient_bound", "slab " + std::to_string(times.size()) + "x" + std::to_string(xs.size()),
                       worst, slack, "worst at t = " + num(wt) + ", x = " + num(wx));
}

double linearized_residual(const ReactionSpec& spec, const LinearizedSolution& v, double t) {
    const auto& g = v.modes().front().pair.grid;
    const double h = g.dx;
    std::vector<double> val(g.n, 0.0), flux(g.n, 0.0), vx(g.n, 0.0), vt(g.n, 0.0);
    for (const auto& m : v.modes()) {
        if (m.weight <= 0.0) continue;
        const double e = m.weight * std::exp(m.pair.lambda * t);
        for (std::size_t i = 0; i < g.n; ++i) {
            val[i] += e * m.pair.phi[i];
            vx[i] += e * m.pair.dphi[i];
            vt[i] += e * m.pair.lambda * m.pair.phi[i];
        }
    }
    for (std::size_t i = 0; i < g.n; ++i) flux[i] = spec.diffusion_at(g.x(i)) * vx[i];
    double worst = 0.0;
    for (std::size_t i = 2; i + 2 < g.n; ++i) {
        const double x = g.x(i);
        double op;
        if (spec.has_transport())
            op = (-flux[i + 2] + 8 * flux[i + 1] - 8 * flux[i - 1] + flux[i - 2]) / (12 * h) + spec.drift_at(x) * vx[i];
        else
            op = (-val[i + 2] + 16 * val[i + 1] - 30 * val[i] + 16 * val[i - 1] - val[i - 2]) / (12 * h * h);
        const double r = vt[i] - op - spec.a(x) * val[i];
        const double loc = std::max({val[i - 2], val[i - 1], val[i], val[i + 1], val[i + 2]});
        worst = std::max(worst, std::abs(r) / (v.lambda_max() * loc));
    }
    return worst;
}

}  // namespace frontlab
