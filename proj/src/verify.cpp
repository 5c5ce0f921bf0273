#include "frontlab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "frontlab/error.hpp"

namespace frontlab {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

std::string num(double v) {
    std::ostringstream os;
    os.precision(8);
    os << v;
    return os.str();
}

struct Window {
    std::size_t i0 = 0, i1 = 0;  // stored x indices [i0, i1]
    double x0 = 0.0, x1 = 0.0;
};

Window interior(const FrontSolution& sol, const InteriorRegion& r) {
    if (sol.x.size() < 3 || sol.times.empty()) throw Error(ErrorKind::config, "empty simulation output");
    const double lo = sol.x.front() + r.edge_cells * sol.dx, hi = sol.x.back() - r.edge_cells * sol.dx;
    Window w;
    w.i0 = std::size_t(std::lower_bound(sol.x.begin(), sol.x.end(), lo - 1e-9 * sol.dx) - sol.x.begin());
    auto up = std::upper_bound(sol.x.begin(), sol.x.end(), hi + 1e-9 * sol.dx);
    if (up == sol.x.begin() || w.i0 >= sol.x.size()) throw Error(ErrorKind::config, "interior region is empty");
    w.i1 = std::size_t(up - sol.x.begin()) - 1;
    if (w.i1 < w.i0) throw Error(ErrorKind::config, "interior region is empty");
    w.x0 = sol.x[w.i0];
    w.x1 = sol.x[w.i1];
    return w;
}

// snapshot indices with t <= t1 - tail (T)
std::size_t last_time(const FrontSolution& sol, const InteriorRegion& r) {
    const double cut = sol.t1 - r.time_tail * (sol.t1 - sol.t0) + 1e-12 * std::abs(sol.t1 - sol.t0);
    std::size_t j = 0;
    while (j + 1 < sol.times.size() && sol.times[j + 1] <= cut) ++j;
    return j;
}

std::string region_text(const Window& w, double ta, double tb) {
    return "x in [" + num(w.x0) + ", " + num(w.x1) + "], t in [" + num(ta) + ", " + num(tb) + "]";
}

}  // namespace

CertificateRecord check_sandwich(const FrontSolution& sol, double tol, const InteriorRegion& region) {
    const auto w = interior(sol, region);
    const std::size_t jmax = last_time(sol, region);
    double lower = inf, upper = inf;
    double lt = 0, lx = 0, ut = 0, ux = 0;
    for (std::size_t j = 0; j <= jmax; ++j)
        for (std::size_t i = w.i0; i <= w.i1; ++i) {
            const double ml = sol.u[j][i] - sol.lower[j][i], mu = sol.upper[j][i] - sol.u[j][i];
            if (ml < lower) {
                lower = ml;
                lt = sol.times[j];
                lx = sol.x[i];
            }
            if (mu < upper) {
                upper = mu;
                ut = sol.times[j];
                ux = sol.x[i];
            }
        }
    return make_record("sandwich", region_text(w, sol.times.front(), sol.times[jmax]), std::min(lower, upper), tol,
                       "lower margin " + num(lower) + " at (t, x) = (" + num(lt) + ", " + num(lx) +
                           "); upper margin " + num(upper) + " at (" + num(ut) + ", " + num(ux) + ")");
}

MonotoneCheck check_monotone_time(const FrontSolution& sol, double tol, const InteriorRegion& region) {
    const auto w = interior(sol, region);
    const double head = sol.t0 + region.time_head * (sol.t1 - sol.t0);
    double worst = inf, wt = 0, wx = 0;
    std::vector<double> incs;
    for (std::size_t j = 0; j + 1 < sol.times.size(); ++j)
        for (std::size_t i = w.i0; i <= w.i1; ++i) {
            const double d = sol.u[j + 1][i] - sol.u[j][i];
            if (d < worst) {
                worst = d;
                wt = sol.times[j];
                wx = sol.x[i];
            }
            if (sol.times[j] >= head) incs.push_back(d);
        }
    MonotoneCheck out;
    if (!incs.empty()) {
        auto mid = incs.begin() + std::ptrdiff_t(incs.size() / 2);
        std::nth_element(incs.begin(), mid, incs.end());
        out.median_increment = *mid;
    }
    out.strict = out.median_increment > 0.0;
    if (sol.times.size() < 2) worst = 0.0;
    out.record = make_record("monotone_time", region_text(w, sol.times.front(), sol.times.back()), worst, tol,
                             "worst increment " + num(worst) + " at (t, x) = (" + num(wt) + ", " + num(wx) +
                                 "); median increment " + num(out.median_increment) +
                                 (out.strict ? " (strict)" : " (not strict)") + "; worst single-step increment " +
                                 num(sol.min_step_increment));
    out.record.pass = out.record.pass && out.strict;
    return out;
}

WidthBound width_bound(double eps, double L, const ProfileTransforms& tr) {
    if (!(eps > 0.0 && eps < 0.5)) throw Error(ErrorKind::config, "width needs 0 < eps < 1/2");
    const double hi = tr.ht_inv(1.0 - eps), lo = tr.h_inv(eps);
    return {L * std::ceil(std::log2(hi - lo)), L * std::ceil(std::log2(hi / lo))};
}

WidthCheck check_width(const FrontSolution& sol, double eps, double L, const ProfileTransforms& tr,
                       const InteriorRegion& region, WidthForm form) {
    const auto w = interior(sol, region);
    WidthCheck out;
    out.bound = width_bound(eps, L, tr);
    double at = 0.0;
    for (std::size_t j = 0; j < sol.times.size(); ++j) {
        const auto m = front_width(sol.x, sol.u[j], eps);
        out.widths.push_back(m.width);
        if (m.width > out.max_width) {
            out.max_width = m.width;
            at = sol.times[j];
        }
    }
    const bool lit = form == WidthForm::literal;
    const double bound = lit ? out.bound.literal : out.bound.ratio;
    out.record = make_record("width", region_text(w, sol.times.front(), sol.times.back()), bound - out.max_width, 0.0,
                             "eps = " + num(eps) + ", L = " + num(L) + ", max width " + num(out.max_width) +
                                 " at t = " + num(at) + ", " + (lit ? "difference" : "ratio") + " bound " +
                                 num(bound) + " (" + (lit ? "ratio" : "difference") + " form " +
                                 num(lit ? out.bound.ratio : out.bound.literal) + ")");
    return out;
}

CertificateRecord check_ratio_limit(const FrontSolution& sol, const ProfileTransforms& tr, double v_threshold,
                                    double tol, const InteriorRegion& region) {
    const auto w = interior(sol, region);
    const std::size_t jmax = last_time(sol, region);
    const double kappa = tr.curvature_bound(v_threshold);
    const double tiny = std::numeric_limits<double>::min();
    // slope defect at v = 0 of the interpolated transforms
    const double d0 = std::max(std::abs(tr.dh(1e-12) - 1.0), std::abs(tr.dht(1e-12) - 1.0));
    double worst = inf, env = inf, wt = 0, wx = 0;
    std::size_t count = 0;
    for (std::size_t j = 0; j <= jmax; ++j)
        for (std::size_t i = w.i0; i <= w.i1; ++i) {
            const double v = sol.v[j][i];
            if (!(v >= tiny) || v > v_threshold) continue;
            ++count;
            const double r = sol.u[j][i] / v, lo = tr.ht(v) / v, hi = tr.h(v) / v;
            const double m = std::min(r - lo, hi - r);
            if (m < worst) {
                worst = m;
                wt = sol.times[j];
                wx = sol.x[i];
            }
            env = std::min({env, d0 + kappa * v - std::abs(lo - 1.0), d0 + kappa * v - std::abs(hi - 1.0)});
        }
    const std::string reg = region_text(w, sol.times.front(), sol.times[jmax]) + ", v <= " + num(v_threshold);
    if (count == 0) {
        auto rec = make_record("ratio_limit", reg, std::numeric_limits<double>::quiet_NaN(), tol,
                               "inconclusive: no interior node has v <= " + num(v_threshold) +
                                   "; extend x_right or the time window");
        rec.pass = false;
        return rec;
    }
    auto rec = make_record("ratio_limit", reg, std::min(worst, env), tol,
                           std::to_string(count) + " nodes; worst ratio margin " + num(worst) + " at (t, x) = (" +
                               num(wt) + ", " + num(wx) + "); envelope ratio margin " + num(env) +
                               " with kappa = " + num(kappa) + ", slope defect " + num(d0));
    return rec;
}

CertificateRecord check_front_limits(const FrontSolution& sol, double tol, const InteriorRegion& region) {
    const auto w = interior(sol, region);
    const std::size_t jmax = last_time(sol, region);
    double worst = inf, edge = inf, wt = 0;
    for (std::size_t j = 0; j <= jmax; ++j) {
        const double left = sol.u[j][w.i0] - sol.lower[j][w.i0];
        const double right = sol.upper[j][w.i1] - sol.u[j][w.i1];
        if (std::min(left, right) < worst) {
            worst = std::min(left, right);
            wt = sol.times[j];
        }
        edge = std::min({edge, sol.lower[j][w.i0] - 0.5, 0.5 - sol.upper[j][w.i1]});
    }
    auto rec = make_record("front_limits", "edges x = " + num(w.x0) + ", " + num(w.x1), worst, tol,
                           "worst edge margin " + num(worst) + " at t = " + num(wt) + "; envelope transition margin " +
                               num(edge) + (edge < 0.0 ? " (front at the domain edge)" : ""));
    rec.pass = rec.pass && edge >= 0.0;
    return rec;
}

nlohmann::json CertificateReport::to_json() const {
    return {{"pass", pass()},
            {"provenance",
             {{"config_hash", provenance.config_hash},
              {"dx", provenance.dx},
              {"dt", provenance.dt},
              {"t0", provenance.t0},
              {"t1", provenance.t1}}},
            {"records", frontlab::to_json(records)},
            {"width",
             {{"max_width", width.max_width},
              {"bound_literal", width.bound.literal},
              {"bound_ratio", width.bound.ratio},
              {"widths", width.widths}}},
            {"monotone", {{"strict", monotone.strict}, {"median_increment", monotone.median_increment}}}};
}

std::string CertificateReport::table() const {
    std::string out;
    char line[256];
    std::snprintf(line, sizeof line, "%-34s %-5s %14s %10s\n", "certificate", "", "worst margin", "tol");
    out += line;
    for (const auto& r : records) {
        std::snprintf(line, sizeof line, "%-34s %-5s %14.6g %10.3g\n", r.name.c_str(), r.pass ? "PASS" : "FAIL",
                      r.worst_margin, r.tolerance);
        out += line;
    }
    return out;
}

CertificateReport verify_all(const FrontSolution& sol, const ProfileTransforms& tr, double L,
                             const VerifyOptions& o, Provenance provenance) {
    CertificateReport rep;
    rep.provenance = std::move(provenance);
    rep.records.push_back(check_sandwich(sol, o.sandwich_tol, o.region));
    rep.monotone = check_monotone_time(sol, o.monotone_tol, o.region);
    rep.records.push_back(rep.monotone.record);
    rep.width = check_width(sol, o.width_eps, L, tr, o.region, o.width_form);
    rep.records.push_back(rep.width.record);
    rep.records.push_back(check_ratio_limit(sol, tr, o.ratio_threshold, o.ratio_tol, o.region));
    rep.records.push_back(check_front_limits(sol, o.limits_tol, o.region));
    return rep;
}

}  // namespace frontlab
