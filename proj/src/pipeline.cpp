#include "frontlab/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <thread>

#include "frontlab/error.hpp"
#include "frontlab/io.hpp"

namespace frontlab {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) {
    char b[40];
    std::snprintf(b, sizeof b, "%.10g", v);
    return b;
}

std::string condition_text(const ReactionSpec& spec, double lambda0, double threshold) {
    const auto& b = spec.bounds;
    const std::string lead = spec.has_transport() ? "lambda1" : "2 a-";
    return "admissible lambda needs lambda0 < lambda < " + lead +
           " - 2 sqrt(nu - 1) / (sqrt(nu) + sqrt(nu - 1)) a+; here lambda0 = " + num(lambda0) +
           ", nu = " + num(b.nu) + ", a- = " + num(b.a_minus) + ", a+ = " + num(b.a_plus) +
           (spec.has_transport() ? ", lambda1 = " + num(b.lambda1) : std::string{}) +
           ", right-hand side = " + num(threshold);
}

std::string canonical_ini(const Scenario& sc) {
    std::string out, section;
    for (const auto& [k, v] : sc.entries) {
        const auto dot = k.find('.');
        const auto sec = k.substr(0, dot);
        if (sec != section) {
            out += (out.empty() ? "[" : "\n[") + sec + "]\n";
            section = sec;
        }
        out += k.substr(dot + 1) + " = " + v + "\n";
    }
    return out;
}

void gate(const std::vector<CertificateRecord>& records, const std::string& stage) {
    std::string failed;
    for (const auto& r : records)
        if (!r.pass) failed += (failed.empty() ? "" : ", ") + r.name + " (margin " + num(r.worst_margin) + ")";
    if (!failed.empty()) throw Error(ErrorKind::certificate, stage + " certificates failed: " + failed);
}

std::size_t auto_stride(const Scenario& sc) {
    if (sc.sim.x_stride > 0) return sc.sim.x_stride;
    const double intervals = std::llround((sc.sim.x_right - sc.sim.x_left) / sc.sim.dx);
    return std::max<std::size_t>(1, std::size_t(std::ceil(intervals / double(sc.max_stored_nodes - 1))));
}

struct Diagnostics {
    std::vector<double> X, width, speed;
};

Diagnostics diagnostics(const FrontSolution& sol, double eps) {
    Diagnostics d;
    const std::size_t m = sol.times.size();
    for (std::size_t j = 0; j < m; ++j) {
        double X = nan;
        try {
            X = front_position(sol.x, sol.u[j], 0.5);
        } catch (const Error&) {
        }
        d.X.push_back(X);
        const auto w = front_width(sol.x, sol.u[j], eps);
        d.width.push_back(w.empty ? nan : w.width);
    }
    const std::size_t k = std::max<std::size_t>(1, m / 20);
    for (std::size_t j = 0; j < m; ++j) {
        const std::size_t a = j >= k ? j - k : 0, b = std::min(m - 1, j + k);
        d.speed.push_back(b > a ? (d.X[b] - d.X[a]) / (sol.times[b] - sol.times[a]) : nan);
    }
    return d;
}

void write_plots(const std::filesystem::path& out, const FrontSolution& sol, const Diagnostics& d, double bound,
                 const std::string& bound_label) {
    static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd"};
    std::vector<PlotSeries> fronts;
    const std::size_t m = sol.times.size();
    for (int k = 0; k < 5; ++k) {
        const std::size_t j = (m - 1) * std::size_t(k) / 4;
        const std::string c = colors[k];
        fronts.push_back({"u, t = " + num(sol.times[j]), sol.x, sol.u[j], c, false});
        fronts.push_back({"", sol.x, sol.lower[j], c, true});
        fronts.push_back({"", sol.x, sol.upper[j], c, true});
    }
    write_text(out / "fronts.svg", svg_line_plot("front snapshots, envelopes dashed", "x", "u", fronts));
    write_text(out / "position.svg",
               svg_line_plot("front position", "t", "X(t)", {{"X(t) at level 1/2", sol.times, d.X}}));
    write_text(out / "width.svg",
               svg_line_plot("interface width", "t", "width",
                             {{"measured width", sol.times, d.width},
                              {bound_label, {sol.times.front(), sol.times.back()}, {bound, bound}, "#d62728", true}}));
}

void write_certificates(const std::filesystem::path& out, const PipelineResult& r) {
    nlohmann::json j{{"config_hash", r.config_hash},
                     {"stage", to_string(r.last)},
                     {"pass", r.pass()},
                     {"stage_certificates", to_json(r.stage_certificates)}};
    std::string table;
    if (r.report) {
        j["report"] = r.report->to_json();
        table = r.report->table();
    }
    write_json(out / "certificates.json", j);
    char line[256];
    std::string pre;
    for (const auto& c : r.stage_certificates) {
        std::snprintf(line, sizeof line, "%-34s %-5s %14.6g %10.3g\n", c.name.c_str(), c.pass ? "PASS" : "FAIL",
                      c.worst_margin, c.tolerance);
        pre += line;
    }
    write_text(out / "certificates.txt", "config " + r.config_hash + "\n\n" + pre + "\n" + table +
                                             (r.pass() ? "\nall certificates pass\n" : "\nsome certificates FAIL\n"));
}

}  // namespace

Stage parse_stage(const std::string& name) {
    for (Stage s : {Stage::validate, Stage::spectrum, Stage::eigenfunction, Stage::profile, Stage::simulate,
                    Stage::verify})
        if (to_string(s) == name) return s;
    throw Error(ErrorKind::config, "unknown stage " + name);
}

std::string_view to_string(Stage s) {
    switch (s) {
        case Stage::validate: return "validate";
        case Stage::spectrum: return "spectrum";
        case Stage::eigenfunction: return "eigenfunction";
        case Stage::profile: return "profile";
        case Stage::simulate: return "simulate";
        case Stage::verify: return "verify";
    }
    return "?";
}

bool PipelineResult::pass() const {
    return validation.valid() && all_pass(stage_certificates) && (!report || report->pass());
}

nlohmann::json PipelineResult::summary() const {
    nlohmann::json j{{"config_hash", config_hash}, {"stage", to_string(last)}, {"pass", pass()}};
    j["bounds"] = {{"a_minus", spec.bounds.a_minus}, {"a_plus", spec.bounds.a_plus}, {"nu", spec.bounds.nu}};
    if (spectrum) j["lambda0"] = spectrum->lambda0;
    if (spectrum) j["threshold_rhs"] = threshold;
    if (v) {
        j["lambda"] = lambda;
        j["alpha"] = v->alpha();
        j["L"] = v->doubling_length();
    }
    if (transforms) j["c"] = transforms->c();
    if (solution) {
        j["t0"] = solution->t0;
        j["t1"] = solution->t1;
        try {
            j["speed"] = speed_estimate(*solution).speed;
        } catch (const Error&) {
        }
    }
    return j;
}

double auto_lambda(double lambda0, double threshold, double a_minus, double margin) {
    const double top = std::min(threshold, 2.0 * a_minus);
    const double floor = std::max(margin, 1e-3) * std::abs(lambda0);
    if (!(lambda0 + floor < top))
        throw Error(ErrorKind::threshold, "auto lambda: interval (lambda0 + " + num(floor) + ", " + num(top) +
                                              ") is empty");
    return lambda0 + 0.5 * (top - lambda0);
}

PipelineResult run_pipeline(const Scenario& sc, Stage last, const std::filesystem::path& out) {
    const bool write = !out.empty();
    if (write) {
        std::filesystem::create_directories(out);
        write_text(out / "config.ini", canonical_ini(sc));
        write_json(out / "schema.json", schema_json());
    }
    PipelineResult r;
    r.last = last;
    r.config_hash = sc.hash();

    // validate
    const auto& dom = sc.sim;
    SampleGrid sample{dom.x_left, dom.x_right, sc.sample_nx, sc.sample_nu};
    if (sample.nx == 0) sample.nx = std::max<std::size_t>(2001, std::size_t((dom.x_right - dom.x_left) / 0.02) + 1);
    r.spec = make_reaction(sc.reaction);
    r.validation = validate_spec(r.spec, sample);
    if (write) write_json(out / "validation.json", r.validation.to_json());
    if (!r.validation.valid()) {
        std::string failed;
        for (const auto& c : r.validation.checks) {
            if (c.pass) continue;
            failed += (failed.empty() ? "" : "; ") + c.name;
            if (c.name != "drift_gate" && !c.where.empty()) failed += " at " + c.where;
            if (c.name == "drift_gate")
                failed += " (needs q+ <= 2 sqrt((aA)-); q+ = " + num(r.validation.bounds.q_plus) +
                          ", (aA)- = " + num(r.validation.bounds.aA_minus) + ")";
        }
        throw Error(ErrorKind::invalid_spec, "hypotheses failed: " + failed);
    }
    r.spec.bounds = r.validation.bounds;
    r.spec.validated = true;
    if (last == Stage::validate) return r;

    // spectrum and the choice of lambda
    const auto spec_intervals = std::size_t(std::llround(2.0 * sc.spectrum_half_width / sc.spectrum_mesh));
    r.spectrum = sup_spectrum(r.spec, sc.spectrum_half_width, spec_intervals);
    const double lambda0 = r.spectrum->lambda0;
    r.threshold = threshold_rhs(r.spec);
    std::vector<std::pair<double, double>> modes = sc.modes;
    std::string rule = "modes";
    if (modes.empty()) {
        if (sc.lambda) {
            modes.emplace_back(*sc.lambda, 1.0);
            rule = "explicit";
        } else {
            try {
                modes.emplace_back(auto_lambda(lambda0, r.threshold, r.spec.bounds.a_minus, sc.lambda_margin), 1.0);
            } catch (const Error&) {
                throw Error(ErrorKind::threshold, "rejected before simulation: " +
                                                      condition_text(r.spec, lambda0, r.threshold));
            }
            rule = "auto";
        }
    }
    for (const auto& [lam, w] : modes) {
        if (!(lam > lambda0) || !(lam < r.threshold))
            throw Error(ErrorKind::threshold, "rejected before simulation: lambda = " + num(lam) + " fails; " +
                                                  condition_text(r.spec, lambda0, r.threshold));
        if (!(w >= 0.0)) throw Error(ErrorKind::degenerate_measure, "mode weights must be non-negative");
    }
    r.lambda = -std::numeric_limits<double>::infinity();
    for (const auto& [lam, w] : modes)
        if (w > 0.0) r.lambda = std::max(r.lambda, lam);
    if (write) {
        CsvWriter csv(out, "spectrum.csv");
        for (const auto& h : r.spectrum->history) csv.row({h.half_width, h.mesh, h.estimate});
        csv.close();
        write_json(out / "spectrum.json", {{"lambda0", lambda0},
                                           {"threshold_rhs", r.threshold},
                                           {"nu", r.spec.bounds.nu},
                                           {"a_minus", r.spec.bounds.a_minus},
                                           {"a_plus", r.spec.bounds.a_plus},
                                           {"lambda", r.lambda},
                                           {"lambda_rule", rule}});
    }
    if (last == Stage::spectrum) return r;

    // eigenfunctions
    const double X = sc.eigen_half_width > 0.0 ? sc.eigen_half_width
                                               : std::max(std::abs(dom.x_left), std::abs(dom.x_right)) + 20.0;
    const double mesh = sc.eigen_mesh > 0.0 ? sc.eigen_mesh : dom.dx;
    EigenOptions eo;
    eo.lambda0 = lambda0;
    std::vector<WeightedMode> wm;
    for (const auto& [lam, w] : modes) {
        auto pair = eigenfunction(r.spec, lam, X, intervals_for_mesh(X, mesh), eo);
        const auto gb = gradient_bound(r.spec, pair);
        const std::string tag = " lambda=" + num(lam);
        r.stage_certificates.push_back(make_record("eigen_residual" + tag, "window [-" + num(X) + ", " + num(X) + "]",
                                                   -pair.residual, 1e-6));
        r.stage_certificates.push_back(make_record("eigen_gradient" + tag, "eigen grid",
                                                   gb.scale > 0 ? -gb.worst_margin / gb.scale : -gb.worst_margin,
                                                   1e-10, "worst relative " + num(gb.worst_relative)));
        wm.push_back({std::move(pair), w});
    }
    auto v = std::make_shared<const LinearizedSolution>(superpose(std::move(wm)));
    r.v = v;
    if (!std::isfinite(v->doubling_length()))
        throw Error(ErrorKind::window_too_small, "no doubling length on the eigen window; enlarge eigen_half_width");
    if (write) {
        const Eigenpair* lead = &v->modes().front().pair;
        for (const auto& m : v->modes())
            if (m.weight > 0.0 && m.pair.lambda >= lead->lambda) lead = &m.pair;
        CsvWriter csv(out, "eigenfunction.csv");
        for (std::size_t i = 0; i < lead->grid.n; ++i) {
            const double x = lead->grid.x(i), a = r.spec.a(x);
            csv.row({x, lead->phi[i], lead->dphi[i], a, r.spec.diffusion_at(x) * lead->dphi[i] * lead->dphi[i],
                     lead->alpha * a * lead->phi[i] * lead->phi[i]});
        }
        csv.close();
        nlohmann::json mj = nlohmann::json::array();
        double residual = 0.0;
        for (const auto& m : v->modes()) {
            mj.push_back({{"lambda", m.pair.lambda}, {"weight", m.weight}, {"residual", m.pair.residual},
                          {"gradient_margin", m.pair.gradient_margin}, {"L", m.pair.doubling_length}});
            residual = std::max(residual, m.pair.residual);
        }
        write_json(out / "eigenfunction.json", {{"lambda", r.lambda},
                                                {"lambda0", lambda0},
                                                {"alpha", v->alpha()},
                                                {"L", v->doubling_length()},
                                                {"residual", residual},
                                                {"half_width", X},
                                                {"mesh", lead->grid.dx},
                                                {"modes", mj}});
    }
    gate(r.stage_certificates, "eigenfunction");
    if (last == Stage::eigenfunction) return r;

    // profiles and transforms
    auto tr = std::make_shared<const ProfileTransforms>(build_transforms(r.spec, v->alpha()));
    r.transforms = tr;
    const auto pc = tr->certificates();
    r.stage_certificates.insert(r.stage_certificates.end(), pc.begin(), pc.end());
    if (write) {
        for (const auto* p : {&tr->super_profile(), &tr->sub_profile()}) {
            CsvWriter csv(out, p == &tr->super_profile() ? "profile_super.csv" : "profile_sub.csv");
            for (std::size_t i = 0; i < p->U.size(); ++i) csv.row({p->s.x(i), p->U[i], p->V[i]});
            csv.close();
        }
        CsvWriter csv(out, "transforms.csv");
        const double vlo = 1e-8, vhi = tr->v_max();
        for (int k = 0; k <= 800; ++k) {
            const double vv = vlo * std::pow(vhi / vlo, k / 800.0);
            csv.row({vv, tr->h(vv), tr->ht(vv), tr->d2h(vv)});
        }
        csv.close();
        write_json(out / "profile.json", tr->to_json());
    }
    gate(r.stage_certificates, "profile");
    if (last == Stage::profile) return r;

    // simulation
    SimulationConfig cfg = sc.sim;
    cfg.x_stride = auto_stride(sc);
    if (sc.auto_window) std::tie(cfg.t0, cfg.t1) = auto_time_window(r.fields(), cfg.x_left, cfg.x_right, cfg.dx);
    {
        std::vector<double> ts, xs;
        for (int k = 0; k <= 10; ++k) ts.push_back(cfg.t0 + (cfg.t1 - cfg.t0) * k / 10.0);
        const std::size_t nx = 2000;
        for (std::size_t i = 0; i <= nx; ++i) xs.push_back(cfg.x_left + (cfg.x_right - cfg.x_left) * double(i) / nx);
        r.stage_certificates.push_back(gradient_certificate(r.spec, *v, ts, xs));
        gate(r.stage_certificates, "slab");
    }
    auto sol = std::make_shared<const FrontSolution>(run(r.spec, r.fields(), cfg));
    r.solution = sol;
    const double bound_now = [&] {
        const auto b = width_bound(sc.verify.width_eps, v->doubling_length(), *tr);
        return sc.verify.width_form == WidthForm::literal ? b.literal : b.ratio;
    }();
    if (write) {
        CsvWriter snaps(out, "snapshots.csv");
        for (std::size_t j = 0; j < sol->times.size(); ++j)
            for (std::size_t i = 0; i < sol->x.size(); ++i)
                snaps.row({sol->times[j], sol->x[i], sol->u[j][i], sol->lower[j][i], sol->upper[j][i]});
        snaps.close();
        const auto d = diagnostics(*sol, sc.verify.width_eps);
        CsvWriter diag(out, "diagnostics.csv");
        for (std::size_t j = 0; j < sol->times.size(); ++j) diag.row({sol->times[j], d.X[j], d.width[j], d.speed[j]});
        diag.close();
        auto j = summary_json(*sol);
        j["config_hash"] = r.config_hash;
        j["lambda"] = r.lambda;
        j["alpha"] = v->alpha();
        j["L"] = v->doubling_length();
        write_json(out / "run.json", j);
        if (sc.plots) write_plots(out, *sol, d, bound_now, "L_eps bound");
    }
    if (last == Stage::simulate) {
        if (write) write_certificates(out, r);
        return r;
    }

    // verify
    r.report = verify_all(*sol, *tr, v->doubling_length(), sc.verify,
                          {r.config_hash, sol->dx, sol->dt, sol->t0, sol->t1});
    if (write) write_certificates(out, r);
    return r;
}

PipelineResult verify_run_directory(const std::filesystem::path& dir) {
    const auto sc = load_scenario(dir / "config.ini");
    auto r = run_pipeline(sc, Stage::profile);
    r.last = Stage::verify;
    const auto meta = nlohmann::json::parse(read_text(dir / "run.json"));
    if (meta.value("config_hash", std::string{}) != r.config_hash)
        throw Error(ErrorKind::config, "run.json was produced by a different config");
    const auto csv = read_csv(dir / "snapshots.csv");
    const std::size_t ct = csv.column("t"), cx = csv.column("x"), cu = csv.column("u"), cl = csv.column("w_tilde"),
                      cw = csv.column("w_clamped");
    auto sol = std::make_shared<FrontSolution>();
    for (const auto& row : csv.rows) {
        if (sol->times.empty() || row[ct] != sol->times.back()) {
            sol->times.push_back(row[ct]);
            sol->u.emplace_back();
            sol->lower.emplace_back();
            sol->upper.emplace_back();
            sol->v.emplace_back();
        }
        if (sol->times.size() == 1) sol->x.push_back(row[cx]);
        sol->u.back().push_back(row[cu]);
        sol->lower.back().push_back(row[cl]);
        sol->upper.back().push_back(row[cw]);
        sol->v.back().push_back(r.v->value(row[ct], row[cx]));
    }
    for (const auto& u : sol->u)
        if (u.size() != sol->x.size()) throw Error(ErrorKind::config, "snapshots.csv has ragged snapshots");
    sol->dx = meta.at("dx");
    sol->dt = meta.at("dt");
    sol->t0 = meta.at("t0");
    sol->t1 = meta.at("t1");
    sol->steps = meta.at("steps");
    sol->x_stride = meta.at("x_stride");
    sol->full_nodes = meta.at("nodes");
    sol->min_step_increment = meta.at("min_step_increment");
    sol->clamp_count = meta.at("clamp_count");
    r.solution = sol;
    r.report = verify_all(*sol, *r.transforms, r.v->doubling_length(), sc.verify,
                          {r.config_hash, sol->dx, sol->dt, sol->t0, sol->t1});
    write_certificates(dir, r);
    return r;
}

std::vector<SweepRow> sweep(const Scenario& base, const std::string& parameter, const std::vector<double>& values,
                            const std::filesystem::path& out, unsigned threads) {
    static const std::vector<std::string> names{"lambda", "beta", "a-amplitude", "mesh"};
    if (std::find(names.begin(), names.end(), parameter) == names.end())
        throw Error(ErrorKind::config, "sweep parameter must be lambda, beta, a-amplitude or mesh");
    if (values.empty()) throw Error(ErrorKind::config, "sweep needs at least one value");
    auto variant = [&](double value) {
        char text[40];
        std::snprintf(text, sizeof text, "%.17g", value);
        if (parameter == "lambda") return with_override(base, "lambda", "value", text);
        if (parameter == "beta") return with_override(base, "reaction", "beta", text);
        if (parameter == "a-amplitude") {
            auto p = base.reaction.a_params;
            if (p.size() < 2) throw Error(ErrorKind::config, "a-amplitude sweep needs an a_kind with two parameters");
            p[1] = value;
            std::string list;
            for (double q : p) {
                char b[40];
                std::snprintf(b, sizeof b, "%.17g", q);
                list += (list.empty() ? "" : ", ") + std::string(b);
            }
            return with_override(base, "reaction", "a_params", list);
        }
        const double r = value / base.sim.dx;
        char dt[40];
        std::snprintf(dt, sizeof dt, "%.17g", base.sim.dt * r * r);
        return with_override(with_override(base, "scheme", "dx", text), "scheme", "dt", dt);
    };
    std::vector<SweepRow> rows(values.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < values.size(); k = next++) {
            auto& row = rows[k];
            row.value = values[k];
            try {
                const auto dir = out.empty() ? out : out / (parameter + "_" + std::to_string(k));
                const auto res = run_pipeline(variant(values[k]), Stage::verify, dir);
                row.speed = speed_estimate(*res.solution).speed;
                row.max_width = res.report->width.max_width;
                row.worst_sandwich_margin = res.report->records.front().worst_margin;
                row.pass = res.pass();
            } catch (const std::exception& e) {
                row.speed = row.max_width = row.worst_sandwich_margin = nan;
                row.pass = false;
                row.error = e.what();
            }
        }
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, unsigned(values.size()));
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return rows;
}

void write_sweep_csv(const std::filesystem::path& dir, const std::vector<SweepRow>& rows) {
    std::filesystem::create_directories(dir);
    CsvWriter csv(dir, "sweep.csv");
    for (const auto& r : rows)
        csv.row({r.value, r.speed, r.max_width, r.worst_sandwich_margin, r.pass ? 1.0 : 0.0, r.error.empty() ? 0.0 : 1.0});
    csv.close();
}

}  // namespace frontlab
