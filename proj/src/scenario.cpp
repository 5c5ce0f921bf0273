#include "frontlab/scenario.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "frontlab/error.hpp"

namespace frontlab {

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"reaction",
         {"kind", "beta", "a_kind", "a_params", "g0_kind", "g1_kind", "table_u", "table_f", "A_kind", "A_params",
          "q_kind", "q_params", "sample_nx", "sample_nu"}},
        {"lambda", {"value", "modes", "margin", "spectrum_half_width", "spectrum_mesh"}},
        {"domain", {"x_left", "x_right", "eigen_half_width", "eigen_mesh"}},
        {"scheme", {"dx", "dt", "theta", "t0", "t1", "snapshots", "reaction_scale", "exhaust_fraction"}},
        {"output", {"x_stride", "max_stored_nodes", "plots"}},
        {"verify",
         {"sandwich_tol", "monotone_tol", "width_eps", "width_form", "ratio_threshold", "ratio_tol", "limits_tol",
          "edge_cells", "time_head", "time_tail"}},
    };
    return keys;
}

double to_double(const std::string& key, const std::string& s) {
    double v = 0.0;
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || p != end || !std::isfinite(v))
        throw Error(ErrorKind::config, key + ": '" + s + "' is not a finite number");
    return v;
}

std::size_t to_count(const std::string& key, const std::string& s) {
    const double v = to_double(key, s);
    if (v < 0.0 || v != std::floor(v)) throw Error(ErrorKind::config, key + ": expected a non-negative integer");
    return std::size_t(v);
}

bool to_bool(const std::string& key, const std::string& s) {
    const auto l = boost::to_lower_copy(s);
    if (l == "true" || l == "yes" || l == "1" || l == "on") return true;
    if (l == "false" || l == "no" || l == "0" || l == "off") return false;
    throw Error(ErrorKind::config, key + ": expected a boolean");
}

std::vector<std::string> tokens(const std::string& s) {
    std::vector<std::string> out;
    boost::split(out, s, boost::is_any_of(", \t"), boost::token_compress_on);
    out.erase(std::remove(out.begin(), out.end(), std::string{}), out.end());
    return out;
}

std::vector<double> to_list(const std::string& key, const std::string& s) {
    std::vector<double> out;
    for (const auto& t : tokens(s)) out.push_back(to_double(key, t));
    return out;
}

Scenario from_entries(std::map<std::string, std::string> entries) {
    Scenario sc;
    for (const auto& [k, v] : entries) {
        const auto dot = k.find('.');
        const auto sec = k.substr(0, dot), key = k.substr(dot + 1);
        auto it = known_keys().find(sec);
        if (it == known_keys().end()) throw Error(ErrorKind::config, "unknown section [" + sec + "]");
        if (!it->second.count(key)) throw Error(ErrorKind::config, "unknown key '" + key + "' in [" + sec + "]");
    }
    auto get = [&](const std::string& k) -> const std::string* {
        auto it = entries.find(k);
        return it == entries.end() ? nullptr : &it->second;
    };
    auto num = [&](const std::string& k, double& dst) {
        if (auto s = get(k)) dst = to_double(k, *s);
    };
    auto count = [&](const std::string& k, std::size_t& dst) {
        if (auto s = get(k)) dst = to_count(k, *s);
    };
    auto str = [&](const std::string& k, std::string& dst) {
        if (auto s = get(k)) dst = *s;
    };
    auto list = [&](const std::string& k, std::vector<double>& dst) {
        if (auto s = get(k)) dst = to_list(k, *s);
    };

    auto& r = sc.reaction;
    str("reaction.kind", r.kind);
    num("reaction.beta", r.beta);
    str("reaction.a_kind", r.a_kind);
    list("reaction.a_params", r.a_params);
    str("reaction.g0_kind", r.g0_kind);
    str("reaction.g1_kind", r.g1_kind);
    list("reaction.table_u", r.table_u);
    list("reaction.table_f", r.table_f);
    str("reaction.A_kind", r.A_kind);
    list("reaction.A_params", r.A_params);
    str("reaction.q_kind", r.q_kind);
    list("reaction.q_params", r.q_params);
    count("reaction.sample_nx", sc.sample_nx);
    count("reaction.sample_nu", sc.sample_nu);

    if (auto s = get("lambda.value"); s && boost::to_lower_copy(*s) != "auto") sc.lambda = to_double("lambda.value", *s);
    if (auto s = get("lambda.modes")) {
        for (const auto& t : tokens(*s)) {
            const auto colon = t.find(':');
            if (colon == std::string::npos) throw Error(ErrorKind::config, "lambda.modes: expected lambda:weight pairs");
            sc.modes.emplace_back(to_double("lambda.modes", t.substr(0, colon)),
                                  to_double("lambda.modes", t.substr(colon + 1)));
        }
        if (sc.modes.empty()) throw Error(ErrorKind::config, "lambda.modes is empty");
        if (sc.lambda) throw Error(ErrorKind::config, "lambda.value and lambda.modes are exclusive");
    }
    num("lambda.margin", sc.lambda_margin);
    num("lambda.spectrum_half_width", sc.spectrum_half_width);
    num("lambda.spectrum_mesh", sc.spectrum_mesh);

    auto& c = sc.sim;
    num("domain.x_left", c.x_left);
    num("domain.x_right", c.x_right);
    num("domain.eigen_half_width", sc.eigen_half_width);
    num("domain.eigen_mesh", sc.eigen_mesh);
    num("scheme.dx", c.dx);
    num("scheme.dt", c.dt);
    if (auto s = get("scheme.theta"); s && boost::to_lower_copy(*s) != "auto") c.theta = to_double("scheme.theta", *s);
    const bool has_t0 = get("scheme.t0") != nullptr, has_t1 = get("scheme.t1") != nullptr;
    if (has_t0 != has_t1) throw Error(ErrorKind::config, "scheme.t0 and scheme.t1 must be given together");
    sc.auto_window = !has_t0;
    num("scheme.t0", c.t0);
    num("scheme.t1", c.t1);
    count("scheme.snapshots", c.snapshots);
    num("scheme.reaction_scale", c.reaction_scale);
    num("scheme.exhaust_fraction", c.exhaust_fraction);
    c.x_stride = 0;
    count("output.x_stride", c.x_stride);
    count("output.max_stored_nodes", sc.max_stored_nodes);
    if (auto s = get("output.plots")) sc.plots = to_bool("output.plots", *s);

    auto& o = sc.verify;
    num("verify.sandwich_tol", o.sandwich_tol);
    num("verify.monotone_tol", o.monotone_tol);
    num("verify.width_eps", o.width_eps);
    if (auto s = get("verify.width_form")) {
        if (*s == "literal") o.width_form = WidthForm::literal;
        else if (*s == "ratio") o.width_form = WidthForm::ratio;
        else throw Error(ErrorKind::config, "verify.width_form: expected literal or ratio");
    }
    num("verify.ratio_threshold", o.ratio_threshold);
    num("verify.ratio_tol", o.ratio_tol);
    num("verify.limits_tol", o.limits_tol);
    num("verify.edge_cells", o.region.edge_cells);
    num("verify.time_head", o.region.time_head);
    num("verify.time_tail", o.region.time_tail);

    if (!(c.x_left < c.x_right)) throw Error(ErrorKind::config, "domain: x_left must be below x_right");
    if (!(c.dx > 0.0) || !(c.dt > 0.0)) throw Error(ErrorKind::config, "scheme: dx and dt must be positive");
    if (c.snapshots < 2) throw Error(ErrorKind::config, "scheme.snapshots must be at least 2");
    if (!(sc.spectrum_half_width > 0.0) || !(sc.spectrum_mesh > 0.0))
        throw Error(ErrorKind::config, "lambda: spectrum window and mesh must be positive");
    if (sc.eigen_half_width < 0.0 || sc.eigen_mesh < 0.0)
        throw Error(ErrorKind::config, "domain: eigen window and mesh must be non-negative");
    if (sc.lambda_margin < 0.0) throw Error(ErrorKind::config, "lambda.margin must be non-negative");
    if ((sc.sample_nx != 0 && sc.sample_nx < 3) || sc.sample_nu < 3) throw Error(ErrorKind::config, "reaction: sample grid too small");
    if (sc.max_stored_nodes < 3) throw Error(ErrorKind::config, "output.max_stored_nodes must be at least 3");

    for (const auto& [k, v] : entries) sc.canonical += k + " = " + v + "\n";
    sc.entries = std::move(entries);
    return sc;
}

}  // namespace

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string Scenario::hash() const { return fnv1a_hex(canonical); }

Scenario parse_scenario(const std::string& text) {
    boost::property_tree::ptree tree;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw Error(ErrorKind::config, std::string("malformed config: ") + e.what());
    }
    std::map<std::string, std::string> entries;
    for (const auto& [sec, body] : tree) {
        if (body.empty() && !body.data().empty())
            throw Error(ErrorKind::config, "key '" + sec + "' outside a section");
        for (const auto& [key, val] : body) entries[sec + "." + key] = boost::trim_copy(val.data());
    }
    return from_entries(std::move(entries));
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::config, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

Scenario with_override(const Scenario& base, const std::string& section, const std::string& key,
                       const std::string& value) {
    auto entries = base.entries;
    entries[section + "." + key] = value;
    return from_entries(std::move(entries));
}

}  // namespace frontlab
