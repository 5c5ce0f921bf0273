#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "frontlab/error.hpp"
#include "frontlab/io.hpp"
#include "frontlab/pipeline.hpp"

using namespace frontlab;
namespace fs = std::filesystem;

namespace {

const char* kpp_text = R"(
; coarse homogeneous KPP
[reaction]
kind = kpp

[lambda]
value = 1.5

[domain]
x_left = -50
x_right = 50

[scheme]
dx = 0.04
dt = 2.5e-3
snapshots = 41
)";

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("frontlab_test_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("FNV-1a matches the published 64-bit test vectors") {
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
    CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("scenario parsing, canonical form and hash") {
    auto a = parse_scenario(kpp_text);
    CHECK(a.reaction.kind == "kpp");
    CHECK(*a.lambda == 1.5);
    CHECK(a.sim.dx == 0.04);
    CHECK(a.sim.snapshots == 41);
    CHECK(a.auto_window);
    CHECK(a.verify.width_form == WidthForm::ratio);

    // key order, comments and spacing do not change the hash
    auto b = parse_scenario("[scheme]\nsnapshots=41\ndt = 2.5e-3\ndx= 0.04\n[domain]\nx_right = 50\nx_left = -50\n"
                            "[lambda]\nvalue = 1.5\n[reaction]\n# comment\nkind = kpp\n");
    CHECK(a.hash() == b.hash());
    auto c = with_override(a, "lambda", "value", "1.4");
    CHECK(c.hash() != a.hash());
    CHECK(*c.lambda == 1.4);

    CHECK_THROWS_AS(parse_scenario("[reaction]\nkindd = kpp\n"), Error);
    CHECK_THROWS_AS(parse_scenario("[physics]\nkind = kpp\n"), Error);
    CHECK_THROWS_AS(parse_scenario("[scheme]\nt0 = 1\n"), Error);
    CHECK_THROWS_AS(parse_scenario("[scheme]\ndx = fast\n"), Error);
    CHECK_THROWS_AS(parse_scenario("[lambda]\nvalue = 1.3\nmodes = 1.3:1\n"), Error);
    auto m = parse_scenario("[lambda]\nmodes = 1.3:0.5, 1.4:1\n[verify]\nwidth_form = literal\n");
    REQUIRE(m.modes.size() == 2);
    CHECK(m.modes[1].first == 1.4);
    CHECK(m.modes[0].second == 0.5);
    CHECK(m.verify.width_form == WidthForm::literal);
}

TEST_CASE("auto lambda is the midpoint of the admissible interval") {
    CHECK(auto_lambda(1.0, 2.0, 1.0, 1e-3) == 1.5);
    CHECK(auto_lambda(1.0, 3.0, 1.0, 1e-3) == 1.5);  // capped by 2 a-
    CHECK(auto_lambda(1.0, 1.5, 1.0, 1e-3) == 1.25);
    CHECK_THROWS_AS(auto_lambda(1.0, 1.0005, 1.0, 1e-3), Error);
    CHECK_THROWS_AS(auto_lambda(1.0, -0.485, 1.0, 1e-3), Error);
}

TEST_CASE("CSV rows round-trip exactly and follow the schema") {
    const auto dir = scratch("csv");
    fs::create_directories(dir);
    const std::vector<double> vals{0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, std::nextafter(1.0, 2.0)};
    {
        CsvWriter w(dir, "snapshots.csv");
        w.row(std::span<const double>(vals));
        CHECK_THROWS_AS(w.row({1.0, 2.0}), Error);
        w.close();
    }
    auto d = read_csv(dir / "snapshots.csv");
    CHECK(d.columns == csv_table("snapshots.csv").columns);
    REQUIRE(d.rows.size() == 1);
    for (std::size_t i = 0; i < vals.size(); ++i) CHECK(d.rows[0][i] == vals[i]);
    CHECK(schema_json().size() == csv_schema().size());
    const auto svg = svg_line_plot("t", "x", "y", {{"a", {0, 1, 2}, {1, 0, 1}}});
    CHECK(svg.find("<polyline") != std::string::npos);
    CHECK(svg.rfind("</svg>") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("gate: nu = 2 with a- = 1, a+ = 3 is rejected before simulation") {
    const auto dir = scratch("gate");
    auto sc = parse_scenario("[reaction]\nkind = cubic\nbeta = 1\na_kind = sine\na_params = 2, 1, 1\n");
    try {
        run_pipeline(sc, Stage::verify, dir);
        FAIL("expected a threshold error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::threshold);
        const std::string msg = e.what();
        CHECK(msg.find("2 a- - 2 sqrt(nu - 1) / (sqrt(nu) + sqrt(nu - 1)) a+") != std::string::npos);
        CHECK(msg.find("-0.485") != std::string::npos);
        CHECK(msg.find("lambda0 = ") != std::string::npos);
    }
    CHECK(fs::exists(dir / "validation.json"));
    CHECK_FALSE(fs::exists(dir / "snapshots.csv"));
    CHECK_FALSE(fs::exists(dir / "eigenfunction.csv"));
    // explicit lambda at or above the threshold is rejected the same way
    auto k = parse_scenario("[reaction]\nkind = kpp\n[lambda]\nvalue = 2.0\n");
    CHECK_THROWS_AS(run_pipeline(k, Stage::eigenfunction), Error);
    fs::remove_all(dir);
}

TEST_CASE("gate: drift above 2 sqrt((aA)-) is rejected at validation") {
    auto sc = parse_scenario("[reaction]\nkind = kpp\nA_kind = constant\nA_params = 1\nq_kind = constant\n"
                             "q_params = 3\n");
    try {
        run_pipeline(sc, Stage::verify);
        FAIL("expected an invalid-spec error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::invalid_spec);
        CHECK(std::string(e.what()).find("q+ <= 2 sqrt((aA)-)") != std::string::npos);
    }
}

TEST_CASE("homogeneous KPP end to end: every certificate passes, artifacts are deterministic") {
    const auto d1 = scratch("kpp1"), d2 = scratch("kpp2");
    const auto sc = parse_scenario(kpp_text);
    auto r = run_pipeline(sc, Stage::verify, d1);
    for (const auto& c : r.stage_certificates) CHECK_MESSAGE(c.pass, c.name << " " << c.worst_margin);
    for (const auto& c : r.report->records) CHECK_MESSAGE(c.pass, c.name << " " << c.worst_margin);
    CHECK(r.pass());
    CHECK(r.lambda == 1.5);
    CHECK(r.v->alpha() == doctest::Approx(0.5));
    CHECK(speed_estimate(*r.solution).speed == doctest::Approx(1.5 / std::sqrt(0.5)).epsilon(0.02));
    for (const char* f : {"config.ini", "schema.json", "validation.json", "spectrum.json", "eigenfunction.json",
                          "profile.json", "run.json", "certificates.json", "certificates.txt", "fronts.svg",
                          "position.svg", "width.svg"})
        CHECK_MESSAGE(fs::exists(d1 / f), f);

    run_pipeline(sc, Stage::verify, d2);
    int csvs = 0;
    for (const auto& e : fs::directory_iterator(d1)) {
        if (e.path().extension() != ".csv") continue;
        ++csvs;
        CHECK_MESSAGE(read_text(e.path()) == read_text(d2 / e.path().filename()), e.path().filename());
    }
    CHECK(csvs == 7);

    // re-verification from disk reproduces the in-memory report
    auto again = verify_run_directory(d1);
    REQUIRE(again.report);
    for (std::size_t i = 0; i < r.report->records.size(); ++i) {
        CHECK(again.report->records[i].name == r.report->records[i].name);
        CHECK(again.report->records[i].pass == r.report->records[i].pass);
    }
    CHECK(again.report->records[0].worst_margin == r.report->records[0].worst_margin);
    CHECK(again.report->width.max_width == r.report->width.max_width);
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST_CASE("lambda sweep follows the dispersion relation") {
    const auto sc = parse_scenario(kpp_text);
    const std::vector<double> lambdas{1.1, 1.2, 1.3, 1.4, 1.5};
    auto rows = sweep(sc, "lambda", lambdas, {}, 2);
    REQUIRE(rows.size() == 5);
    for (const auto& row : rows) {
        CHECK_MESSAGE(row.error.empty(), row.error);
        CHECK(row.pass);
        CHECK(row.speed == doctest::Approx(row.value / std::sqrt(row.value - 1.0)).epsilon(0.02));
    }
    CHECK_THROWS_AS(sweep(sc, "gamma", lambdas), Error);
    auto bad = sweep(sc, "lambda", {2.5});
    CHECK_FALSE(bad[0].pass);
    CHECK(bad[0].error.find("threshold") != std::string::npos);
}

TEST_CASE("beta sweep: beta = 0 reproduces the KPP row with h the identity") {
    auto base = with_override(parse_scenario(kpp_text), "reaction", "kind", "cubic");
    auto rows = sweep(base, "beta", {0.0, 0.5});
    auto kpp = sweep(parse_scenario(kpp_text), "lambda", {1.5});
    CHECK(rows[0].pass);
    CHECK(rows[0].speed == kpp[0].speed);
    CHECK(rows[0].worst_sandwich_margin == kpp[0].worst_sandwich_margin);
    auto prof = run_pipeline(with_override(base, "reaction", "beta", "0"), Stage::profile);
    for (double v : {1e-6, 1e-3, 0.1, 0.5, 0.9, 1.0}) CHECK(std::abs(prof.transforms->h(v) - v) <= 1e-8);
}

TEST_CASE("mesh sweep: sandwich violations shrink under (dx, dt) -> (dx/2, dt/4)") {
    auto rows = sweep(parse_scenario(kpp_text), "mesh", {0.08, 0.04, 0.02});
    for (const auto& r : rows) CHECK_MESSAGE(r.error.empty(), r.error);
    const double v0 = -rows[0].worst_sandwich_margin, v1 = -rows[1].worst_sandwich_margin,
                 v2 = -rows[2].worst_sandwich_margin;
    MESSAGE("violations " << v0 << " " << v1 << " " << v2);
    CHECK(v1 < v0 / 3.0);
    CHECK(v2 < v1 / 3.0);
}
