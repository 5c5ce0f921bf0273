#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "frontlab/error.hpp"
#include "frontlab/io.hpp"
#include "frontlab/pipeline.hpp"

using namespace frontlab;

namespace {

// 0 all certificates pass, 1 a certificate failed, 2 scenario rejected, 3 any other error
constexpr int exit_fail = 1, exit_rejected = 2, exit_error = 3;

void print_records(const std::vector<CertificateRecord>& records) {
    for (const auto& r : records)
        std::printf("%-40s %-5s %14.6g %10.3g\n", r.name.c_str(), r.pass ? "PASS" : "FAIL", r.worst_margin,
                    r.tolerance);
}

int report(const PipelineResult& r) {
    std::cout << r.summary().dump(2) << "\n";
    if (r.last == Stage::validate) {
        for (const auto& c : r.validation.checks)
            std::printf("%-40s %-5s %14.6g\n", c.name.c_str(), c.pass ? "PASS" : "FAIL", c.worst_violation);
    }
    print_records(r.stage_certificates);
    if (r.report) std::cout << "\n" << r.report->table();
    std::cout << (r.pass() ? "all certificates pass\n" : "some certificates FAIL\n");
    return r.pass() ? 0 : exit_fail;
}

int classify(const Error& e) {
    switch (e.kind()) {
        case ErrorKind::config:
        case ErrorKind::threshold:
        case ErrorKind::invalid_spec:
        case ErrorKind::envelope:
        case ErrorKind::no_decaying_solution:
        case ErrorKind::degenerate_measure: return exit_rejected;
        case ErrorKind::certificate: return exit_fail;
        default: return exit_error;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"frontlab: transition fronts of heterogeneous monostable reaction-diffusion equations"};
    app.require_subcommand(1, 1);
    std::string config, out, param, values_text;
    unsigned threads = 0;

    const char* stages[] = {"validate", "spectrum", "eigenfunction", "profile", "simulate", "pipeline"};
    const char* help[] = {"check the reaction hypotheses and bounds",
                          "estimate lambda0 and choose lambda",
                          "leading generalized eigenfunction and its certificates",
                          "sub and super profiles, transforms and their certificates",
                          "run the PDE between the envelopes",
                          "all stages including verification"};
    for (int k = 0; k < 6; ++k) {
        auto* sub = app.add_subcommand(stages[k], help[k]);
        sub->add_option("--config", config, "scenario INI file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out, "output directory");
    }
    auto* verify = app.add_subcommand("verify", "re-certify a run directory written by simulate or pipeline");
    verify->add_option("--out", out, "run directory")->required()->check(CLI::ExistingDirectory);
    verify->add_option("--config", config, "scenario INI file; must match the run")->check(CLI::ExistingFile);
    auto* sw = app.add_subcommand("sweep", "run one parameter over several values, concurrently");
    sw->add_option("--config", config, "base scenario INI file")->required()->check(CLI::ExistingFile);
    sw->add_option("--out", out, "output directory");
    sw->add_option("--param", param, "lambda | beta | a-amplitude | mesh")->required();
    sw->add_option("--values", values_text, "comma separated values")->required();
    sw->add_option("--threads", threads, "worker threads, 0 for all cores");

    CLI11_PARSE(app, argc, argv);

    try {
        if (verify->parsed()) {
            if (!config.empty() && load_scenario(config).hash() != load_scenario(out + "/config.ini").hash())
                throw Error(ErrorKind::config, "--config does not match the run directory");
            return report(verify_run_directory(out));
        }
        const auto sc = load_scenario(config);
        if (sw->parsed()) {
            std::vector<double> values;
            std::size_t pos = 0;
            while (pos <= values_text.size()) {
                const auto end = std::min(values_text.find(',', pos), values_text.size());
                const auto tok = values_text.substr(pos, end - pos);
                if (!tok.empty()) values.push_back(std::stod(tok));
                pos = end + 1;
            }
            auto rows = sweep(sc, param, values, out, threads);
            if (!out.empty()) write_sweep_csv(out, rows);
            bool all = true;
            std::printf("%-14s %10s %12s %16s %s\n", param.c_str(), "speed", "max width", "sandwich margin", "result");
            for (const auto& r : rows) {
                std::printf("%-14.8g %10.5g %12.6g %16.6g %s\n", r.value, r.speed, r.max_width,
                            r.worst_sandwich_margin, r.pass ? "PASS" : (r.error.empty() ? "FAIL" : r.error.c_str()));
                all = all && r.pass;
            }
            return all ? 0 : exit_fail;
        }
        for (auto* s : app.get_subcommands()) {
            const std::string name = s->get_name();
            const Stage stage = name == "pipeline" ? Stage::verify : parse_stage(name);
            return report(run_pipeline(sc, stage, out));
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "frontlab: %s\n", e.what());
        return classify(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "frontlab: %s\n", e.what());
        return exit_error;
    }
    return exit_error;
}
