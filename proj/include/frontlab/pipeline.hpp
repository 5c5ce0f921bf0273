#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "frontlab/linearized.hpp"
#include "frontlab/pde_sim.hpp"
#include "frontlab/profile.hpp"
#include "frontlab/scenario.hpp"
#include "frontlab/spectral.hpp"
#include "frontlab/verify.hpp"

namespace frontlab {

enum class Stage { validate, spectrum, eigenfunction, profile, simulate, verify };

Stage parse_stage(const std::string& name);
std::string_view to_string(Stage stage);

/// Everything produced up to the last requested stage. Stages past `last`
/// stay empty.
struct PipelineResult {
    Stage last = Stage::verify;
    std::string config_hash;
    ReactionSpec spec;
    ValidationReport validation;
    std::optional<SpectralBound> spectrum;
    double threshold = 0.0;
    double lambda = 0.0;  // leading eigenvalue of the linearised solution
    std::shared_ptr<const LinearizedSolution> v;
    std::shared_ptr<const ProfileTransforms> transforms;
    std::shared_ptr<const FrontSolution> solution;
    std::optional<CertificateReport> report;
    std::vector<CertificateRecord> stage_certificates;  // eigenfunction, profile and slab gradient records

    EnvelopeFields fields() const { return {v.get(), transforms.get()}; }
    bool pass() const;
    nlohmann::json summary() const;
};

/// The lambda rule: lambda0 + (min(threshold, 2 a-) - lambda0) / 2, provided
/// the interval is wider than max(margin, 1e-3) lambda0. Throws Error(threshold)
/// with the admissibility condition otherwise.
double auto_lambda(double lambda0, double threshold, double a_minus, double margin);

/// Runs validate, spectrum, eigenfunction, profile, simulate and verify in
/// order, stopping after `last`. Each stage gates the next: a failing
/// certificate or violated precondition throws before any later stage runs.
/// When `out` is non-empty the artifacts of every completed stage are written there.
PipelineResult run_pipeline(const Scenario& scenario, Stage last = Stage::verify,
                            const std::filesystem::path& out = {});

/// Re-verifies a run directory written by run_pipeline: the upstream stages
/// are recomputed from its config.ini and the snapshots are read back from CSV.
PipelineResult verify_run_directory(const std::filesystem::path& dir);

struct SweepRow {
    double value = 0.0;
    double speed = 0.0;
    double max_width = 0.0;
    double worst_sandwich_margin = 0.0;
    bool pass = false;
    std::string error;  // empty unless the variant threw
};

/// Parameters: lambda, beta, a-amplitude (second a_params entry) and mesh
/// (dx; dt scales with dx^2). Variants run concurrently, each writing to
/// out/<parameter>_<index> when `out` is non-empty.
std::vector<SweepRow> sweep(const Scenario& base, const std::string& parameter, const std::vector<double>& values,
                            const std::filesystem::path& out = {}, unsigned threads = 0);

void write_sweep_csv(const std::filesystem::path& dir, const std::vector<SweepRow>& rows);

}  // namespace frontlab
