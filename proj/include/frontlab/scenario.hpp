#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "frontlab/pde_sim.hpp"
#include "frontlab/reaction.hpp"
#include "frontlab/verify.hpp"

namespace frontlab {

/// A parsed INI scenario with sections [reaction], [lambda], [domain],
/// [scheme], [output] and [verify]. Unknown sections or keys are rejected.
struct Scenario {
    ReactionConfig reaction;
    std::size_t sample_nx = 0;  // 0: one sample per 0.02 across the domain, at least 2001
    std::size_t sample_nu = 1001;

    std::optional<double> lambda;                    // empty: auto
    std::vector<std::pair<double, double>> modes;    // (lambda, weight); replaces `lambda` when set
    double lambda_margin = 1e-3;                     // floor for lambda - lambda0, relative to lambda0
    double spectrum_half_width = 100.0;
    double spectrum_mesh = 1e-2;

    double eigen_half_width = 0.0;  // 0: max(|x_left|, |x_right|) + 20
    double eigen_mesh = 0.0;        // 0: scheme dx
    SimulationConfig sim;
    bool auto_window = true;  // t0, t1 from auto_time_window unless both are given

    bool plots = true;
    std::size_t max_stored_nodes = 4001;  // used when x_stride = 0
    VerifyOptions verify;

    std::map<std::string, std::string> entries;  // "section.key" -> trimmed value
    std::string canonical;                       // sorted "section.key = value" lines, the hashed form

    std::string hash() const;
};

Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);

/// Re-parses `base` with one key overridden, e.g. ("reaction", "beta", "0.5").
Scenario with_override(const Scenario& base, const std::string& section, const std::string& key,
                       const std::string& value);

/// 64-bit FNV-1a, printed as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace frontlab
