#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace frontlab {

/// Failure categories reported by the pipeline stages.
enum class ErrorKind {
    invalid_spec,
    envelope,
    threshold,
    iteration_limit,
    no_decaying_solution,
    window_too_small,
    degenerate_measure,
    hypothesis_violation,
    resolution,
    normalization,
    degeneracy,
    construction,
    window,
    certificate,
    blowup,
    domain_exhausted,
    front_absent,
    transform_domain,
    config,
    internal,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace frontlab
