#include "frontlab/error.hpp"

namespace frontlab {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::invalid_spec: return "invalid-spec";
    case ErrorKind::envelope: return "envelope";
    case ErrorKind::threshold: return "threshold";
    case ErrorKind::iteration_limit: return "iteration-limit";
    case ErrorKind::no_decaying_solution: return "no-decaying-solution";
    case ErrorKind::window_too_small: return "window-too-small";
    case ErrorKind::degenerate_measure: return "degenerate-measure";
    case ErrorKind::hypothesis_violation: return "hypothesis-violation";
    case ErrorKind::resolution: return "resolution";
    case ErrorKind::normalization: return "normalization";
    case ErrorKind::degeneracy: return "degeneracy";
    case ErrorKind::construction: return "construction";
    case ErrorKind::window: return "window";
    case ErrorKind::certificate: return "certificate";
    case ErrorKind::blowup: return "blowup";
    case ErrorKind::domain_exhausted: return "domain-exhausted";
    case ErrorKind::front_absent: return "front-absent";
    case ErrorKind::transform_domain: return "transform-domain";
    case ErrorKind::config: return "config";
    case ErrorKind::internal: return "internal";
    }
    return "unknown";
}

}  // namespace frontlab
