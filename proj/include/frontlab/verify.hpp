#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "frontlab/certificate.hpp"
#include "frontlab/pde_sim.hpp"
#include "frontlab/profile.hpp"

namespace frontlab {

/// Nodes and snapshots a check looks at.
struct InteriorRegion {
    double edge_cells = 10.0;   // excluded band at each end, in units of the simulation dx
    double time_head = 0.05;    // leading fraction of [t0, t1] dropped from the strictness statistic
    double time_tail = 0.05;    // trailing fraction of [t0, t1] dropped from the sandwich check
};

/// w~ - tol <= u <= min(w, 1) + tol on the interior.
CertificateRecord check_sandwich(const FrontSolution& sol, double tol, const InteriorRegion& region = {});

struct MonotoneCheck {
    CertificateRecord record;
    bool strict = false;          // median increment > 0
    double median_increment = 0.0;
};

/// u(t_{j+1}, x) - u(t_j, x) >= -tol between snapshots plus a positive median increment.
MonotoneCheck check_monotone_time(const FrontSolution& sol, double tol, const InteriorRegion& region = {});

struct WidthBound {
    double literal = 0.0;  // L ceil(log2(h~^{-1}(1 - eps) - h^{-1}(eps)))
    double ratio = 0.0;    // L ceil(log2(h~^{-1}(1 - eps) / h^{-1}(eps)))
};

WidthBound width_bound(double eps, double L, const ProfileTransforms& transforms);

enum class WidthForm { literal, ratio };

struct WidthCheck {
    CertificateRecord record;  // measured width against the selected bound
    WidthBound bound;
    double max_width = 0.0;
    std::vector<double> widths;  // one per snapshot
};

WidthCheck check_width(const FrontSolution& sol, double eps, double L, const ProfileTransforms& transforms,
                       const InteriorRegion& region = {}, WidthForm form = WidthForm::ratio);

/// u/v inside [h~(v)/v, h(v)/v] +- tol at interior nodes with v <= v_threshold,
/// and both ratios within d0 + kappa v of 1, d0 being the slope defect of the
/// transforms at v = 0.
CertificateRecord check_ratio_limit(const FrontSolution& sol, const ProfileTransforms& transforms,
                                    double v_threshold, double tol, const InteriorRegion& region = {});

/// Left and right limits through the envelopes at the interior edges. The
/// front must also sit strictly inside: w~ >= 1/2 at the left edge and
/// min(w, 1) <= 1/2 at the right edge.
CertificateRecord check_front_limits(const FrontSolution& sol, double tol, const InteriorRegion& region = {});

struct Provenance {
    std::string config_hash;
    double dx = 0.0, dt = 0.0, t0 = 0.0, t1 = 0.0;
};

struct VerifyOptions {
    double sandwich_tol = 1e-3;
    double monotone_tol = 1e-8;
    double width_eps = 0.1;
    WidthForm width_form = WidthForm::ratio;
    double ratio_threshold = 1e-3;
    double ratio_tol = 5e-3;
    double limits_tol = 1e-3;
    InteriorRegion region;
};

struct CertificateReport {
    std::vector<CertificateRecord> records;
    Provenance provenance;
    WidthCheck width;
    MonotoneCheck monotone;

    bool pass() const { return all_pass(records); }
    nlohmann::json to_json() const;
    std::string table() const;
};

/// Every property above, each exactly once.
CertificateReport verify_all(const FrontSolution& sol, const ProfileTransforms& transforms, double L,
                             const VerifyOptions& options, Provenance provenance);

}  // namespace frontlab
