#pragma once

#include <memory>
#include <vector>

#include "frontlab/certificate.hpp"
#include "frontlab/grid.hpp"
#include "frontlab/reaction.hpp"
#include "json.hpp"

namespace frontlab {

/// c = sqrt(alpha) + 1/sqrt(alpha). Throws Error(threshold) unless 0 < alpha < 1
/// and, for nu > 1, alpha <= (sqrt(nu) - sqrt(nu - 1))^2.
double wave_speed(double alpha, double nu);

/// Largest admissible alpha for a given nu.
double alpha_ceiling(double nu);

struct ProfileOptions {
    double ds = 2e-3;        // knot spacing in s
    double u_floor = 1e-12;  // integrate until U drops below this
    double rel_tol = 1e-12;
    double abs_tol = 1e-24;
    double s_start = 0.0;  // integrator time at the launch; the normalised result ignores it
    double delta = 1e-6;   // launch offset from U = 1 for the sub profile
    double slack = 1e-10;
};

/// Travelling-wave profile U'' + c U' + g(U) = 0 sampled on uniform knots of the
/// normalised coordinate s, where U(s) e^{sqrt(alpha) s} -> 1.
struct WaveODESolution {
    EnvelopeTag tag = EnvelopeTag::upper;
    EnvelopeFunction g;
    double alpha = 0.0;
    double c = 0.0;
    UniformGrid s;
    std::vector<double> U, V, dV;
    double A_tail = 1.0;       // lim U_raw e^{sqrt(alpha) s_raw}
    double s0 = 0.0;           // normalised coordinate of the launch point
    double tail_window = 0.0;  // U threshold of the regression window
    double tail_curvature = 0.0;
    double r_plus = 0.0;  // sub only: unstable rate at U = 1
    double delta = 0.0;   // sub only: launch offset actually used

    double launch_u() const { return U.front(); }
};

WaveODESolution solve_super_profile(const EnvelopeFunction& g1, double alpha, double nu,
                                    const ProfileOptions& options = {});
WaveODESolution solve_sub_profile(const EnvelopeFunction& g0, double alpha, double nu,
                                  const ProfileOptions& options = {});

/// min over knots of min(-V, 1 - U, V + c U / 2).
double triangle_margin(const WaveODESolution& sol);
/// min over sampled U in [0, 1] of c^2 U / 4 - g(U).
double boundary_flux_margin(const EnvelopeFunction& g, double c, std::size_t samples = 10001);
/// Super: min(-V - sqrt(alpha) g(U)). Sub: min(sqrt(alpha) g(U) + V).
double convexity_margin(const WaveODESolution& sol);
/// max |V' + c V + g(U)| with V' from a fourth-order difference of the samples.
double ode_residual(const WaveODESolution& sol);

std::vector<CertificateRecord> profile_certificates(const WaveODESolution& sol, double slack = 1e-10);

/// h and h~ built from the normalised profiles, with h(v) = U(-ln v / sqrt(alpha)).
class ProfileTransforms {
public:
    ProfileTransforms(WaveODESolution super, WaveODESolution sub);

    double alpha() const { return alpha_; }
    double c() const { return c_; }
    double v_max() const { return v_max_; }
    double v_launch_sub() const { return v_launch_; }

    double h(double v) const;
    double dh(double v) const;
    double d2h(double v) const;
    double ht(double v) const;
    double dht(double v) const;
    double d2ht(double v) const;

    /// v with h(v) = y, y >= 0.
    double h_inv(double y) const;
    /// v with h~(v) = y, 0 <= y < 1.
    double ht_inv(double y) const;

    /// max of |h''| and |h~''| over (0, v].
    double curvature_bound(double v) const;

    const WaveODESolution& super_profile() const { return super_; }
    const WaveODESolution& sub_profile() const { return sub_; }

    std::vector<CertificateRecord> certificates(double slack = 1e-10) const;
    nlohmann::json to_json() const;

private:
    struct Interp;
    WaveODESolution super_, sub_;
    std::shared_ptr<const Interp> hi_, lo_;
    double alpha_ = 0.0, c_ = 0.0, sa_ = 0.0;
    double v_max_ = 0.0, v_launch_ = 0.0, v_end_h_ = 0.0, v_end_ht_ = 0.0;
    double slope0_h_ = 1.0, slope0_ht_ = 1.0, slope_max_ = 1.0;
    double v_fit_h_ = 0.0, v_fit_ht_ = 0.0;

    double sigma(double v) const;
};

ProfileTransforms build_transforms(WaveODESolution super, WaveODESolution sub);

/// Both profiles at the alpha of a validated spec and lambda.
ProfileTransforms build_transforms(const ReactionSpec& spec, double alpha, const ProfileOptions& options = {});

}  // namespace frontlab
