#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "frontlab/grid.hpp"
#include "frontlab/reaction.hpp"

namespace frontlab {

struct SpectralSample {
    double half_width = 0.0;
    double mesh = 0.0;
    double estimate = 0.0;
};

/// Estimate of lambda0 = sup of the spectrum of d_xx + a (or of the
/// diffusion/drift operator when those fields are present).
struct SpectralBound {
    double lambda0 = 0.0;
    double half_width = 0.0;
    std::size_t resolution = 0;
    std::vector<SpectralSample> history;  // raw Dirichlet estimates, coarse to fine
};

/// Largest eigenvalue of the symmetric tridiagonal matrix with the given
/// diagonal and off-diagonal, by Sturm-sequence bisection.
double largest_eigenvalue(std::span<const double> diag, std::span<const double> off);

/// Dirichlet truncation of the operator on [-half_width, half_width] with
/// `resolution` intervals, refined twice and Richardson-extrapolated in the mesh.
SpectralBound sup_spectrum(const ReactionSpec& spec, double half_width, std::size_t resolution);

/// Raw (unextrapolated) top Dirichlet eigenvalue at one mesh.
double dirichlet_top_eigenvalue(const ReactionSpec& spec, double half_width, std::size_t intervals);

/// Positive solution of phi'' + a phi = lambda phi (or the diffusion/drift
/// analogue) decaying at +inf, sampled on a uniform grid with phi(0) = 1.
struct Eigenpair {
    double lambda = 0.0;
    UniformGrid grid;
    std::vector<double> phi;
    std::vector<double> dphi;
    double alpha = 0.0;            // 1 - (2a- - lambda)/a+, lambda1 replacing 2a- with transport
    double doubling_length = 0.0;  // minimal grid L with phi(x) >= 2 phi(x + L); NaN if none
    double residual = 0.0;         // max relative discrete eigen-residual
    double gradient_margin = 0.0;  // max of (A phi'^2 - alpha a phi^2) / max(a phi^2)

    double half_width() const { return grid.back(); }
};

struct EigenOptions {
    std::optional<double> lambda0;
    double margin_fraction = 1e-6;  // lambda must exceed lambda0 (1 + margin_fraction)
    bool require_below_threshold = false;
    double abs_tol = 1e-12;
    double rel_tol = 1e-12;
};

/// Default window: 30 / sqrt(lambda - lambda0), capped at 200.
double default_half_width(double lambda, double lambda0);

/// Number of intervals giving roughly the requested mesh on [-X, X]; always even
/// so that x = 0 is a node.
std::size_t intervals_for_mesh(double half_width, double mesh);

double alpha_for(const ReactionSpec& spec, double lambda);

Eigenpair eigenfunction(const ReactionSpec& spec, double lambda, double half_width, std::size_t resolution,
                        const EigenOptions& options = {});

/// Least grid L such that phi(x) >= 2 phi(x + L) for every grid x with x + L in
/// the window. Throws Error(window_too_small) when none exists.
double doubling_length(const Eigenpair& pair);

/// max_i |phi'' + a phi - lambda phi| / (lambda max_loc |phi|) with a fourth-order
/// second difference (or the divergence-form analogue).
double eigen_residual(const ReactionSpec& spec, const Eigenpair& pair);

struct GradientBoundReport {
    double worst_margin = 0.0;        // max_i (A phi'^2 - alpha a phi^2)
    double worst_relative = 0.0;      // max_i of the same divided by alpha a phi^2
    double scale = 0.0;               // max_i a phi^2
    std::size_t worst_index = 0;
    bool pass = false;
};

/// Checks A phi'^2 <= alpha a phi^2 at every node with slack 1e-10 max(a phi^2).
GradientBoundReport gradient_bound(const ReactionSpec& spec, const Eigenpair& pair, double slack = 1e-10);

}  // namespace frontlab
