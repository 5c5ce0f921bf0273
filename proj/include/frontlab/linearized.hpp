#pragma once

#include <span>
#include <utility>
#include <vector>

#include "frontlab/certificate.hpp"
#include "frontlab/profile.hpp"
#include "frontlab/spectral.hpp"

namespace frontlab {

struct WeightedMode {
    Eigenpair pair;
    double weight = 1.0;
};

/// v(t, x) = sum_k w_k e^{lambda_k t} phi_k(x), a positive solution of the
/// linearisation at u = 0.
class LinearizedSolution {
public:
    explicit LinearizedSolution(std::vector<WeightedMode> modes);

    const std::vector<WeightedMode>& modes() const { return modes_; }
    double alpha() const { return alpha_; }
    double lambda_max() const { return lambda_max_; }
    double doubling_length() const { return L_; }
    double x_min() const { return x_min_; }
    double x_max() const { return x_max_; }
    bool contains(double x) const { return x >= x_min_ - 1e-9 && x <= x_max_ + 1e-9; }

    double value(double t, double x) const;
    double dx(double t, double x) const;
    double dt(double t, double x) const;

    /// phi_k sampled at arbitrary nodes (log-cubic Hermite between eigen-grid nodes).
    std::vector<std::vector<double>> mode_values(std::span<const double> xs) const;
    std::vector<std::vector<double>> mode_slopes(std::span<const double> xs) const;

private:
    std::vector<WeightedMode> modes_;
    double alpha_ = 0.0, lambda_max_ = 0.0, L_ = 0.0, x_min_ = 0.0, x_max_ = 0.0;

    static double phi_at(const Eigenpair& p, double x, double* slope);
};

/// Throws Error(degenerate_measure) for an empty list or all-zero weights.
LinearizedSolution superpose(std::vector<WeightedMode> modes);
LinearizedSolution single_mode(Eigenpair pair);

/// Rules w~ = h~(v), w = h(v) and min(w, 1).
struct EnvelopeFields {
    const LinearizedSolution* v = nullptr;
    const ProfileTransforms* transforms = nullptr;

    double lower(double t, double x) const;
    double upper(double t, double x) const;  // min(w, 1)
    double upper_raw(double t, double x) const;
};

struct EnvelopeSlab {
    std::vector<double> times, xs;
    std::vector<std::vector<double>> lower, upper;  // [time][x]
};

/// Throws Error(window) when any x leaves the eigenfunction window.
EnvelopeSlab evaluate_envelopes(const EnvelopeFields& fields, std::span<const double> times,
                                std::span<const double> xs);

/// A (d_x v)^2 <= alpha a v^2 on the slab, margin divided by max a v^2 per time.
CertificateRecord gradient_certificate(const ReactionSpec& spec, const LinearizedSolution& v,
                                       std::span<const double> times, std::span<const double> xs,
                                       double slack = 1e-10);

/// max |v_t - (A v_x)_x - q v_x - a v| / (lambda_max max_loc v) over the eigen grid at time t.
double linearized_residual(const ReactionSpec& spec, const LinearizedSolution& v, double t);

}  // namespace frontlab
