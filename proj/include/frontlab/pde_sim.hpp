#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "frontlab/grid.hpp"
#include "frontlab/linearized.hpp"
#include "frontlab/reaction.hpp"
#include "json.hpp"

namespace frontlab {

/// One step of u_t = (A u_x)_x + q u_x + s f(x, u):
///   (I - dt D - dt theta s a) u' = u + dt (s f(x, u) - theta s a u),
/// with Dirichlet rows at both ends. theta = 0 is implicit diffusion with
/// explicit reaction; theta > 0 also treats the linear part a(x) u implicitly.
/// theta may vary by node.
/// The right-hand side and the Thomas sweeps run in long double with
/// non-negative coefficients only, so nodewise order survives rounding.
class Stepper {
public:
    Stepper(const ReactionSpec& spec, UniformGrid grid, double dt, double theta = 0.5, double reaction_scale = 1.0);
    Stepper(const ReactionSpec& spec, UniformGrid grid, double dt, std::vector<double> theta,
            double reaction_scale = 1.0);

    /// Advance u by dt; left/right are the boundary values at the new time.
    void step(std::vector<double>& u, double left, double right);

    double dt() const { return dt_; }
    const std::vector<double>& theta() const { return theta_; }
    const UniformGrid& grid() const { return grid_; }
    std::size_t clamp_count() const { return clamps_; }

    /// Largest dt for which the step is order preserving, divided by `safety`.
    static double monotone_dt(const ReactionSpec& spec, const UniformGrid& grid, double theta,
                              double reaction_scale = 1.0, double safety = 1.2);
    static double monotone_dt(const ReactionSpec& spec, const UniformGrid& grid, std::span<const double> theta,
                              double reaction_scale = 1.0, double safety = 1.2);

private:
    const ReactionSpec* spec_;
    UniformGrid grid_;
    double dt_, scale_;
    std::vector<double> theta_;
    std::vector<double> a_, m_;
    std::vector<long double> da_, b_;     // dt a and beta m for polynomial kernels
    std::vector<long double> sub_, sup_;  // dt times the off-diagonal stencil weights, >= 0
    std::vector<long double> ncp_, inv_;  // Thomas factorisation: -c'_i and 1 / pivot
    std::vector<long double> rhs_;
    std::size_t clamps_ = 0;
};

/// theta_i = 1 - lambda / (2 s a(x_i)), clipped to [0, 1]. On the linear tail
/// e^{lambda t} phi this cancels the O(dt) growth-rate error of the step.
std::vector<double> tail_matched_theta(const ReactionSpec& spec, const UniformGrid& grid, double lambda,
                                       double reaction_scale = 1.0);

struct SimulationConfig {
    double x_left = -50.0;
    double x_right = 50.0;
    double dx = 1e-2;
    double t0 = 0.0;
    double t1 = 10.0;
    double dt = 1e-2;
    double theta = -1.0;  // negative: tail_matched_theta with the leading eigenvalue
    double reaction_scale = 1.0;
    std::size_t snapshots = 101;
    std::size_t x_stride = 1;
    double exhaust_fraction = 0.1;  // front within this fraction of x_right aborts the run
};

/// t0 puts the 1/2-level of w~ at 25% of the domain and t1 at 75%.
std::pair<double, double> auto_time_window(const EnvelopeFields& fields, double x_left, double x_right,
                                           double dx);

struct FrontSolution {
    std::vector<double> x;      // stored (strided) nodes
    std::vector<double> times;  // snapshot times
    std::vector<std::vector<double>> u, lower, upper, v;  // [time][x]
    double dx = 0.0, dt = 0.0, t0 = 0.0, t1 = 0.0, theta_min = 0.0, theta_max = 0.0;
    std::size_t x_stride = 1, full_nodes = 0, steps = 0;
    double min_step_increment = 0.0;  // over all steps, full grid, excluding 10 nodes per side
    std::size_t clamp_count = 0;
};

/// Seeds u(t0) = w~(t0, .) and drives both ends with w~(t, x_end).
FrontSolution run(const ReactionSpec& spec, const EnvelopeFields& fields, const SimulationConfig& config);

/// Rightmost linearly interpolated crossing of `level`. Throws Error(front_absent).
double front_position(std::span<const double> x, std::span<const double> u, double level);

struct WidthMeasure {
    double width = 0.0;
    bool empty = false;
};

/// Diameter of {eps <= u <= 1 - eps} with interpolated end points.
WidthMeasure front_width(std::span<const double> x, std::span<const double> u, double eps);

struct SpeedEstimate {
    double speed = 0.0;         // least-squares slope of X(t) over the last half
    double first_half = 0.0;    // slope over the first half
    double drift = 0.0;         // second-half minus first-half slope
    std::vector<double> positions;
};

SpeedEstimate speed_estimate(const FrontSolution& sol, double level = 0.5);

nlohmann::json summary_json(const FrontSolution& sol);

}  // namespace frontlab
