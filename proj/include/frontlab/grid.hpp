#pragma once

#include <cstddef>
#include <vector>

namespace frontlab {

/// Uniform 1-D node set x_i = x0 + i dx, i = 0..n-1.
struct UniformGrid {
    double x0 = 0.0;
    double dx = 1.0;
    std::size_t n = 0;

    double x(std::size_t i) const { return x0 + dx * static_cast<double>(i); }
    double front() const { return x0; }
    double back() const { return x(n - 1); }
    bool contains(double xv) const { return xv >= x0 - 1e-12 * dx && xv <= back() + 1e-12 * dx; }

    std::vector<double> nodes() const {
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = x(i);
        return out;
    }

    static UniformGrid spanning(double lo, double hi, std::size_t intervals) {
        return {lo, (hi - lo) / static_cast<double>(intervals), intervals + 1};
    }
};

}  // namespace frontlab
