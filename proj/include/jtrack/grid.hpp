#ifndef JTRACK_GRID_HPP
#define JTRACK_GRID_HPP

#include <cassert>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace jtrack {

// Dense row-major 2-D array of doubles. Used for image frames, confidence
// maps and label maps.
struct Grid {
    int rows = 0;
    int cols = 0;
    std::vector<double> v;

    Grid() = default;
    Grid(int r, int c, double fill = 0.0) : rows(r), cols(c), v(static_cast<size_t>(r) * c, fill) {
        if (r < 1 || c < 1) throw std::invalid_argument("Grid: dimensions must be positive");
    }

    double& at(int r, int c) {
        assert(r >= 0 && r < rows && c >= 0 && c < cols);
        return v[static_cast<size_t>(r) * cols + c];
    }
    double at(int r, int c) const {
        assert(r >= 0 && r < rows && c >= 0 && c < cols);
        return v[static_cast<size_t>(r) * cols + c];
    }

    size_t size() const { return v.size(); }

    bool same_shape(const Grid& o) const { return rows == o.rows && cols == o.cols; }
};

inline bool all_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

// Checks alpha_k >= 0 and |sum alpha - 1| <= tol.
inline bool is_simplex(const std::vector<double>& a, double tol = 1e-10) {
    double s = 0.0;
    for (double x : a) {
        if (!(x >= 0.0)) return false;
        s += x;
    }
    return std::abs(s - 1.0) <= tol;
}

}  // namespace jtrack

#endif
