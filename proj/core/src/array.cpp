#include "cftrack/array.hpp"

#include <cmath>
#include <numeric>

namespace cftrack {

std::string to_string(Grid2 grid) {
    return std::to_string(grid.rows) + "x" + std::to_string(grid.cols);
}

void require_same_grid(Grid2 a, Grid2 b, const char* context) {
    if (a != b) {
        throw GridMismatch(std::string(context) + ": grid " + to_string(a) + " does not match " +
                           to_string(b));
    }
}

double squared_norm(const RealArray& a) {
    return std::accumulate(a.begin(), a.end(), 0.0, [](double s, double v) { return s + v * v; });
}

double squared_norm(const ComplexArray& a) {
    return std::accumulate(a.begin(), a.end(), 0.0,
                           [](double s, const Complex& v) { return s + std::norm(v); });
}

bool all_finite(const RealArray& a) {
    for (double v : a) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

bool all_finite(const ComplexArray& a) {
    for (const Complex& v : a) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    }
    return true;
}

}  // namespace cftrack
