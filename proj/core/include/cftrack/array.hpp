#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cftrack/error.hpp"

namespace cftrack {

using Complex = std::complex<double>;

/// Rectangular sampling grid; rows run along y, cols along x.
struct Grid2 {
    int rows = 0;
    int cols = 0;

    constexpr std::size_t size() const noexcept {
        return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    }
    constexpr bool valid() const noexcept { return rows >= 1 && cols >= 1; }

    friend constexpr bool operator==(const Grid2&, const Grid2&) = default;
};

std::string to_string(Grid2 grid);

/// Integer 2D offset in (row, col) order.
struct Offset2 {
    int row = 0;
    int col = 0;
    friend constexpr bool operator==(const Offset2&, const Offset2&) = default;
};

/// Dense row-major 2D array.
template <typename T>
class Array2 {
public:
    Array2() = default;

    explicit Array2(Grid2 grid, T fill = T{}) : grid_(grid), data_(checked_size(grid), fill) {}

    Array2(Grid2 grid, std::vector<T> data) : grid_(grid), data_(std::move(data)) {
        if (data_.size() != checked_size(grid)) {
            throw GridMismatch("array data holds " + std::to_string(data_.size()) +
                               " values but grid " + to_string(grid) + " needs " +
                               std::to_string(grid.size()));
        }
    }

    Grid2 grid() const noexcept { return grid_; }
    int rows() const noexcept { return grid_.rows; }
    int cols() const noexcept { return grid_.cols; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    T& operator()(int r, int c) noexcept {
        return data_[static_cast<std::size_t>(r) * static_cast<std::size_t>(grid_.cols) +
                     static_cast<std::size_t>(c)];
    }
    const T& operator()(int r, int c) const noexcept {
        return data_[static_cast<std::size_t>(r) * static_cast<std::size_t>(grid_.cols) +
                     static_cast<std::size_t>(c)];
    }
    T& operator[](std::size_t i) noexcept { return data_[i]; }
    const T& operator[](std::size_t i) const noexcept { return data_[i]; }

    std::span<T> values() noexcept { return data_; }
    std::span<const T> values() const noexcept { return data_; }
    T* data() noexcept { return data_.data(); }
    const T* data() const noexcept { return data_.data(); }

    auto begin() noexcept { return data_.begin(); }
    auto end() noexcept { return data_.end(); }
    auto begin() const noexcept { return data_.begin(); }
    auto end() const noexcept { return data_.end(); }

    friend bool operator==(const Array2&, const Array2&) = default;

private:
    static std::size_t checked_size(Grid2 grid) {
        if (!grid.valid()) throw InvalidArgument("grid must be at least 1x1, got " + to_string(grid));
        return grid.size();
    }

    Grid2 grid_{};
    std::vector<T> data_;
};

using RealArray = Array2<double>;
using ComplexArray = Array2<Complex>;

/// Throws GridMismatch unless `a` and `b` share a grid.
void require_same_grid(Grid2 a, Grid2 b, const char* context);

double squared_norm(const RealArray& a);
double squared_norm(const ComplexArray& a);
bool all_finite(const RealArray& a);
bool all_finite(const ComplexArray& a);

}  // namespace cftrack
