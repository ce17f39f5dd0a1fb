#pragma once
// Reference computations for the test suites. Each one is written from the
// defining formula with explicit loops or dense matrices; none calls into the
// FFT-based library paths it is used to check.

#include <filesystem>
#include <random>
#include <string>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cftrack/features.hpp"
#include "cftrack/image.hpp"
#include "cftrack/solver.hpp"

namespace ref {

using cftrack::Complex;
using cftrack::ComplexArray;
using cftrack::FeatureStack;
using cftrack::Grid2;
using cftrack::RealArray;

using Rng = std::mt19937_64;

RealArray random_real(Grid2 grid, Rng& rng, double lo = -1.0, double hi = 1.0);
ComplexArray random_complex(Grid2 grid, Rng& rng);
std::vector<Complex> random_complex(int n, Rng& rng);
FeatureStack random_stack(Grid2 grid, int depth, Rng& rng);

/// X(k) = N^{-1/2} sum_n x(n) exp(-2 pi i <k, n / grid>).
ComplexArray direct_dft(const RealArray& x);
ComplexArray direct_dft(const ComplexArray& x);

/// c(n) = sum_m x(m) w((m + n) mod grid).
RealArray direct_cross_correlation(const RealArray& x, const RealArray& w);

/// max |a - b| / max(|b|, tiny) over all entries.
double max_relative_error(const RealArray& a, const RealArray& b);
double max_relative_error(const ComplexArray& a, const ComplexArray& b);

/// Row-major vectorization.
Eigen::VectorXd vec(const RealArray& a);

/// N x N circulant with (X v)(n) = sum_m v(m) x(m - n): row n holds x
/// shifted so that the product samples the n-th circular shift.
Eigen::MatrixXd shift_matrix(const RealArray& x);

/// N x M zero-padding matrix placing the inner grid at floor((outer - inner) / 2).
Eigen::MatrixXd padding_matrix(Grid2 outer, Grid2 inner);

/// Objective 1/2 ||y - sum_d X_d B w_d||^2 + ||(I_D kron diag p) w||^2 with
/// explicit circulant X_d and padding B.
double matrix_objective(std::span<const RealArray> w, const FeatureStack& x, const RealArray& target,
                        const RealArray& p);

/// Global minimizer of matrix_objective by normal equations.
std::vector<RealArray> normal_equations_optimum(const FeatureStack& x, const RealArray& target, const RealArray& p);

/// Bilinear sample with edge clamping at index coordinates (row, col).
double bilinear(const RealArray& img, double row, double col);

/// floor + slope * (((i - ci) / rows)^2 + ((j - cj) / cols)^2), ci = (rows - 1) / 2.
RealArray bowl(Grid2 grid, double floor, double slope);

/// Fresh empty directory under the system temp dir, unique per process and tag.
std::filesystem::path fresh_temp_dir(const std::string& tag);

}  // namespace ref
