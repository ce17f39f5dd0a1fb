#pragma once

// Dense, slow reference implementations. Everything here is built from
// explicit matrices and direct sums, never from the fast code paths, so it
// can serve as an independent check of the library.

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cftrack/features.hpp"
#include "cftrack/solver.hpp"
#include "cftrack/spectral.hpp"

namespace cftrack::oracle {

/// Direct O(N^2) unitary 2-D DFT.
ComplexArray naive_dft2(const ComplexArray& x);
ComplexArray naive_dft2(const RealArray& x);
ComplexArray naive_inverse_dft2(const ComplexArray& x);

/// Unitary DFT matrix acting on row-major vectorized grids.
Eigen::MatrixXcd dft_matrix(Grid2 grid);

/// Embedding matrix B (N x M): places the inner grid at crop.offset.
Eigen::MatrixXd embed_matrix(const CropSpec& crop);

/// Data matrix A (N x D*M) with (A w)(n) = sum_d sum_m embed(w^d)(m) x^d(m - n).
/// Column d*M + k holds every circular shift of x^d sampled at inner index k.
Eigen::MatrixXd data_matrix(const FeatureStack& x, const CropSpec& crop);

/// Stacked filter vector [w^0; w^1; ...] in row-major order.
Eigen::VectorXd stack(std::span<const RealArray> w);
std::vector<RealArray> unstack(const Eigen::VectorXd& v, Grid2 inner, int depth);

/// 1/2 ||y - A w||^2 + ||P w||^2 with P = diag(p) repeated per channel.
double objective_matrix(std::span<const RealArray> w, const FeatureStack& x, const RealArray& target,
                        const PenalizationMask& p);

/// Exact minimizer from the normal equations (A^T A + 2 P^2) w = A^T y.
std::vector<RealArray> dense_optimum(const FeatureStack& x, const RealArray& target, const PenalizationMask& p);

/// Solves (x x^H + mu I) g = x y - zeta + mu w by LU.
std::vector<Complex> dense_g_pixel(std::span<const Complex> x_hat, Complex y_hat, std::span<const Complex> zeta_hat,
                                   std::span<const Complex> w_hat, double mu);

/// Minimizes ||P w||^2 + Re<zeta, g - F B w> + mu/2 ||g - F B w||^2 over w,
/// with F = sqrt(N) times the unitary DFT. Elementwise penalty only.
std::vector<RealArray> dense_w_step(std::span<const ComplexArray> g_hat, std::span<const ComplexArray> zeta_hat,
                                    const PenalizationMask& p, double mu);

/// c(n) = sum_m x(m) w((m + n) mod N), by direct summation.
RealArray direct_correlation(const RealArray& x, const RealArray& w);

}  // namespace cftrack::oracle
