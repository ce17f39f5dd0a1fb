#pragma once

// Multi-channel correlation filter with a cropped (background-aware) data term
// and a spatial penalization mask, learned by frequency-domain ADMM.
//
// Objective over filters w^d on the inner grid M, features x^d on the outer
// grid N:
//
//     E(w) = 1/2 || y - sum_d r^d ||^2 + sum_d || p .* w^d ||^2
//     r^d(n) = sum_m embed(w^d)(m) * x^d(m - n)
//
// i.e. each response sample correlates the filter with a circularly shifted
// full-window sample, so the filter sees real background instead of wrapped
// copies of the target.
//
// Math-to-code conventions (dft2 is unitary):
//   x_hat, y_hat   = dft2(x), dft2(y)               (unitary data spectra)
//   g_hat, w_hat   = sqrt(N) * dft2(embed(.))        (filter spectra)
//   zeta_hat       = Lagrange multipliers, same scaling as g_hat
//   g, zeta        = crop(inverse_dft2(. / sqrt(N))) (spatial recovery)
// With this scaling the per-bin data term is 1/2 |y_hat - x_hat^H g_hat|^2,
// which is exactly the spatial data term by Parseval, so the ADMM fixed point
// is the minimizer of E above.

#include <optional>
#include <span>
#include <vector>

#include "cftrack/array.hpp"
#include "cftrack/features.hpp"
#include "cftrack/spectral.hpp"

namespace cftrack {

/// Bowl-shaped spatial weights over the filter support:
/// p(i, j) = floor + slope * (((i - ci) / rows)^2 + ((j - cj) / cols)^2),
/// with (ci, cj) the geometric center of the grid.
struct PenalizationMask {
    Grid2 grid;
    RealArray weights;
    double floor = 0.1;
    double slope = 3.0;
};

PenalizationMask make_penalization(Grid2 inner, double floor, double slope);

/// Gaussian label over the search window, peak 1 at index (rows/2, cols/2).
struct DesiredResponse {
    Grid2 grid;
    RealArray values;
    double sigma = 1.0;
};

DesiredResponse make_desired_response(Grid2 grid, double sigma);

/// The label with its peak moved to index (0, 0); this is the regression
/// target used by training and by objective_value.
RealArray training_target(const DesiredResponse& y);

struct AdmmState {
    std::vector<ComplexArray> multipliers;
    double mu = 1.0;
    double mu_max = 1e4;
    double mu_scale = 10.0;
    int iteration = 0;
};

struct FilterBank {
    CropSpec crop;
    std::vector<RealArray> spatial;      // w^d on the inner grid
    std::vector<ComplexArray> spectral;  // g_hat^d on the outer grid
    AdmmState admm;                      // multipliers and mu after the last iteration

    int depth() const noexcept { return static_cast<int>(spatial.size()); }
};

enum class PenaltyMode {
    elementwise,  // divisor 2 p^2 / N + mu per element
    scalar,       // divisor 2 ||p_tilde||^2 / N + mu, one value for all elements
};

struct SolverConfig {
    int admm_iterations = 4;
    double mu_init = 1.0;
    double mu_max = 1e4;
    double mu_scale = 10.0;
    double tolerance = 1e-4;  // on ||g_hat - w_hat|| / ||w_hat||
    double penalty_floor = 0.1;
    double penalty_slope = 3.0;
    double sigma_factor = 1.0 / 16.0;
    PenaltyMode penalty_mode = PenaltyMode::elementwise;
    /// Seed the multipliers from the warm start instead of zero.
    bool reuse_multipliers = false;
    /// Worker threads for the per-bin g-step. Results do not depend on it.
    int threads = 1;
    /// Fault injection for `cftrack selftest --inject`; added to the w-step
    /// divisor. Leave at 0.
    double w_divisor_offset = 0.0;

    void validate() const;
};

struct SolverTraceRow {
    int iteration = 0;
    double objective = 0.0;
    double primal_residual = 0.0;
    double mu = 0.0;
};
using SolverTrace = std::vector<SolverTraceRow>;

/// Direct spatial evaluation of E(w); `target` is origin-aligned (see
/// training_target). O(N * M * D), intended as a reference.
double objective_value(std::span<const RealArray> w, const FeatureStack& x, const RealArray& target,
                       const PenalizationMask& p);
double objective_value(const FilterBank& w, const FeatureStack& x, const DesiredResponse& y,
                       const PenalizationMask& p);

/// Elementwise w-step divisor (2 p^2 / N + mu), or the scalar variant.
RealArray w_step_divisor(const PenalizationMask& p, double mu, std::size_t n_total, PenaltyMode mode,
                         int depth);

/// w^d = (zeta^d + mu g^d) / divisor, identically for every channel.
std::vector<RealArray> solve_w(std::span<const RealArray> g, std::span<const RealArray> zeta,
                               const PenalizationMask& p, double mu, std::size_t n_total,
                               PenaltyMode mode = PenaltyMode::elementwise);

/// Per-bin g-step via Sherman-Morrison:
///   g = (x y - zeta + mu w) / mu - x / (mu b) (s_x y - s_zeta + mu s_w)
/// with s_x = x^H x, s_zeta = x^H zeta, s_w = x^H w, b = s_x + mu.
/// This equals (x x^H + mu I)^{-1} (x y - zeta + mu w).
void solve_g_pixel(std::span<const Complex> x_hat, Complex y_hat, std::span<const Complex> zeta_hat,
                   std::span<const Complex> w_hat, double mu, std::span<Complex> out);
std::vector<Complex> solve_g_pixel(std::span<const Complex> x_hat, Complex y_hat,
                                   std::span<const Complex> zeta_hat, std::span<const Complex> w_hat,
                                   double mu);

/// Applies solve_g_pixel independently at every frequency bin.
std::vector<ComplexArray> solve_g(const SpectralStack& x_hat, const ComplexArray& y_hat,
                                  std::span<const ComplexArray> zeta_hat,
                                  std::span<const ComplexArray> w_hat, double mu, int threads = 1);

/// zeta_hat += mu (g_hat - w_hat); mu = min(mu_scale * mu, mu_max).
AdmmState update_multipliers(AdmmState state, std::span<const ComplexArray> g_hat,
                             std::span<const ComplexArray> w_hat);

/// sqrt(N) * dft2(embed_center(w)).
ComplexArray filter_spectrum(const RealArray& w, const CropSpec& crop);

/// Runs ADMM (w-step, g-step, multiplier step) for config.admm_iterations or
/// until the primal residual drops below config.tolerance. A warm start seeds
/// g_hat and w; multipliers restart at zero unless config.reuse_multipliers.
/// Throws Diverged if a non-finite value appears.
FilterBank train_filter(const FeatureStack& x, const DesiredResponse& y, const PenalizationMask& p,
                        const SolverConfig& config,
                        const std::optional<FilterBank>& warm_start = std::nullopt,
                        SolverTrace* trace = nullptr);

/// Spectral entry point used by the tracker: `x_hat` holds unitary feature
/// spectra and `y_hat` = dft2(training_target(y)).
FilterBank train_filter(const SpectralStack& x_hat, const ComplexArray& y_hat, const PenalizationMask& p,
                        const SolverConfig& config,
                        const std::optional<FilterBank>& warm_start = std::nullopt,
                        SolverTrace* trace = nullptr);

/// Detection response R(n) = sum_d sum_m g^d(m) x^d(m + n), origin-aligned:
/// translating the window contents by k moves the peak by k.
RealArray correlation_response(const FilterBank& filter, const SpectralStack& x_hat);

}  // namespace cftrack
