#include "cftrack/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace cftrack {

PenalizationMask make_penalization(Grid2 inner, double floor, double slope) {
    if (!inner.valid()) throw InvalidArgument("penalization grid must be at least 1x1");
    if (!(floor > 0.0)) throw InvalidArgument("penalization floor must be positive");
    if (!(slope > 0.0)) throw InvalidArgument("penalization slope must be positive");
    const double ci = (inner.rows - 1) / 2.0;
    const double cj = (inner.cols - 1) / 2.0;
    RealArray weights(inner);
    for (int i = 0; i < inner.rows; ++i) {
        const double di = (i - ci) / inner.rows;
        for (int j = 0; j < inner.cols; ++j) {
            const double dj = (j - cj) / inner.cols;
            weights(i, j) = floor + slope * (di * di + dj * dj);
        }
    }
    return {inner, std::move(weights), floor, slope};
}

DesiredResponse make_desired_response(Grid2 grid, double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidArgument("response sigma must be positive");
    if (!grid.valid()) throw InvalidArgument("response grid must be at least 1x1");
    const int cr = grid.rows / 2;
    const int cc = grid.cols / 2;
    const double inv = 1.0 / (2.0 * sigma * sigma);
    RealArray values(grid);
    for (int r = 0; r < grid.rows; ++r) {
        for (int c = 0; c < grid.cols; ++c) {
            const double d2 = static_cast<double>((r - cr) * (r - cr) + (c - cc) * (c - cc));
            values(r, c) = std::exp(-d2 * inv);
        }
    }
    return {grid, std::move(values), sigma};
}

RealArray training_target(const DesiredResponse& y) { return ifftshift(y.values); }

void SolverConfig::validate() const {
    if (admm_iterations < 1) throw InvalidArgument("admm_iterations must be >= 1");
    if (!(mu_init > 0.0)) throw InvalidArgument("mu_init must be positive");
    if (!(mu_max >= mu_init)) throw InvalidArgument("mu_max must be >= mu_init");
    if (!(mu_scale >= 1.0)) throw InvalidArgument("mu_scale must be >= 1");
    if (!(tolerance > 0.0)) throw InvalidArgument("tolerance must be positive");
    if (!(penalty_floor > 0.0)) throw InvalidArgument("penalty_floor must be positive");
    if (!(penalty_slope > 0.0)) throw InvalidArgument("penalty_slope must be positive");
    if (!(sigma_factor > 0.0)) throw InvalidArgument("sigma_factor must be positive");
    if (threads < 1) throw InvalidArgument("threads must be >= 1");
}

double objective_value(std::span<const RealArray> w, const FeatureStack& x, const RealArray& target,
                       const PenalizationMask& p) {
    if (w.size() != x.channels.size()) {
        throw GridMismatch("filter has " + std::to_string(w.size()) + " channels, features have " +
                           std::to_string(x.channels.size()));
    }
    require_same_grid(target.grid(), x.grid, "objective target");
    const CropSpec crop = CropSpec::centered(x.grid, p.grid);
    const int rows = x.grid.rows;
    const int cols = x.grid.cols;

    RealArray response(x.grid, 0.0);
    double penalty = 0.0;
    for (std::size_t d = 0; d < w.size(); ++d) {
        require_same_grid(w[d].grid(), p.grid, "objective filter");
        require_same_grid(x.channels[d].grid(), x.grid, "objective features");
        const RealArray& xd = x.channels[d];
        for (int i = 0; i < p.grid.rows; ++i) {
            for (int j = 0; j < p.grid.cols; ++j) {
                const double wv = w[d](i, j);
                const double pw = p.weights(i, j) * wv;
                penalty += pw * pw;
                if (wv == 0.0) continue;
                const int mr = i + crop.offset.row;
                const int mc = j + crop.offset.col;
                for (int nr = 0; nr < rows; ++nr) {
                    const int sr = ((mr - nr) % rows + rows) % rows;
                    for (int nc = 0; nc < cols; ++nc) {
                        const int sc = ((mc - nc) % cols + cols) % cols;
                        response(nr, nc) += wv * xd(sr, sc);
                    }
                }
            }
        }
    }
    double data = 0.0;
    for (std::size_t k = 0; k < response.size(); ++k) {
        const double e = target[k] - response[k];
        data += e * e;
    }
    return 0.5 * data + penalty;
}

double objective_value(const FilterBank& w, const FeatureStack& x, const DesiredResponse& y,
                       const PenalizationMask& p) {
    return objective_value(w.spatial, x, training_target(y), p);
}

RealArray w_step_divisor(const PenalizationMask& p, double mu, std::size_t n_total, PenaltyMode mode,
                         int depth) {
    const double n = static_cast<double>(n_total);
    RealArray divisor(p.grid);
    if (mode == PenaltyMode::scalar) {
        // Literal stacked form: p_tilde^T p_tilde over all D copies of p.
        const double ptp = depth * squared_norm(p.weights);
        std::fill(divisor.begin(), divisor.end(), 2.0 * ptp / n + mu);
        return divisor;
    }
    for (std::size_t k = 0; k < divisor.size(); ++k) {
        divisor[k] = 2.0 * p.weights[k] * p.weights[k] / n + mu;
    }
    return divisor;
}

namespace {

std::vector<RealArray> apply_w_step(std::span<const RealArray> g, std::span<const RealArray> zeta,
                                    const RealArray& divisor, double mu) {
    if (g.size() != zeta.size()) throw GridMismatch("w-step: g and zeta channel counts differ");
    std::vector<RealArray> w;
    w.reserve(g.size());
    for (std::size_t d = 0; d < g.size(); ++d) {
        require_same_grid(g[d].grid(), divisor.grid(), "w-step g");
        require_same_grid(zeta[d].grid(), divisor.grid(), "w-step zeta");
        RealArray wd(divisor.grid());
        for (std::size_t k = 0; k < wd.size(); ++k) wd[k] = (zeta[d][k] + mu * g[d][k]) / divisor[k];
        w.push_back(std::move(wd));
    }
    return w;
}

}  // namespace

std::vector<RealArray> solve_w(std::span<const RealArray> g, std::span<const RealArray> zeta,
                               const PenalizationMask& p, double mu, std::size_t n_total, PenaltyMode mode) {
    if (!(mu > 0.0)) throw InvalidArgument("mu must be positive");
    return apply_w_step(g, zeta, w_step_divisor(p, mu, n_total, mode, static_cast<int>(g.size())), mu);
}

void solve_g_pixel(std::span<const Complex> x_hat, Complex y_hat, std::span<const Complex> zeta_hat,
                   std::span<const Complex> w_hat, double mu, std::span<Complex> out) {
    const std::size_t depth = x_hat.size();
    Complex s_x{}, s_zeta{}, s_w{};
    for (std::size_t d = 0; d < depth; ++d) {
        const Complex xc = std::conj(x_hat[d]);
        s_x += xc * x_hat[d];
        s_zeta += xc * zeta_hat[d];
        s_w += xc * w_hat[d];
    }
    const Complex b = s_x + mu;
    const Complex correction = (s_x * y_hat - s_zeta + mu * s_w) / (mu * b);
    const double inv_mu = 1.0 / mu;
    for (std::size_t d = 0; d < depth; ++d) {
        out[d] = (y_hat * x_hat[d] - zeta_hat[d] + mu * w_hat[d]) * inv_mu - x_hat[d] * correction;
    }
}

std::vector<Complex> solve_g_pixel(std::span<const Complex> x_hat, Complex y_hat,
                                   std::span<const Complex> zeta_hat, std::span<const Complex> w_hat,
                                   double mu) {
    if (zeta_hat.size() != x_hat.size() || w_hat.size() != x_hat.size()) {
        throw GridMismatch("solve_g_pixel: channel counts differ");
    }
    std::vector<Complex> out(x_hat.size());
    solve_g_pixel(x_hat, y_hat, zeta_hat, w_hat, mu, out);
    return out;
}

std::vector<ComplexArray> solve_g(const SpectralStack& x_hat, const ComplexArray& y_hat,
                                  std::span<const ComplexArray> zeta_hat,
                                  std::span<const ComplexArray> w_hat, double mu, int threads) {
    const std::size_t depth = x_hat.channels.size();
    if (zeta_hat.size() != depth || w_hat.size() != depth) {
        throw GridMismatch("solve_g: channel counts differ");
    }
    const Grid2 grid = x_hat.grid;
    require_same_grid(y_hat.grid(), grid, "solve_g label");
    for (std::size_t d = 0; d < depth; ++d) {
        require_same_grid(x_hat.channels[d].grid(), grid, "solve_g features");
        require_same_grid(zeta_hat[d].grid(), grid, "solve_g multipliers");
        require_same_grid(w_hat[d].grid(), grid, "solve_g filter");
    }

    std::vector<ComplexArray> g_hat(depth, ComplexArray(grid));
    const std::size_t bins = grid.size();

    // Bins are independent; each worker gathers one bin at a time into its
    // own scratch, so the result is identical for any thread count.
    auto run = [&](std::size_t begin, std::size_t end) {
        std::vector<Complex> xs(depth), zs(depth), ws(depth), gs(depth);
        for (std::size_t k = begin; k < end; ++k) {
            for (std::size_t d = 0; d < depth; ++d) {
                xs[d] = x_hat.channels[d][k];
                zs[d] = zeta_hat[d][k];
                ws[d] = w_hat[d][k];
            }
            solve_g_pixel(xs, y_hat[k], zs, ws, mu, gs);
            for (std::size_t d = 0; d < depth; ++d) g_hat[d][k] = gs[d];
        }
    };

    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), bins);
    if (workers <= 1) {
        run(0, bins);
        return g_hat;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (bins + workers - 1) / workers;
    for (std::size_t t = 0; t < workers; ++t) {
        const std::size_t begin = t * chunk;
        const std::size_t end = std::min(bins, begin + chunk);
        if (begin < end) pool.emplace_back(run, begin, end);
    }
    pool.clear();
    return g_hat;
}

AdmmState update_multipliers(AdmmState state, std::span<const ComplexArray> g_hat,
                             std::span<const ComplexArray> w_hat) {
    if (g_hat.size() != w_hat.size() || g_hat.size() != state.multipliers.size()) {
        throw GridMismatch("update_multipliers: channel counts differ");
    }
    for (std::size_t d = 0; d < g_hat.size(); ++d) {
        ComplexArray& zeta = state.multipliers[d];
        require_same_grid(g_hat[d].grid(), zeta.grid(), "update_multipliers");
        require_same_grid(w_hat[d].grid(), zeta.grid(), "update_multipliers");
        for (std::size_t k = 0; k < zeta.size(); ++k) zeta[k] += state.mu * (g_hat[d][k] - w_hat[d][k]);
    }
    state.mu = std::min(state.mu_scale * state.mu, state.mu_max);
    ++state.iteration;
    return state;
}

ComplexArray filter_spectrum(const RealArray& w, const CropSpec& crop) {
    ComplexArray spectrum = dft2(embed_center(w, crop));
    const double root_n = std::sqrt(static_cast<double>(crop.outer.size()));
    for (auto& v : spectrum) v *= root_n;
    return spectrum;
}

namespace {

// crop(inverse_dft2(spectrum / sqrt(N)))
RealArray spatial_from_spectrum(const ComplexArray& spectrum, const CropSpec& crop) {
    ComplexArray scaled = spectrum;
    const double inv_root_n = 1.0 / std::sqrt(static_cast<double>(crop.outer.size()));
    for (auto& v : scaled) v *= inv_root_n;
    return crop_center(inverse_dft2_real(scaled), crop);
}

double stacked_norm(std::span<const ComplexArray> a) {
    double s = 0.0;
    for (const auto& ch : a) s += squared_norm(ch);
    return std::sqrt(s);
}

double residual_norm(std::span<const ComplexArray> g, std::span<const ComplexArray> w) {
    double s = 0.0;
    for (std::size_t d = 0; d < g.size(); ++d) {
        for (std::size_t k = 0; k < g[d].size(); ++k) s += std::norm(g[d][k] - w[d][k]);
    }
    return std::sqrt(s);
}

FeatureStack spatial_features(const SpectralStack& x_hat) {
    FeatureStack x{x_hat.grid, 1, {}};
    for (const auto& ch : x_hat.channels) x.channels.push_back(inverse_dft2_real(ch));
    return x;
}

}  // namespace

FilterBank train_filter(const SpectralStack& x_hat, const ComplexArray& y_hat, const PenalizationMask& p,
                        const SolverConfig& config, const std::optional<FilterBank>& warm_start,
                        SolverTrace* trace) {
    config.validate();
    if (x_hat.channels.empty()) throw InvalidArgument("train_filter: no feature channels");
    require_same_grid(y_hat.grid(), x_hat.grid, "train_filter label");
    const CropSpec crop = CropSpec::centered(x_hat.grid, p.grid);
    const std::size_t depth = x_hat.channels.size();
    const std::size_t n_total = x_hat.grid.size();

    std::vector<ComplexArray> g_hat(depth, ComplexArray(x_hat.grid, Complex{}));
    std::vector<ComplexArray> w_hat(depth, ComplexArray(x_hat.grid, Complex{}));
    std::vector<RealArray> w(depth, RealArray(p.grid, 0.0));
    AdmmState state{std::vector<ComplexArray>(depth, ComplexArray(x_hat.grid, Complex{})),
                    config.mu_init, config.mu_max, config.mu_scale, 0};

    if (warm_start) {
        if (warm_start->depth() != static_cast<int>(depth) || !(warm_start->crop == crop)) {
            throw GridMismatch("warm start filter does not match the training problem");
        }
        g_hat = warm_start->spectral;
        w = warm_start->spatial;
        if (config.reuse_multipliers && warm_start->admm.multipliers.size() == depth) {
            state.multipliers = warm_start->admm.multipliers;
        }
    }

    std::optional<FeatureStack> trace_features;
    RealArray trace_target;
    if (trace) {
        trace_features = spatial_features(x_hat);
        trace_target = inverse_dft2_real(y_hat);
    }

    for (int it = 1; it <= config.admm_iterations; ++it) {
        const double mu = state.mu;

        // w-step: closed form over the inner grid.
        std::vector<RealArray> g(depth), zeta(depth);
        for (std::size_t d = 0; d < depth; ++d) {
            g[d] = spatial_from_spectrum(g_hat[d], crop);
            zeta[d] = spatial_from_spectrum(state.multipliers[d], crop);
        }
        RealArray divisor = w_step_divisor(p, mu, n_total, config.penalty_mode, static_cast<int>(depth));
        if (config.w_divisor_offset != 0.0) {
            for (auto& v : divisor) v += config.w_divisor_offset;
        }
        w = apply_w_step(g, zeta, divisor, mu);
        for (std::size_t d = 0; d < depth; ++d) w_hat[d] = filter_spectrum(w[d], crop);

        // g-step: N independent rank-one systems.
        g_hat = solve_g(x_hat, y_hat, state.multipliers, w_hat, mu, config.threads);
        for (std::size_t d = 0; d < depth; ++d) {
            if (!all_finite(g_hat[d]) || !all_finite(w[d])) {
                throw Diverged(it, "non-finite filter values (mu = " + std::to_string(mu) + ")");
            }
        }

        const double w_norm = stacked_norm(w_hat);
        const double diff = residual_norm(g_hat, w_hat);
        // Relative to a zero w_hat (first iteration from a cold start) the
        // residual is unbounded.
        double residual = 0.0;
        if (diff > 0.0) residual = w_norm > 0.0 ? diff / w_norm : std::numeric_limits<double>::infinity();

        state = update_multipliers(std::move(state), g_hat, w_hat);

        if (trace) {
            trace->push_back({it, objective_value(w, *trace_features, trace_target, p), residual, mu});
        }
        if (residual < config.tolerance) break;
    }

    return FilterBank{crop, std::move(w), std::move(g_hat), std::move(state)};
}

FilterBank train_filter(const FeatureStack& x, const DesiredResponse& y, const PenalizationMask& p,
                        const SolverConfig& config, const std::optional<FilterBank>& warm_start,
                        SolverTrace* trace) {
    x.validate();
    require_same_grid(y.grid, x.grid, "train_filter label");
    return train_filter(to_spectral(x), dft2(training_target(y)), p, config, warm_start, trace);
}

RealArray correlation_response(const FilterBank& filter, const SpectralStack& x_hat) {
    if (x_hat.channels.size() != filter.spectral.size()) {
        throw GridMismatch("correlation_response: channel counts differ");
    }
    ComplexArray acc(x_hat.grid, Complex{});
    for (std::size_t d = 0; d < filter.spectral.size(); ++d) {
        require_same_grid(x_hat.channels[d].grid(), filter.spectral[d].grid(), "correlation_response");
        for (std::size_t k = 0; k < acc.size(); ++k) {
            acc[k] += std::conj(filter.spectral[d][k]) * x_hat.channels[d][k];
        }
    }
    return inverse_dft2_real(acc);
}

}  // namespace cftrack
