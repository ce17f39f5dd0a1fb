#include "cftrack/cli/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "cftrack/oracle/oracle.hpp"
#include "cftrack/solver.hpp"
#include "cftrack/spectral.hpp"
#include "cftrack/tracker.hpp"

namespace cftrack::cli {

namespace {

class Random {
public:
    explicit Random(std::uint64_t seed) : rng_(seed) {}

    int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    double normal() { return normal_(rng_); }

    RealArray real(Grid2 g) {
        RealArray a(g);
        for (double& v : a) v = normal();
        return a;
    }
    ComplexArray complex(Grid2 g) {
        ComplexArray a(g);
        for (Complex& v : a) v = {normal(), normal()};
        return a;
    }
    FeatureStack stack(Grid2 g, int depth) {
        FeatureStack x{g, 1, {}};
        for (int d = 0; d < depth; ++d) x.channels.push_back(real(g));
        return x;
    }

private:
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_;
};

template <typename A>
double max_abs_diff(const A& a, const A& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

template <typename A>
double max_abs(const A& a) {
    double m = 0.0;
    for (const auto& v : a) m = std::max(m, std::abs(v));
    return m;
}

/// Tracks the worst relative error of a suite against its tolerance.
struct Check {
    double tolerance;
    double worst = 0.0;
    int trials = 0;

    void add(double diff, double scale) {
        worst = std::max(worst, diff / std::max(scale, 1e-300));
        ++trials;
    }
    bool passed() const { return worst <= tolerance; }
    std::string detail() const {
        std::ostringstream os;
        os << trials << " checks, worst relative error " << worst << " (tolerance " << tolerance << ")";
        return os.str();
    }
};

SuiteResult spectral_identities(Random& rnd) {
    Check check{1e-9};
    for (int trial = 0; trial < 100; ++trial) {
        const Grid2 g{rnd.uniform_int(1, 9), rnd.uniform_int(1, 9)};
        const RealArray x = rnd.real(g);
        const ComplexArray xh = dft2(x);
        const double nx = std::sqrt(squared_norm(x));

        check.add(std::abs(std::sqrt(squared_norm(xh)) - nx), nx);
        check.add(max_abs_diff(xh, oracle::naive_dft2(x)), max_abs(xh));
        const ComplexArray back = inverse_dft2(xh);
        double round_trip = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) round_trip = std::max(round_trip, std::abs(back[k] - x[k]));
        check.add(round_trip, max_abs(x));

        const Offset2 delta{rnd.uniform_int(-12, 12), rnd.uniform_int(-12, 12)};
        const ComplexArray shifted = dft2(circular_shift(x, delta));
        ComplexArray expected(g);
        for (int k = 0; k < g.rows; ++k) {
            for (int l = 0; l < g.cols; ++l) {
                const double phase = -2.0 * std::numbers::pi *
                                     (static_cast<double>(k) * delta.row / g.rows +
                                      static_cast<double>(l) * delta.col / g.cols);
                expected(k, l) = xh(k, l) * std::polar(1.0, phase);
            }
        }
        check.add(max_abs_diff(shifted, expected), max_abs(xh));

        const RealArray w = rnd.real(g);
        const RealArray direct = oracle::direct_correlation(x, w);
        check.add(max_abs_diff(circular_cross_correlation(x, w), direct), std::max(max_abs(direct), 1.0));

        const Grid2 inner{rnd.uniform_int(1, g.rows), rnd.uniform_int(1, g.cols)};
        const CropSpec crop = CropSpec::centered(g, inner);
        const RealArray small = rnd.real(inner);
        double lhs = 0.0, rhs = 0.0;
        const RealArray cropped = crop_center(x, crop);
        const RealArray embedded = embed_center(small, crop);
        for (std::size_t k = 0; k < small.size(); ++k) lhs += cropped[k] * small[k];
        for (std::size_t k = 0; k < x.size(); ++k) rhs += x[k] * embedded[k];
        check.add(std::abs(lhs - rhs), std::max({std::abs(lhs), std::abs(rhs), 1.0}));
    }
    return {"spectral-identities", check.passed(), check.detail()};
}

SuiteResult sherman_morrison(Random& rnd) {
    Check check{1e-10};
    for (int trial = 0; trial < 200; ++trial) {
        const int depth = rnd.uniform_int(1, 8);
        std::vector<Complex> x(static_cast<std::size_t>(depth)), z(x.size()), w(x.size());
        for (std::size_t d = 0; d < x.size(); ++d) {
            x[d] = {rnd.normal(), rnd.normal()};
            z[d] = {rnd.normal(), rnd.normal()};
            w[d] = {rnd.normal(), rnd.normal()};
        }
        const Complex y{rnd.normal(), rnd.normal()};
        const double mu = std::pow(10.0, rnd.uniform(-2.0, 3.0));
        const auto fast = solve_g_pixel(x, y, z, w, mu);
        const auto dense = oracle::dense_g_pixel(x, y, z, w, mu);
        double diff = 0.0, scale = 0.0;
        for (std::size_t d = 0; d < fast.size(); ++d) {
            diff = std::max(diff, std::abs(fast[d] - dense[d]));
            scale = std::max(scale, std::abs(dense[d]));
        }
        check.add(diff, scale);
    }
    return {"sherman-morrison", check.passed(), check.detail()};
}

SuiteResult solver_equivalence(Random& rnd, const SelftestFaults& faults) {
    Check check{1e-6};
    SolverConfig cfg;
    cfg.mu_init = 0.1;
    cfg.mu_scale = 1.0;
    cfg.mu_max = 0.1;
    cfg.admm_iterations = 20000;
    cfg.tolerance = 1e-12;
    cfg.w_divisor_offset = faults.w_divisor_offset;
    for (int trial = 0; trial < 6; ++trial) {
        const Grid2 outer{rnd.uniform_int(3, 8), rnd.uniform_int(3, 8)};
        const Grid2 inner{rnd.uniform_int(1, std::min(4, outer.rows)), rnd.uniform_int(1, std::min(4, outer.cols))};
        const FeatureStack x = rnd.stack(outer, rnd.uniform_int(1, 3));
        const PenalizationMask p = make_penalization(inner, 0.1, 3.0);
        const DesiredResponse y = make_desired_response(outer, 1.0);

        const FilterBank f = train_filter(x, y, p, cfg);
        const auto w = oracle::dense_optimum(x, training_target(y), p);
        double diff = 0.0, norm = 0.0;
        for (std::size_t d = 0; d < w.size(); ++d) {
            for (std::size_t k = 0; k < w[d].size(); ++k) {
                diff += std::pow(f.spatial[d][k] - w[d][k], 2);
                norm += w[d][k] * w[d][k];
            }
        }
        check.add(std::sqrt(diff), std::sqrt(norm));
    }
    return {"solver-equivalence", check.passed(), check.detail()};
}

SuiteResult objective_consistency(Random& rnd) {
    Check check{1e-9};
    for (int trial = 0; trial < 20; ++trial) {
        const Grid2 outer{rnd.uniform_int(2, 8), rnd.uniform_int(2, 8)};
        const Grid2 inner{rnd.uniform_int(1, outer.rows), rnd.uniform_int(1, outer.cols)};
        const int depth = rnd.uniform_int(1, 3);
        const FeatureStack x = rnd.stack(outer, depth);
        const PenalizationMask p = make_penalization(inner, 0.1, 3.0);
        const RealArray target = training_target(make_desired_response(outer, 1.0));
        std::vector<RealArray> w;
        for (int d = 0; d < depth; ++d) w.push_back(rnd.real(inner));

        // Direct spatial sums against the explicit matrix form.
        const double spatial = objective_value(w, x, target, p);
        const double matrix = oracle::objective_matrix(w, x, target, p);
        check.add(std::abs(spatial - matrix), std::abs(matrix));

        // Per-bin spectral data term against the spatial one.
        const CropSpec crop = CropSpec::centered(outer, inner);
        const ComplexArray y_hat = dft2(target);
        ComplexArray r_hat(outer, Complex{});
        double penalty = 0.0;
        for (int d = 0; d < depth; ++d) {
            const ComplexArray x_hat = dft2(x.channels[static_cast<std::size_t>(d)]);
            const ComplexArray g_hat = filter_spectrum(w[static_cast<std::size_t>(d)], crop);
            for (std::size_t k = 0; k < r_hat.size(); ++k) r_hat[k] += std::conj(x_hat[k]) * g_hat[k];
            for (std::size_t k = 0; k < p.weights.size(); ++k) {
                penalty += std::pow(p.weights[k] * w[static_cast<std::size_t>(d)][k], 2);
            }
        }
        double data = 0.0;
        for (std::size_t k = 0; k < r_hat.size(); ++k) data += std::norm(y_hat[k] - r_hat[k]);
        check.add(std::abs(0.5 * data + penalty - matrix), std::abs(matrix));

        // Closed-form w-step against dense minimization of its quadratic.
        std::vector<ComplexArray> g_hat, zeta_hat;
        std::vector<RealArray> g, zeta;
        const double n = static_cast<double>(outer.size());
        for (int d = 0; d < depth; ++d) {
            g_hat.push_back(filter_spectrum(rnd.real(inner), crop));
            ComplexArray z = dft2(rnd.real(outer));
            for (Complex& v : z) v *= std::sqrt(n);
            zeta_hat.push_back(z);
            auto recover = [&](const ComplexArray& s) {
                ComplexArray scaled = s;
                for (Complex& v : scaled) v /= std::sqrt(n);
                return crop_center(inverse_dft2_real(scaled), crop);
            };
            g.push_back(recover(g_hat.back()));
            zeta.push_back(recover(zeta_hat.back()));
        }
        const double mu = std::pow(10.0, rnd.uniform(-1.0, 2.0));
        const auto closed = solve_w(g, zeta, p, mu, outer.size());
        const auto dense = oracle::dense_w_step(g_hat, zeta_hat, p, mu);
        for (int d = 0; d < depth; ++d) {
            const auto k = static_cast<std::size_t>(d);
            check.add(max_abs_diff(closed[k], dense[k]), std::max(max_abs(dense[k]), 1.0));
        }
    }
    return {"objective-consistency", check.passed(), check.detail()};
}

SuiteResult detection_equivariance(Random& rnd) {
    int failures = 0;
    int trials = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const Grid2 outer{rnd.uniform_int(6, 16), rnd.uniform_int(6, 16)};
        const Grid2 inner{outer.rows / 2, outer.cols / 2};
        const FeatureStack x = rnd.stack(outer, rnd.uniform_int(1, 4));
        const PenalizationMask p = make_penalization(inner, 0.1, 3.0);
        const DesiredResponse y = make_desired_response(outer, 0.6);
        const FilterBank f = train_filter(x, y, p, SolverConfig{});

        const Offset2 k{rnd.uniform_int(-3, 3), rnd.uniform_int(-3, 3)};
        FeatureStack moved = x;
        for (auto& ch : moved.channels) ch = circular_shift(ch, k);
        const RealArray base = correlation_response(f, to_spectral(x));
        const RealArray shifted = correlation_response(f, to_spectral(moved));
        const auto argmax = [](const RealArray& a) {
            return static_cast<int>(std::max_element(a.begin(), a.end()) - a.begin());
        };
        const int b = argmax(base);
        const int s = argmax(shifted);
        const int br = b / outer.cols, bc = b % outer.cols;
        const int expect = ((br + k.row) % outer.rows + outer.rows) % outer.rows * outer.cols +
                           ((bc + k.col) % outer.cols + outer.cols) % outer.cols;
        if (s != expect) ++failures;
        ++trials;
    }
    std::ostringstream os;
    os << trials << " shifted windows, " << failures << " argmax mismatches";
    return {"detection-equivariance", failures == 0, os.str()};
}

}  // namespace

std::vector<SuiteResult> run_selftest_suites(std::uint64_t seed, const SelftestFaults& faults) {
    Random rnd(seed);
    std::vector<SuiteResult> out;
    out.push_back(spectral_identities(rnd));
    out.push_back(sherman_morrison(rnd));
    out.push_back(solver_equivalence(rnd, faults));
    out.push_back(objective_consistency(rnd));
    out.push_back(detection_equivariance(rnd));
    return out;
}

}  // namespace cftrack::cli
