#include "cftrack/oracle/oracle.hpp"

#include <cmath>
#include <numbers>

namespace cftrack::oracle {

namespace {

int mod(int a, int n) {
    const int r = a % n;
    return r < 0 ? r + n : r;
}

ComplexArray naive_transform(const ComplexArray& x, double sign) {
    const int rows = x.rows();
    const int cols = x.cols();
    const double scale = 1.0 / std::sqrt(static_cast<double>(x.size()));
    ComplexArray out(x.grid());
    for (int k = 0; k < rows; ++k) {
        for (int l = 0; l < cols; ++l) {
            Complex acc{};
            for (int r = 0; r < rows; ++r) {
                for (int c = 0; c < cols; ++c) {
                    const double phase = sign * 2.0 * std::numbers::pi *
                                         (static_cast<double>(k * r) / rows + static_cast<double>(l * c) / cols);
                    acc += x(r, c) * std::polar(1.0, phase);
                }
            }
            out(k, l) = acc * scale;
        }
    }
    return out;
}

}  // namespace

ComplexArray naive_dft2(const ComplexArray& x) { return naive_transform(x, -1.0); }

ComplexArray naive_dft2(const RealArray& x) {
    ComplexArray c(x.grid());
    for (std::size_t k = 0; k < x.size(); ++k) c[k] = x[k];
    return naive_transform(c, -1.0);
}

ComplexArray naive_inverse_dft2(const ComplexArray& x) { return naive_transform(x, 1.0); }

Eigen::MatrixXcd dft_matrix(Grid2 grid) {
    const int n = static_cast<int>(grid.size());
    Eigen::MatrixXcd f(n, n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (int a = 0; a < n; ++a) {
        const int k = a / grid.cols, l = a % grid.cols;
        for (int b = 0; b < n; ++b) {
            const int r = b / grid.cols, c = b % grid.cols;
            const double phase = -2.0 * std::numbers::pi *
                                 (static_cast<double>(k * r) / grid.rows + static_cast<double>(l * c) / grid.cols);
            f(a, b) = std::polar(scale, phase);
        }
    }
    return f;
}

Eigen::MatrixXd embed_matrix(const CropSpec& crop) {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(crop.outer.size()),
                                              static_cast<Eigen::Index>(crop.inner.size()));
    for (int i = 0; i < crop.inner.rows; ++i) {
        for (int j = 0; j < crop.inner.cols; ++j) {
            const int outer = (i + crop.offset.row) * crop.outer.cols + (j + crop.offset.col);
            b(outer, i * crop.inner.cols + j) = 1.0;
        }
    }
    return b;
}

Eigen::MatrixXd data_matrix(const FeatureStack& x, const CropSpec& crop) {
    const int n = static_cast<int>(crop.outer.size());
    const int m = static_cast<int>(crop.inner.size());
    Eigen::MatrixXd a(n, m * x.depth());
    for (int d = 0; d < x.depth(); ++d) {
        const RealArray& xd = x.channels[static_cast<std::size_t>(d)];
        for (int k = 0; k < m; ++k) {
            const int mr = k / crop.inner.cols + crop.offset.row;
            const int mc = k % crop.inner.cols + crop.offset.col;
            for (int row = 0; row < n; ++row) {
                const int nr = row / crop.outer.cols, nc = row % crop.outer.cols;
                a(row, d * m + k) = xd(mod(mr - nr, crop.outer.rows), mod(mc - nc, crop.outer.cols));
            }
        }
    }
    return a;
}

Eigen::VectorXd stack(std::span<const RealArray> w) {
    std::size_t total = 0;
    for (const auto& ch : w) total += ch.size();
    Eigen::VectorXd v(static_cast<Eigen::Index>(total));
    Eigen::Index i = 0;
    for (const auto& ch : w) {
        for (double value : ch) v(i++) = value;
    }
    return v;
}

std::vector<RealArray> unstack(const Eigen::VectorXd& v, Grid2 inner, int depth) {
    std::vector<RealArray> w;
    Eigen::Index i = 0;
    for (int d = 0; d < depth; ++d) {
        RealArray ch(inner);
        for (double& value : ch) value = v(i++);
        w.push_back(std::move(ch));
    }
    return w;
}

namespace {

Eigen::VectorXd penalty_diagonal(const PenalizationMask& p, int depth) {
    Eigen::VectorXd diag(static_cast<Eigen::Index>(p.grid.size()) * depth);
    Eigen::Index i = 0;
    for (int d = 0; d < depth; ++d) {
        for (double value : p.weights) diag(i++) = value;
    }
    return diag;
}

Eigen::VectorXd as_vector(const RealArray& a) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t k = 0; k < a.size(); ++k) v(static_cast<Eigen::Index>(k)) = a[k];
    return v;
}

}  // namespace

double objective_matrix(std::span<const RealArray> w, const FeatureStack& x, const RealArray& target,
                        const PenalizationMask& p) {
    const CropSpec crop = CropSpec::centered(x.grid, p.grid);
    const Eigen::VectorXd wv = stack(w);
    const Eigen::VectorXd residual = as_vector(target) - data_matrix(x, crop) * wv;
    const Eigen::VectorXd pw = penalty_diagonal(p, x.depth()).cwiseProduct(wv);
    return 0.5 * residual.squaredNorm() + pw.squaredNorm();
}

std::vector<RealArray> dense_optimum(const FeatureStack& x, const RealArray& target, const PenalizationMask& p) {
    const CropSpec crop = CropSpec::centered(x.grid, p.grid);
    const Eigen::MatrixXd a = data_matrix(x, crop);
    const Eigen::VectorXd p2 = penalty_diagonal(p, x.depth()).array().square();
    Eigen::MatrixXd lhs = a.transpose() * a;
    lhs.diagonal() += 2.0 * p2;
    const Eigen::VectorXd w = lhs.ldlt().solve(a.transpose() * as_vector(target));
    return unstack(w, p.grid, x.depth());
}

std::vector<Complex> dense_g_pixel(std::span<const Complex> x_hat, Complex y_hat, std::span<const Complex> zeta_hat,
                                   std::span<const Complex> w_hat, double mu) {
    const auto d = static_cast<Eigen::Index>(x_hat.size());
    Eigen::VectorXcd x(d), rhs(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        const auto k = static_cast<std::size_t>(i);
        x(i) = x_hat[k];
        rhs(i) = x_hat[k] * y_hat - zeta_hat[k] + mu * w_hat[k];
    }
    Eigen::MatrixXcd lhs = x * x.adjoint();
    lhs.diagonal().array() += mu;
    const Eigen::VectorXcd g = lhs.partialPivLu().solve(rhs);
    return {g.data(), g.data() + g.size()};
}

std::vector<RealArray> dense_w_step(std::span<const ComplexArray> g_hat, std::span<const ComplexArray> zeta_hat,
                                    const PenalizationMask& p, double mu) {
    std::vector<RealArray> out;
    for (std::size_t d = 0; d < g_hat.size(); ++d) {
        const Grid2 outer = g_hat[d].grid();
        const CropSpec crop = CropSpec::centered(outer, p.grid);
        const double n = static_cast<double>(outer.size());
        // F B maps w to sqrt(N) * dft2(embed(w)).
        const Eigen::MatrixXcd fb = std::sqrt(n) * dft_matrix(outer) * embed_matrix(crop).cast<Complex>();

        Eigen::VectorXcd g(static_cast<Eigen::Index>(outer.size())), z(g.size());
        for (std::size_t k = 0; k < outer.size(); ++k) {
            g(static_cast<Eigen::Index>(k)) = g_hat[d][k];
            z(static_cast<Eigen::Index>(k)) = zeta_hat[d][k];
        }
        // Stationarity: 2 P^2 w - Re(FB^H zeta) + mu (Re(FB^H FB) w - Re(FB^H g)) = 0.
        Eigen::MatrixXd lhs = mu * (fb.adjoint() * fb).real();
        lhs.diagonal() += 2.0 * as_vector(p.weights).array().square().matrix();
        const Eigen::VectorXd rhs = (fb.adjoint() * (z + mu * g)).real();
        out.push_back(unstack(lhs.ldlt().solve(rhs), p.grid, 1).front());
    }
    return out;
}

RealArray direct_correlation(const RealArray& x, const RealArray& w) {
    require_same_grid(x.grid(), w.grid(), "direct_correlation");
    RealArray c(x.grid(), 0.0);
    for (int nr = 0; nr < x.rows(); ++nr) {
        for (int nc = 0; nc < x.cols(); ++nc) {
            double acc = 0.0;
            for (int r = 0; r < x.rows(); ++r) {
                for (int col = 0; col < x.cols(); ++col) {
                    acc += x(r, col) * w(mod(r + nr, x.rows()), mod(col + nc, x.cols()));
                }
            }
            c(nr, nc) = acc;
        }
    }
    return c;
}

}  // namespace cftrack::oracle
