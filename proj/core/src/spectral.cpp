#include "cftrack/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

namespace cftrack {
namespace {

struct FftwBuffer {
    explicit FftwBuffer(std::size_t n)
        : ptr(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
        if (!ptr) throw std::bad_alloc();
    }
    ~FftwBuffer() { fftw_free(ptr); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;

    Complex* data() { return reinterpret_cast<Complex*>(ptr); }

    fftw_complex* ptr;
};

// Planning is not thread-safe in FFTW; execution on distinct buffers is.
// Plans are in-place on fftw_malloc'd storage so every execution sees the
// same alignment and therefore the same codelets.
class PlanCache {
public:
    fftw_plan get(int rows, int cols, int sign) {
        std::lock_guard lock(mutex_);
        auto key = std::make_tuple(rows, cols, sign);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        FftwBuffer scratch(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
        fftw_plan plan = fftw_plan_dft_2d(rows, cols, scratch.ptr, scratch.ptr, sign, FFTW_ESTIMATE);
        plans_.emplace(key, plan);
        return plan;
    }

    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

private:
    std::mutex mutex_;
    std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
    static PlanCache cache;
    return cache;
}

template <typename T>
ComplexArray transform(const Array2<T>& in, int sign) {
    const Grid2 grid = in.grid();
    const std::size_t n = grid.size();
    if (n == 0) throw InvalidArgument("cannot transform an empty array");

    FftwBuffer buffer(n);
    Complex* work = buffer.data();
    for (std::size_t i = 0; i < n; ++i) work[i] = Complex(in[i]);

    fftw_execute_dft(plan_cache().get(grid.rows, grid.cols, sign), buffer.ptr, buffer.ptr);

    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    ComplexArray out(grid);
    for (std::size_t i = 0; i < n; ++i) out[i] = work[i] * scale;
    return out;
}

}  // namespace

ComplexArray dft2(const RealArray& signal) { return transform(signal, FFTW_FORWARD); }
ComplexArray dft2(const ComplexArray& signal) { return transform(signal, FFTW_FORWARD); }
ComplexArray inverse_dft2(const ComplexArray& spectrum) { return transform(spectrum, FFTW_BACKWARD); }

RealArray inverse_dft2_real(const ComplexArray& spectrum) {
    ComplexArray full = inverse_dft2(spectrum);
    RealArray out(full.grid());
    for (std::size_t i = 0; i < full.size(); ++i) out[i] = full[i].real();
    return out;
}

template <typename T>
Array2<T> circular_shift(const Array2<T>& x, Offset2 delta) {
    const int h = x.rows();
    const int w = x.cols();
    Array2<T> out(x.grid());
    const int dr = ((delta.row % h) + h) % h;
    const int dc = ((delta.col % w) + w) % w;
    for (int r = 0; r < h; ++r) {
        const int src_r = (r - dr + h) % h;
        for (int c = 0; c < w; ++c) {
            out(r, c) = x(src_r, (c - dc + w) % w);
        }
    }
    return out;
}

template RealArray circular_shift(const RealArray&, Offset2);
template ComplexArray circular_shift(const ComplexArray&, Offset2);

CropSpec CropSpec::centered(Grid2 outer, Grid2 inner) {
    if (!outer.valid() || !inner.valid()) {
        throw InvalidArgument("crop grids must be at least 1x1");
    }
    if (inner.rows > outer.rows || inner.cols > outer.cols) {
        throw GridMismatch("inner grid " + to_string(inner) + " does not fit in outer grid " +
                           to_string(outer));
    }
    return {outer, inner, {(outer.rows - inner.rows) / 2, (outer.cols - inner.cols) / 2}};
}

RealArray crop_center(const RealArray& x, const CropSpec& spec) {
    require_same_grid(x.grid(), spec.outer, "crop_center");
    RealArray out(spec.inner);
    for (int r = 0; r < spec.inner.rows; ++r) {
        for (int c = 0; c < spec.inner.cols; ++c) {
            out(r, c) = x(r + spec.offset.row, c + spec.offset.col);
        }
    }
    return out;
}

RealArray embed_center(const RealArray& w, const CropSpec& spec) {
    require_same_grid(w.grid(), spec.inner, "embed_center");
    RealArray out(spec.outer, 0.0);
    for (int r = 0; r < spec.inner.rows; ++r) {
        for (int c = 0; c < spec.inner.cols; ++c) {
            out(r + spec.offset.row, c + spec.offset.col) = w(r, c);
        }
    }
    return out;
}

RealArray circular_cross_correlation(const RealArray& x, const RealArray& w) {
    require_same_grid(x.grid(), w.grid(), "circular_cross_correlation");
    ComplexArray xs = dft2(x);
    ComplexArray ws = dft2(w);
    const double root_n = std::sqrt(static_cast<double>(x.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = std::conj(xs[i]) * ws[i] * root_n;
    return inverse_dft2_real(xs);
}

RealArray interpolate_spectral(const RealArray& x, Grid2 fine) {
    const Grid2 coarse = x.grid();
    if (fine.rows < coarse.rows || fine.cols < coarse.cols) {
        throw GridMismatch("interpolation target " + to_string(fine) + " is smaller than " +
                           to_string(coarse));
    }
    const ComplexArray spectrum = dft2(x);
    ComplexArray padded(fine, Complex{});

    // Frequency k of a length-n axis maps to index k (k >= 0) or n + k (k < 0).
    // For even n the Nyquist bin k = n/2 is split between +n/2 and -n/2.
    auto targets = [](int k, int n, int m) {
        struct Slot { int index; double weight; };
        std::vector<Slot> slots;
        const int freq = wrap_displacement(k, n);
        if (n % 2 == 0 && k == n / 2 && m > n) {
            slots.push_back({n / 2, 0.5});
            slots.push_back({m - n / 2, 0.5});
        } else {
            slots.push_back({freq >= 0 ? freq : m + freq, 1.0});
        }
        return slots;
    };

    for (int kr = 0; kr < coarse.rows; ++kr) {
        const auto rows = targets(kr, coarse.rows, fine.rows);
        for (int kc = 0; kc < coarse.cols; ++kc) {
            const auto cols = targets(kc, coarse.cols, fine.cols);
            for (const auto& rs : rows) {
                for (const auto& cs : cols) {
                    padded(rs.index, cs.index) += spectrum(kr, kc) * (rs.weight * cs.weight);
                }
            }
        }
    }
    // Unitary transforms: rescale so sample values (not energy) are preserved.
    const double gain = std::sqrt(static_cast<double>(fine.size()) / static_cast<double>(coarse.size()));
    for (auto& v : padded) v *= gain;
    return inverse_dft2_real(padded);
}

}  // namespace cftrack
