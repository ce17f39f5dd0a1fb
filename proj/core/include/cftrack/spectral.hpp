#pragma once

// Discrete Fourier transforms and the crop/embed operators used by the solver.
//
// Convention: dft2/inverse_dft2 are unitary (scaled by 1/sqrt(N) in both
// directions), so Parseval holds without extra factors. The solver's
// "unnormalized" spectra are sqrt(N) * dft2(x).

#include "cftrack/array.hpp"

namespace cftrack {

ComplexArray dft2(const RealArray& signal);
ComplexArray dft2(const ComplexArray& signal);
ComplexArray inverse_dft2(const ComplexArray& spectrum);

/// Real part of inverse_dft2; use when the spectrum is Hermitian.
RealArray inverse_dft2_real(const ComplexArray& spectrum);

/// out(i, j) = x((i - delta.row) mod H, (j - delta.col) mod W).
template <typename T>
Array2<T> circular_shift(const Array2<T>& x, Offset2 delta);

/// Moves the zero-displacement element from index (0, 0) to (H/2, W/2).
template <typename T>
Array2<T> fftshift(const Array2<T>& x) {
    return circular_shift(x, {x.rows() / 2, x.cols() / 2});
}

/// Inverse of fftshift.
template <typename T>
Array2<T> ifftshift(const Array2<T>& x) {
    return circular_shift(x, {-(x.rows() / 2), -(x.cols() / 2)});
}

/// Centered inner window of an outer grid. offset = floor((outer - inner) / 2).
struct CropSpec {
    Grid2 outer;
    Grid2 inner;
    Offset2 offset;

    static CropSpec centered(Grid2 outer, Grid2 inner);
    friend bool operator==(const CropSpec&, const CropSpec&) = default;
};

RealArray crop_center(const RealArray& x, const CropSpec& spec);

/// Zero-padded placement of an inner-grid array; adjoint of crop_center.
RealArray embed_center(const RealArray& w, const CropSpec& spec);

/// c(n) = sum_m x(m) * w(m + n), circular, evaluated spectrally.
/// Equals sqrt(N) * inverse_dft2(conj(dft2(x)) * dft2(w)).
RealArray circular_cross_correlation(const RealArray& x, const RealArray& w);

/// Band-limited interpolation by zero-padding the spectrum of `x` onto a
/// finer grid. Index (0, 0) stays the origin; values at the coarse sample
/// points are preserved. Nyquist bins of even-sized axes are split evenly.
RealArray interpolate_spectral(const RealArray& x, Grid2 fine);

/// Wrap an index on an axis of length n into [-n/2, n - n/2).
constexpr int wrap_displacement(int index, int n) noexcept {
    return index >= (n + 1) / 2 ? index - n : index;
}

}  // namespace cftrack
