#pragma once

#include <complex>
#include <span>
#include <vector>

namespace rgbt {

using Spectrum = std::vector<std::complex<double>>;

/// Forward 2-D DFT of a real row-major `w`x`h` grid (full complex output).
Spectrum fft2(std::span<const double> data, int w, int h);

/// Inverse 2-D DFT, scaled by 1/(w h), returning the real part.
std::vector<double> ifft2_real(const Spectrum& spec, int w, int h);

}  // namespace rgbt
