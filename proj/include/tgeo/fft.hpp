#pragma once

#include <complex>
#include <span>
#include <vector>

namespace tgeo::fft {

using cplx = std::complex<double>;

/// Smallest integer >= n of the form 2^a 3^b 5^c.
int good_size(int n);

/// Forward real transform: out[k] = sum_j x[j] e^{-2 pi i jk/M}, k = 0..M/2.
std::vector<cplx> forward_real(std::span<const double> x);

/// Inverse of forward_real without normalization: given half spectrum of
/// length M/2+1, returns x[j] = sum_k X[k] e^{2 pi i jk/M} over the full
/// Hermitian-extended spectrum.
std::vector<double> backward_real(std::span<const cplx> half, int m);

/// Complex DFT. sign = -1 forward, +1 backward, unnormalized.
std::vector<cplx> dft(std::span<const cplx> x, int sign);

}  // namespace tgeo::fft
