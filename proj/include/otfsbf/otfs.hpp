#pragma once

// Delay-Doppler modulation core: the symplectic finite Fourier transform
// pair, block-circulant time-domain channels generated by integer
// delay/Doppler shifts, the closed-form eigenvalues that diagonalize them,
// and the resulting single-tap equalizer.

#include <complex>

#include <Eigen/Dense>

namespace otfsbf {

using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

// Delay-Doppler grid with num_delay bins (stride 1) and num_doppler bins
// (stride num_delay): the symbol at delay m, Doppler n sits at flat index
// n * num_delay + m. All vectors over the grid use this layout.
struct GridDims {
    int num_delay = 0;
    int num_doppler = 0;
    int size() const { return num_delay * num_doppler; }
};

// Unitary DFT matrix, entries exp(-2*pi*i*a*b/n) / sqrt(n). Symmetric.
CMat dft_matrix(int n);

// Inverse symplectic finite Fourier transform, (F_N^H kron F_M) x, taking a
// delay-Doppler frame to the time domain.
CVec isfft(const GridDims& dims, const CVec& x);

// Forward transform, (F_N kron F_M^H) y; inverse of isfft.
CVec sfft(const GridDims& dims, const CVec& y);

// Time-domain channel matrix sum_p gain_p (P_N^{n_p} kron P_M^{m_p}) with P
// the cyclic down-shift; fully described by its first column, which holds
// gain_p at flat index n_p * num_delay + m_p.
struct BlockCirculant {
    GridDims dims;
    CVec first_column;

    // Eigenvalues in the delay-Doppler domain, laid out on the grid:
    //   d(k, l) = sum_{n,m} col[n*M + m] exp(+2i pi l m / M) exp(-2i pi k n / N)
    // at flat index k * num_delay + l. sfft * H * isfft = diag of this vector.
    CVec tf_eigenvalues() const;

    // Dense matrix, for verification only; grids beyond 256 symbols refuse.
    CMat materialize() const;
};

// Demodulates a received time-domain frame and applies the single-tap
// equalizer: sfft(received) / eigenvalues, returning delay-Doppler symbol
// estimates. For a frame transmitted as isfft(x) through the matching
// channel this recovers x exactly (in the absence of noise). Throws
// NearSingularEqualizer if any |eigenvalue| <= 1e-12.
CVec equalize(const GridDims& dims, const CVec& eigenvalues, const CVec& received);

}  // namespace otfsbf
