#include "otfsbf/otfs.hpp"

#include <cmath>
#include <stdexcept>

#include "otfsbf/errors.hpp"

namespace otfsbf {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void check_dims(const GridDims& dims, const CVec& x, const char* what) {
    if (dims.num_delay <= 0 || dims.num_doppler <= 0)
        throw std::invalid_argument(std::string(what) + ": empty grid");
    if (x.size() != dims.size())
        throw std::invalid_argument(std::string(what) + ": vector does not match grid");
}

// Reshape to num_delay x num_doppler (delay down the columns), multiply on
// both sides, flatten back. vec(B X A) = (A' kron B) vec(X) with Eigen's
// column-major storage, and every DFT matrix here is symmetric.
CVec two_sided(const GridDims& dims, const CMat& left, const CMat& right, const CVec& x) {
    Eigen::Map<const CMat> X(x.data(), dims.num_delay, dims.num_doppler);
    CMat Y = left * X * right;
    return Eigen::Map<const CVec>(Y.data(), Y.size());
}

}  // namespace

CMat dft_matrix(int n) {
    CMat F(n, n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            double phi = -kTwoPi * static_cast<double>(a) * static_cast<double>(b) / n;
            F(a, b) = scale * std::complex<double>(std::cos(phi), std::sin(phi));
        }
    return F;
}

CVec isfft(const GridDims& dims, const CVec& x) {
    check_dims(dims, x, "isfft");
    CMat fm = dft_matrix(dims.num_delay);
    CMat fn = dft_matrix(dims.num_doppler);
    return two_sided(dims, fm, fn.adjoint(), x);
}

CVec sfft(const GridDims& dims, const CVec& y) {
    check_dims(dims, y, "sfft");
    CMat fm = dft_matrix(dims.num_delay);
    CMat fn = dft_matrix(dims.num_doppler);
    return two_sided(dims, fm.adjoint(), fn, y);
}

CVec BlockCirculant::tf_eigenvalues() const {
    check_dims(dims, first_column, "tf_eigenvalues");
    const int M = dims.num_delay, N = dims.num_doppler;
    // d = sqrt(MN) F_M^H A F_N with A the reshaped first column; the result
    // keeps the grid layout (Doppler index major).
    CMat fm = dft_matrix(M);
    CMat fn = dft_matrix(N);
    CVec d = two_sided(dims, fm.adjoint(), fn, first_column);
    return std::sqrt(static_cast<double>(M) * N) * d;
}

CMat BlockCirculant::materialize() const {
    check_dims(dims, first_column, "materialize");
    const int M = dims.num_delay, N = dims.num_doppler;
    if (M * N > 256) throw std::invalid_argument("materialize: grid too large");
    CMat H = CMat::Zero(M * N, M * N);
    for (int n = 0; n < N; ++n)
        for (int m = 0; m < M; ++m) {
            std::complex<double> a = first_column(n * M + m);
            if (a == std::complex<double>(0.0, 0.0)) continue;
            for (int nj = 0; nj < N; ++nj)
                for (int mj = 0; mj < M; ++mj) {
                    int i = ((nj + n) % N) * M + (mj + m) % M;
                    H(i, nj * M + mj) += a;
                }
        }
    return H;
}

CVec equalize(const GridDims& dims, const CVec& eigenvalues, const CVec& received) {
    check_dims(dims, eigenvalues, "equalize");
    check_dims(dims, received, "equalize");
    CVec t = sfft(dims, received);
    for (int i = 0; i < t.size(); ++i) {
        if (std::abs(eigenvalues(i)) <= 1e-12)
            throw NearSingularEqualizer("channel eigenvalue magnitude at or below 1e-12");
        t(i) /= eigenvalues(i);
    }
    return t;
}

}  // namespace otfsbf
