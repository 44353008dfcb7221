#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <complex>

#include <Eigen/Dense>

#include "otfsbf/errors.hpp"
#include "otfsbf/otfs.hpp"
#include "otfsbf/rng.hpp"

using namespace otfsbf;
using Cd = std::complex<double>;

namespace {

CMat kron(const CMat& A, const CMat& B) {
    CMat K(A.rows() * B.rows(), A.cols() * B.cols());
    for (int i = 0; i < A.rows(); ++i)
        for (int j = 0; j < A.cols(); ++j)
            K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return K;
}

CVec random_cvec(Rng& rng, int n) { return rng.cgaussian_vector(n); }

}  // namespace

TEST_CASE("dft matrix is unitary and symmetric") {
    for (int n : {1, 2, 3, 4, 8}) {
        CMat F = dft_matrix(n);
        CHECK((F * F.adjoint() - CMat::Identity(n, n)).norm() <= 1e-13 * n);
        CHECK((F - F.transpose()).norm() <= 1e-14 * n);
    }
}

TEST_CASE("sfft inverts isfft") {
    Rng rng(11);
    for (auto [M, N] : {std::pair{4, 3}, {8, 8}, {2, 5}, {1, 6}, {6, 1}}) {
        GridDims dims{M, N};
        CVec x = random_cvec(rng, dims.size());
        CHECK((sfft(dims, isfft(dims, x)) - x).norm() <= 1e-12);
        CHECK((isfft(dims, sfft(dims, x)) - x).norm() <= 1e-12);
        // Both transforms are unitary.
        CHECK(isfft(dims, x).norm() == doctest::Approx(x.norm()).epsilon(1e-12));
    }
}

TEST_CASE("transforms match their dense kronecker forms") {
    Rng rng(12);
    for (auto [M, N] : {std::pair{3, 4}, {4, 2}}) {
        GridDims dims{M, N};
        CMat fm = dft_matrix(M), fn = dft_matrix(N);
        CMat isfft_dense = kron(fn.adjoint(), fm);
        CMat sfft_dense = kron(fn, fm.adjoint());
        for (int rep = 0; rep < 3; ++rep) {
            CVec x = random_cvec(rng, dims.size());
            CHECK((isfft(dims, x) - isfft_dense * x).norm() <= 1e-12);
            CHECK((sfft(dims, x) - sfft_dense * x).norm() <= 1e-12);
        }
    }
}

TEST_CASE("block circulant from a single shift acts as a cyclic shift") {
    GridDims dims{4, 3};
    BlockCirculant bc{dims, CVec::Zero(dims.size())};
    int n0 = 2, m0 = 1;
    bc.first_column(n0 * dims.num_delay + m0) = Cd(1.0, 0.0);
    CMat H = bc.materialize();
    // Column j carries a single 1 at the shifted index.
    for (int nj = 0; nj < 3; ++nj)
        for (int mj = 0; mj < 4; ++mj) {
            int j = nj * 4 + mj;
            int i = ((nj + n0) % 3) * 4 + (mj + m0) % 4;
            CHECK(std::abs(H(i, j) - Cd(1.0, 0.0)) <= 1e-15);
            CHECK(H.col(j).cwiseAbs().sum() == doctest::Approx(1.0).epsilon(1e-14));
        }
}

TEST_CASE("single-tap eigenvalues match the closed form") {
    GridDims dims{8, 4};
    Rng rng(13);
    int n0 = 3, m0 = 5;
    Cd g = rng.cgaussian();
    BlockCirculant bc{dims, CVec::Zero(dims.size())};
    bc.first_column(n0 * dims.num_delay + m0) = g;
    CVec d = bc.tf_eigenvalues();
    for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 8; ++l) {
            Cd expect = g *
                        std::polar(1.0, 2.0 * M_PI * l * m0 / 8.0) *
                        std::polar(1.0, -2.0 * M_PI * k * n0 / 4.0);
            CHECK(std::abs(d(k * 8 + l) - expect) <= 1e-12);
        }
}

TEST_CASE("sfft H isfft is diagonal with the computed eigenvalues") {
    Rng rng(14);
    GridDims dims{4, 3};
    const int sz = dims.size();
    BlockCirculant bc{dims, CVec::Zero(sz)};
    // A handful of random taps.
    for (int t = 0; t < 4; ++t) {
        int idx = static_cast<int>(rng.uniform() * sz) % sz;
        bc.first_column(idx) += rng.cgaussian();
    }
    CMat H = bc.materialize();
    CMat fm = dft_matrix(4), fn = dft_matrix(3);
    CMat S = kron(fn, fm.adjoint());
    CMat D = S * H * S.adjoint();
    CVec d = bc.tf_eigenvalues();
    for (int i = 0; i < sz; ++i)
        for (int j = 0; j < sz; ++j) {
            Cd expect = (i == j) ? d(i) : Cd(0.0, 0.0);
            CHECK(std::abs(D(i, j) - expect) <= 1e-12);
        }
}

TEST_CASE("equalizer inverts the channel end to end") {
    Rng rng(15);
    GridDims dims{8, 4};
    BlockCirculant bc{dims, CVec::Zero(dims.size())};
    bc.first_column(0) = Cd(1.0, 0.2);  // keep the channel well conditioned
    bc.first_column(1 * dims.num_delay + 1) = Cd(0.3, -0.1);
    CMat H = bc.materialize();
    CVec x = random_cvec(rng, dims.size());
    CVec received = H * isfft(dims, x);  // raw time-domain frame
    CVec xhat = equalize(dims, bc.tf_eigenvalues(), received);
    CHECK((xhat - x).norm() <= 1e-11);
}

TEST_CASE("near-singular eigenvalues are refused") {
    GridDims dims{4, 4};
    BlockCirculant bc{dims, CVec::Zero(dims.size())};
    bc.first_column(0) = Cd(1.0, 0.0);
    bc.first_column(0) += Cd(-1.0, 0.0);  // channel identically zero
    CVec y = CVec::Ones(dims.size());
    CHECK_THROWS_AS(equalize(dims, bc.tf_eigenvalues(), y), NearSingularEqualizer);
}

TEST_CASE("materialize refuses large grids") {
    GridDims dims{32, 32};
    BlockCirculant bc{dims, CVec::Zero(dims.size())};
    CHECK_THROWS_AS(bc.materialize(), std::invalid_argument);
}

TEST_CASE("shape mismatches are rejected") {
    GridDims dims{4, 4};
    CVec wrong = CVec::Zero(5);
    CHECK_THROWS_AS(isfft(dims, wrong), std::invalid_argument);
    CHECK_THROWS_AS(sfft(dims, wrong), std::invalid_argument);
}
