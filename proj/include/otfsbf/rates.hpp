#pragma once
// Rate and SINR expressions for the OTFS-NOMA downlink: the high-mobility
// user's post-equalization SINR, the stationary NOMA users' post-SIC SNRs,
// the decoding thresholds implied by the high-mobility target rate, and the
// minimum-rate metric used to score a beamformer.

#include <complex>
#include <vector>

#include "otfsbf/channel.hpp"

namespace otfsbf {

// All scalar parameters of the beamforming problem.
struct ProblemParams {
    int M = 8;           // delay bins; also the number of low-mobility NOMA users
    int N = 8;           // Doppler bins
    int V = 4;           // transmit antennas
    double rho = 1.0;    // linear transmit SNR
    double R0 = 0.5;     // high-mobility user's target rate, bits per channel use
    double sigma = 0.0;  // CSI-error radius assumed for the high-mobility user

    GridDims dims() const { return GridDims{M, N}; }
    // Throws std::invalid_argument on non-positive dimensions, rho <= 0,
    // R0 <= 0, or sigma < 0.
    void validate() const;
};

// Decoding thresholds implied by the target rate R0.
struct Thresholds {
    double eta;   // SINR threshold 2^R0 - 1
    double eps;   // grid-level inverse-power budget; eps = N * eps1 exactly
    double eps1;  // per-user inverse-power budget rho * M * (1/eta - 1)
};

// Throws InfeasibleTarget when R0 >= 1: the high-mobility user's SINR is
// structurally below one (the superimposed signal has the same power as the
// signal of interest), so no beamformer can reach a one-bit target.
Thresholds thresholds(const ProblemParams& p);

// Beamforming vector constrained to the unit norm ball.
struct Beamformer {
    CVec w;

    Beamformer() = default;
    // Throws std::invalid_argument if ||w||^2 > 1 + 1e-9 or w is empty.
    explicit Beamformer(CVec coeffs);

    int size() const { return static_cast<int>(w.size()); }
};

// Squared beamformed gain |w^H d|^2. Every constraint-evaluation path goes
// through this one helper so that independently written evaluations of the
// same quantity agree bit for bit.
inline double beamformed_power(const CVec& w, const CVec& d) {
    return std::norm(w.dot(d));
}

// Sum of 1/|w^H grid[idx]|^2 accumulated in ascending flat-index order.
// Returns +infinity if any gain is exactly zero.
double inverse_power_sum(const CVec& w, const std::vector<CVec>& grid);

// Post-equalization SINR for decoding the high-mobility user's frame at user
// `i` (0 = the high-mobility user itself, 1..M = stationary users). The
// per-symbol SINRs are identical across the grid and equal
//   rho / (rho + (1/(N*M)) * sum_{k,l} |w^H d_{k,l}|^-2)
// where d is the observing user's effective channel grid. Returns 0 if any
// grid gain is exactly zero (the frame cannot be equalized).
double sinr_high_mobility(const Beamformer& w, const EffectiveChannel& ch,
                          const ProblemParams& p, int user);

// Post-SIC SNR of stationary user i (1 <= i <= M) on its own delay bin i-1:
// rho * |w^H h_{i,i-1}|^2. Throws std::out_of_range for an invalid index.
double snr_noma(const Beamformer& w, const EffectiveChannel& ch,
                const ProblemParams& p, int user);

struct MinRateResult {
    double min_rate = 0.0;         // 0 when the SIC check fails
    std::vector<double> per_user;  // log2(1 + SNR_i), i = 1..M
    bool sic_feasible = false;     // outcome of the true-channel SIC check
};

// Minimum of the stationary users' rates log2(1 + snr_noma(i)). The minimum
// is reported as 0 when the true-channel SIC feasibility check fails, since
// then the high-mobility user's target rate cannot actually be met and the
// SIC-based rates are not achievable. Per-user rates are reported either way.
MinRateResult min_rate(const Beamformer& w, const EffectiveChannel& ch,
                       const ProblemParams& p);

}  // namespace otfsbf
