#pragma once

// Two-path multi-antenna channels on the delay-Doppler grid: tap sampling,
// the per-symbol effective channel vectors every beamformer design consumes,
// and bounded-norm CSI-error injection for the high-mobility user.

#include <complex>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "otfsbf/otfs.hpp"
#include "otfsbf/rng.hpp"

namespace otfsbf {

// Grid geometry, antenna count and tap layout for one downlink cell: one
// high-mobility user served over the whole frame plus num_delay quasi-static
// users multiplexed along the delay axis. Taps are (doppler, delay) index
// pairs; gains are drawn i.i.d. circularly-symmetric complex Gaussian with
// the given per-tap variance, independently per user and antenna.
struct ChannelConfig {
    int num_doppler = 8;  // N
    int num_delay = 8;    // M, also the number of quasi-static users
    int num_antennas = 4; // V

    // Radio bookkeeping, documentation only; enters no computation.
    double subcarrier_spacing_hz = 2000.0;
    double carrier_frequency_hz = 4.0e9;

    std::vector<std::pair<int, int>> mobile_taps = {{0, 0}, {1, 1}};
    std::vector<std::pair<int, int>> stationary_taps = {{0, 0}, {0, 1}};
    double tap_variance = 0.5;

    std::uint64_t seed = 0;

    GridDims dims() const { return GridDims{num_delay, num_doppler}; }

    // Throws std::invalid_argument on bad dimensions, out-of-range tap
    // indices, or a stationary tap with a nonzero Doppler index.
    void validate() const;
};

struct Tap {
    int doppler = 0;
    int delay = 0;
    std::complex<double> gain;
};

// One trial's realization: taps[user][antenna] lists that link's taps.
// User 0 is the high-mobility user; users 1..M are the quasi-static ones.
struct ChannelTapSet {
    GridDims dims;
    int num_antennas = 0;
    std::vector<std::vector<std::vector<Tap>>> taps;

    int num_stationary_users() const { return static_cast<int>(taps.size()) - 1; }

    // Dense first column of the block-circulant channel matrix for one link.
    CVec first_column(int user, int antenna) const;
};

// Per-symbol effective channels: for the high-mobility user a V-vector per
// grid point (true value g and estimate g_hat, with ||g - g_hat|| <= sigma),
// and for each quasi-static user a V-vector per delay bin (known exactly;
// their channels carry no Doppler, so the Doppler index is irrelevant).
struct EffectiveChannel {
    GridDims dims;
    int num_antennas = 0;
    double sigma = 0.0;

    std::vector<CVec> g;      // flat index k * num_delay + l
    std::vector<CVec> g_hat;  // same layout
    std::vector<std::vector<CVec>> h;  // h[i-1][l] for user i in 1..M

    int num_stationary_users() const { return static_cast<int>(h.size()); }

    const CVec& g_at(int k, int l) const { return g[k * dims.num_delay + l]; }
    const CVec& g_hat_at(int k, int l) const { return g_hat[k * dims.num_delay + l]; }
    // User index is 1-based (user 0 is the high-mobility user).
    const CVec& h_at(int user, int l) const { return h[user - 1][l]; }
};

// Draws one tap set: every configured (user, antenna) link gets the
// configured tap locations with fresh gains. Deterministic under the rng.
ChannelTapSet sample_taps(const ChannelConfig& cfg, Rng& rng);

// Builds the effective channel vectors from the taps' delay-Doppler
// eigenvalues. The estimate starts exact: g_hat = g, sigma = 0.
EffectiveChannel effective_channels(const ChannelTapSet& taps);

// Returns a copy with g_hat = g - e, e drawn uniformly in the closed complex
// V-ball of the given radius, independently per grid point; h is unchanged.
// Throws std::invalid_argument on negative radius.
EffectiveChannel apply_csi_error(const EffectiveChannel& ch, double sigma, Rng& rng);

// JSON documents with complex numbers rendered as [re, im] pairs.
std::string tap_set_to_json(const ChannelTapSet& taps);
std::string effective_channel_to_json(const EffectiveChannel& ch);

}  // namespace otfsbf
