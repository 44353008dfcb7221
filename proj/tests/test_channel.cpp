#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include <json.hpp>

#include "otfsbf/channel.hpp"
#include "otfsbf/otfs.hpp"
#include "otfsbf/rng.hpp"

using namespace otfsbf;
using Cd = std::complex<double>;

TEST_CASE("sampling is deterministic under a fixed seed") {
    ChannelConfig cfg;
    cfg.num_doppler = 4;
    cfg.num_delay = 4;
    cfg.num_antennas = 2;
    Rng a(123), b(123);
    ChannelTapSet ta = sample_taps(cfg, a), tb = sample_taps(cfg, b);
    REQUIRE(ta.taps.size() == tb.taps.size());
    for (size_t u = 0; u < ta.taps.size(); ++u)
        for (int v = 0; v < cfg.num_antennas; ++v)
            for (size_t t = 0; t < ta.taps[u][v].size(); ++t) {
                CHECK(ta.taps[u][v][t].gain == tb.taps[u][v][t].gain);
                CHECK(ta.taps[u][v][t].doppler == tb.taps[u][v][t].doppler);
                CHECK(ta.taps[u][v][t].delay == tb.taps[u][v][t].delay);
            }
}

TEST_CASE("tap layout: mobile user on the diagonal pair, stationary users Doppler-free") {
    ChannelConfig cfg;
    Rng rng(5);
    ChannelTapSet ts = sample_taps(cfg, rng);
    REQUIRE(ts.num_stationary_users() == cfg.num_delay);
    for (int v = 0; v < cfg.num_antennas; ++v) {
        REQUIRE(ts.taps[0][v].size() == 2);
        CHECK(ts.taps[0][v][0].doppler == 0);
        CHECK(ts.taps[0][v][0].delay == 0);
        CHECK(ts.taps[0][v][1].doppler == 1);
        CHECK(ts.taps[0][v][1].delay == 1);
    }
    for (int u = 1; u <= ts.num_stationary_users(); ++u)
        for (int v = 0; v < cfg.num_antennas; ++v) {
            REQUIRE(ts.taps[u][v].size() == 2);
            CHECK(ts.taps[u][v][0].doppler == 0);
            CHECK(ts.taps[u][v][1].doppler == 0);
            CHECK(ts.taps[u][v][0].delay == 0);
            CHECK(ts.taps[u][v][1].delay == 1);
        }
}

TEST_CASE("tap gains have the configured variance") {
    ChannelConfig cfg;
    cfg.num_doppler = 2;
    cfg.num_delay = 2;
    cfg.num_antennas = 4;
    Rng rng(77);
    double sum = 0.0;
    long count = 0;
    while (count < 100000) {
        ChannelTapSet ts = sample_taps(cfg, rng);
        for (const auto& per_user : ts.taps)
            for (const auto& per_antenna : per_user)
                for (const Tap& t : per_antenna) {
                    sum += std::norm(t.gain);
                    ++count;
                }
    }
    double mean = sum / static_cast<double>(count);
    CHECK(mean >= 0.48);
    CHECK(mean <= 0.52);
}

TEST_CASE("effective channels match the two-path closed forms") {
    ChannelConfig cfg;
    cfg.num_doppler = 4;
    cfg.num_delay = 8;
    cfg.num_antennas = 3;
    Rng rng(9);
    ChannelTapSet ts = sample_taps(cfg, rng);
    EffectiveChannel ch = effective_channels(ts);
    const int M = cfg.num_delay, N = cfg.num_doppler;

    for (int k = 0; k < N; ++k)
        for (int l = 0; l < M; ++l)
            for (int v = 0; v < cfg.num_antennas; ++v) {
                Cd h1 = ts.taps[0][v][0].gain, h2 = ts.taps[0][v][1].gain;
                Cd expect = h1 + h2 * std::polar(1.0, 2.0 * M_PI * l / M) *
                                     std::polar(1.0, -2.0 * M_PI * k / N);
                CHECK(std::abs(ch.g_at(k, l)(v) - expect) <= 1e-12);
            }

    for (int u = 1; u <= ch.num_stationary_users(); ++u)
        for (int l = 0; l < M; ++l)
            for (int v = 0; v < cfg.num_antennas; ++v) {
                Cd h1 = ts.taps[u][v][0].gain, h2 = ts.taps[u][v][1].gain;
                Cd expect = h1 + h2 * std::polar(1.0, 2.0 * M_PI * l / M);
                CHECK(std::abs(ch.h_at(u, l)(v) - expect) <= 1e-12);
            }
}

TEST_CASE("stationary channels are Doppler-invariant over the whole grid") {
    ChannelConfig cfg;
    cfg.num_doppler = 8;
    cfg.num_delay = 4;
    cfg.num_antennas = 2;
    Rng rng(31);
    ChannelTapSet ts = sample_taps(cfg, rng);
    EffectiveChannel ch = effective_channels(ts);
    for (int u = 1; u <= ch.num_stationary_users(); ++u)
        for (int v = 0; v < cfg.num_antennas; ++v) {
            BlockCirculant bc{ts.dims, ts.first_column(u, v)};
            CVec eig = bc.tf_eigenvalues();
            for (int k = 0; k < cfg.num_doppler; ++k)
                for (int l = 0; l < cfg.num_delay; ++l)
                    CHECK(std::abs(eig(k * cfg.num_delay + l) - ch.h_at(u, l)(v)) <= 1e-12);
        }
}

TEST_CASE("a single unit DC tap yields all-ones effective channels") {
    ChannelConfig cfg;
    cfg.num_doppler = 4;
    cfg.num_delay = 4;
    cfg.num_antennas = 2;
    cfg.mobile_taps = {{0, 0}};
    cfg.stationary_taps = {{0, 0}};
    Rng rng(1);
    ChannelTapSet ts = sample_taps(cfg, rng);
    // Force unit gains.
    for (auto& per_user : ts.taps)
        for (auto& per_antenna : per_user)
            for (Tap& t : per_antenna) t.gain = Cd(1.0, 0.0);
    EffectiveChannel ch = effective_channels(ts);
    for (int u = 1; u <= ch.num_stationary_users(); ++u)
        for (int l = 0; l < cfg.num_delay; ++l)
            for (int v = 0; v < cfg.num_antennas; ++v)
                CHECK(std::abs(ch.h_at(u, l)(v) - Cd(1.0, 0.0)) <= 1e-13);
    for (int idx = 0; idx < ts.dims.size(); ++idx)
        for (int v = 0; v < cfg.num_antennas; ++v)
            CHECK(std::abs(ch.g[idx](v) - Cd(1.0, 0.0)) <= 1e-13);
}

TEST_CASE("csi error stays inside the ball and has the uniform-ball moment") {
    ChannelConfig cfg;
    cfg.num_doppler = 2;
    cfg.num_delay = 2;
    cfg.num_antennas = 4;
    Rng rng(55);
    EffectiveChannel base = effective_channels(sample_taps(cfg, rng));

    SUBCASE("zero radius is exact") {
        EffectiveChannel ch = apply_csi_error(base, 0.0, rng);
        for (size_t i = 0; i < ch.g.size(); ++i) CHECK(ch.g_hat[i] == ch.g[i]);
        CHECK(ch.sigma == 0.0);
    }

    SUBCASE("radius bound and second moment") {
        const double sigma = 0.1;
        double sum_ratio = 0.0;
        int count = 0;
        double max_err = 0.0;
        for (int rep = 0; rep < 2500; ++rep) {  // 2500 trials x 4 grid points = 1e4 draws
            EffectiveChannel ch = apply_csi_error(base, sigma, rng);
            CHECK(ch.sigma == sigma);
            for (size_t i = 0; i < ch.g.size(); ++i) {
                double err = (ch.g[i] - ch.g_hat[i]).norm();
                max_err = std::max(max_err, err);
                sum_ratio += err * err / (sigma * sigma);
                ++count;
            }
            // h untouched
            for (size_t u = 0; u < ch.h.size(); ++u)
                for (size_t l = 0; l < ch.h[u].size(); ++l)
                    CHECK(ch.h[u][l] == base.h[u][l]);
        }
        CHECK(max_err <= sigma + 1e-15);
        // E||e||^2 = sigma^2 d/(d+2) for the uniform d-ball, d = 2V = 8.
        double mean_ratio = sum_ratio / count;
        CHECK(mean_ratio >= 0.78);
        CHECK(mean_ratio <= 0.82);
    }
}

TEST_CASE("config validation rejects bad layouts") {
    ChannelConfig cfg;
    cfg.stationary_taps = {{1, 0}};  // Doppler shift on a stationary user
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    ChannelConfig cfg2;
    cfg2.mobile_taps = {{0, 99}};  // outside grid
    CHECK_THROWS_AS(cfg2.validate(), std::invalid_argument);
    ChannelConfig cfg3;
    Rng rng(2);
    CHECK_THROWS_AS(apply_csi_error(effective_channels(sample_taps(cfg3, rng)), -0.1, rng),
                    std::invalid_argument);
}

TEST_CASE("json serialization renders complex numbers as [re, im]") {
    ChannelConfig cfg;
    cfg.num_doppler = 2;
    cfg.num_delay = 2;
    cfg.num_antennas = 2;
    Rng rng(3);
    ChannelTapSet ts = sample_taps(cfg, rng);
    EffectiveChannel ch = apply_csi_error(effective_channels(ts), 0.05, rng);

    auto jt = nlohmann::json::parse(tap_set_to_json(ts));
    CHECK(jt["num_antennas"] == 2);
    auto gain = jt["taps"][0][0][0]["gain"];
    REQUIRE(gain.is_array());
    REQUIRE(gain.size() == 2);
    CHECK(gain[0].get<double>() == ts.taps[0][0][0].gain.real());
    CHECK(gain[1].get<double>() == ts.taps[0][0][0].gain.imag());

    auto jc = nlohmann::json::parse(effective_channel_to_json(ch));
    CHECK(jc["sigma"].get<double>() == 0.05);
    auto g00 = jc["g"][0][0];
    REQUIRE(g00.is_array());
    CHECK(g00[0].get<double>() == ch.g[0](0).real());
    CHECK(g00[1].get<double>() == ch.g[0](0).imag());
    CHECK(jc["h"].size() == static_cast<size_t>(ch.num_stationary_users()));
}
