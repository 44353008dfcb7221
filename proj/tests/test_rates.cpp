#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "otfsbf/channel.hpp"
#include "otfsbf/errors.hpp"
#include "otfsbf/otfs.hpp"
#include "otfsbf/rates.hpp"
#include "otfsbf/rng.hpp"

using namespace otfsbf;
using Cd = std::complex<double>;

namespace {

// Channel whose taps are forced to fixed gains so closed forms are exact.
EffectiveChannel forced_channel(int N, int M, int V, Cd mobile_gain0, Cd mobile_gain1) {
    ChannelConfig cfg;
    cfg.num_doppler = N;
    cfg.num_delay = M;
    cfg.num_antennas = V;
    Rng rng(99);
    ChannelTapSet ts = sample_taps(cfg, rng);
    for (auto& per_user : ts.taps)
        for (auto& per_antenna : per_user) {
            per_antenna[0].gain = mobile_gain0;
            per_antenna[1].gain = mobile_gain1;
        }
    return effective_channels(ts);
}

EffectiveChannel random_channel(int N, int M, int V, unsigned long long seed) {
    ChannelConfig cfg;
    cfg.num_doppler = N;
    cfg.num_delay = M;
    cfg.num_antennas = V;
    Rng rng(seed);
    return effective_channels(sample_taps(cfg, rng));
}

Beamformer random_beam(int V, Rng& rng) {
    CVec w = rng.cgaussian_vector(V);
    w /= w.norm();
    return Beamformer(w);
}

}  // namespace

TEST_CASE("thresholds match hand-computed values and keep the product identity") {
    ProblemParams p;
    p.M = 8;
    p.N = 8;
    p.rho = 1.0;
    p.R0 = 0.5;
    Thresholds t = thresholds(p);
    CHECK(t.eta == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-15));
    CHECK(t.eps1 == doctest::Approx(8.0 * std::sqrt(2.0)).epsilon(1e-14));
    CHECK(t.eps == doctest::Approx(64.0 * std::sqrt(2.0)).epsilon(1e-14));
    CHECK(t.eps == 8.0 * t.eps1);  // exact: eps is computed as N * eps1

    p.R0 = 1.0;
    CHECK_THROWS_AS(thresholds(p), InfeasibleTarget);
    p.R0 = 1.5;
    CHECK_THROWS_AS(thresholds(p), InfeasibleTarget);
    p.R0 = 0.0;
    CHECK_THROWS_AS(thresholds(p), std::invalid_argument);
    p.R0 = 0.5;
    p.rho = 0.0;
    CHECK_THROWS_AS(thresholds(p), std::invalid_argument);
}

TEST_CASE("beamformer type enforces the unit norm ball") {
    CVec w(2);
    w << Cd(0.6, 0.0), Cd(0.0, 0.8);
    CHECK_NOTHROW(Beamformer(w));
    CHECK_NOTHROW(Beamformer(CVec(w * (1.0 + 4e-10))));
    CHECK_THROWS_AS(Beamformer(CVec(w * 1.01)), std::invalid_argument);
    CHECK_THROWS_AS(Beamformer(CVec(0)), std::invalid_argument);
}

TEST_CASE("unit-gain channel gives the textbook SINR and SNR values") {
    const int N = 2, M = 2;
    EffectiveChannel ch = forced_channel(N, M, 1, Cd(1, 0), Cd(0, 0));
    // With the second tap zeroed, every effective gain is exactly 1.
    ProblemParams p;
    p.M = M;
    p.N = N;
    p.V = 1;
    p.rho = 3.0;
    CVec w1(1);
    w1 << Cd(1, 0);
    Beamformer w(w1);
    for (int i = 0; i <= M; ++i)
        CHECK(sinr_high_mobility(w, ch, p, i) == doctest::Approx(3.0 / 4.0).epsilon(1e-15));
    for (int i = 1; i <= M; ++i)
        CHECK(snr_noma(w, ch, p, i) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(sinr_high_mobility(w, ch, p, 0) < 1.0);

    MinRateResult mr = min_rate(w, ch, p);
    CHECK(mr.sic_feasible);
    CHECK(mr.min_rate == doctest::Approx(2.0).epsilon(1e-15));
    for (double r : mr.per_user) CHECK(r == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("two-tap single-antenna instance matches a direct evaluation") {
    const int N = 2, M = 2;
    EffectiveChannel ch = forced_channel(N, M, 1, Cd(1, 0), Cd(0.5, 0));
    ProblemParams p;
    p.M = M;
    p.N = N;
    p.V = 1;
    p.rho = 1.0;
    CVec w1(1);
    w1 << Cd(1, 0);
    Beamformer w(w1);

    // Direct evaluation: enumerate the four grid gains of the mobile user.
    double sum = 0.0;
    for (int k = 0; k < N; ++k)
        for (int l = 0; l < M; ++l) {
            Cd d = Cd(1, 0) + 0.5 * std::polar(1.0, 2.0 * M_PI * l / M) *
                                  std::polar(1.0, -2.0 * M_PI * k / N);
            sum += 1.0 / std::norm(d);
        }
    const double expect = 1.0 / (1.0 + sum / (N * M));
    CHECK(sinr_high_mobility(w, ch, p, 0) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(expect == doctest::Approx(9.0 / 29.0).epsilon(1e-12));
}

TEST_CASE("a beam orthogonal to every gain yields zero SINR and zero rates") {
    const int N = 2, M = 2, V = 2;
    EffectiveChannel ch = forced_channel(N, M, V, Cd(1, 0), Cd(0, 0));
    ProblemParams p;
    p.M = M;
    p.N = N;
    p.V = V;
    CVec wv(2);
    wv << Cd(M_SQRT1_2, 0), Cd(-M_SQRT1_2, 0);
    Beamformer w(wv);  // identical per-antenna gains cancel exactly
    CHECK(sinr_high_mobility(w, ch, p, 0) == 0.0);
    CHECK(snr_noma(w, ch, p, 1) == 0.0);
    MinRateResult mr = min_rate(w, ch, p);
    CHECK(mr.min_rate == 0.0);
    CHECK_FALSE(mr.sic_feasible);
}

TEST_CASE("per-symbol post-equalization SINRs are identical and match the formula") {
    const int N = 2, M = 2, V = 2;
    ProblemParams p;
    p.M = M;
    p.N = N;
    p.V = V;
    p.rho = 2.5;
    GridDims dims{M, N};
    Rng rng(2024);

    // Dense forward transform, column by column.
    CMat S(dims.size(), dims.size());
    for (int j = 0; j < dims.size(); ++j) {
        CVec e = CVec::Zero(dims.size());
        e(j) = 1.0;
        S.col(j) = sfft(dims, e);
    }

    for (int rep = 0; rep < 5; ++rep) {
        ChannelConfig cfg;
        cfg.num_doppler = N;
        cfg.num_delay = M;
        cfg.num_antennas = V;
        ChannelTapSet ts = sample_taps(cfg, rng);
        EffectiveChannel ch = effective_channels(ts);
        Beamformer w = random_beam(V, rng);

        for (int user = 0; user <= M; ++user) {
            // Beam-combined channel of the observing user.
            CVec fc = CVec::Zero(dims.size());
            for (int v = 0; v < V; ++v)
                fc += std::conj(w.w(v)) * ts.first_column(user, v);
            BlockCirculant bc{dims, fc};
            CMat H = bc.materialize();
            CVec d = bc.tf_eigenvalues();

            // Detection chain: diagonalize, invert per bin, transform back.
            CMat A = S.adjoint() * d.cwiseInverse().asDiagonal() * S;
            CMat T = A * H;
            CMat C = A * A.adjoint();

            const double sinr = sinr_high_mobility(w, ch, p, user);
            for (int j = 0; j < dims.size(); ++j) {
                const double signal = p.rho * std::norm(T(j, j));
                const double interference = p.rho * T.row(j).squaredNorm();
                const double noise = C(j, j).real();
                const double per_symbol = signal / (interference + noise);
                CHECK(per_symbol == doctest::Approx(sinr).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("rate threshold and inverse-power budget agree at the boundary") {
    Rng rng(7);
    for (int rep = 0; rep < 20; ++rep) {
        const int N = 4, M = 4, V = 3;
        EffectiveChannel ch = random_channel(N, M, V, 1000 + rep);
        Beamformer w = random_beam(V, rng);
        ProblemParams p;
        p.M = M;
        p.N = N;
        p.V = V;
        p.R0 = 0.4;

        const double eta = std::exp2(p.R0) - 1.0;
        const double grid_sum = inverse_power_sum(w.w, ch.g);
        // rho placing the budget exactly at the boundary eps == grid_sum.
        const double rho_star = grid_sum / (N * M * (1.0 / eta - 1.0));
        for (double f : {1.0 - 1e-6, 1.0 + 1e-6}) {
            p.rho = rho_star * f;
            Thresholds t = thresholds(p);
            const bool rate_ok =
                std::log2(1.0 + sinr_high_mobility(w, ch, p, 0)) >= p.R0;
            const bool budget_ok = grid_sum <= t.eps;
            CHECK(rate_ok == budget_ok);
            CHECK(budget_ok == (f > 1.0));
        }

        // Per-user version against eps1.
        for (int i = 1; i <= M; ++i) {
            const double user_sum = inverse_power_sum(w.w, ch.h[i - 1]);
            const double rho_i = user_sum / (M * (1.0 / eta - 1.0));
            for (double f : {1.0 - 1e-6, 1.0 + 1e-6}) {
                p.rho = rho_i * f;
                Thresholds t = thresholds(p);
                const bool rate_ok =
                    std::log2(1.0 + sinr_high_mobility(w, ch, p, i)) >= p.R0;
                const bool budget_ok = user_sum <= t.eps1;
                CHECK(rate_ok == budget_ok);
                CHECK(budget_ok == (f > 1.0));
            }
        }
    }
}

TEST_CASE("sinr grows with transmit power and post-SIC snr is linear in it") {
    EffectiveChannel ch = random_channel(4, 4, 3, 42);
    Rng rng(8);
    Beamformer w = random_beam(3, rng);
    ProblemParams p;
    p.M = 4;
    p.N = 4;
    p.V = 3;

    double prev = -1.0;
    for (double rho : {0.1, 1.0, 10.0, 100.0}) {
        p.rho = rho;
        const double s = sinr_high_mobility(w, ch, p, 0);
        CHECK(s > prev);
        CHECK(s < 1.0);
        prev = s;
    }
    p.rho = 1.0;
    const double base = snr_noma(w, ch, p, 2);
    p.rho = 2.0;
    CHECK(snr_noma(w, ch, p, 2) == 2.0 * base);
    p.rho = 8.0;
    CHECK(snr_noma(w, ch, p, 2) == 8.0 * base);
}

TEST_CASE("min rate reports zero when the SIC check fails but keeps per-user rates") {
    EffectiveChannel ch = random_channel(4, 4, 3, 77);
    Rng rng(9);
    Beamformer w = random_beam(3, rng);
    ProblemParams p;
    p.M = 4;
    p.N = 4;
    p.V = 3;

    p.rho = 1e9;  // generous budget: SIC feasible
    MinRateResult ok = min_rate(w, ch, p);
    CHECK(ok.sic_feasible);
    double lowest = ok.per_user[0];
    for (double r : ok.per_user) lowest = std::min(lowest, r);
    CHECK(ok.min_rate == lowest);
    CHECK(ok.min_rate > 0.0);
    REQUIRE(ok.per_user.size() == 4);
    for (int i = 1; i <= 4; ++i)
        CHECK(ok.per_user[i - 1] ==
              doctest::Approx(std::log2(1.0 + snr_noma(w, ch, p, i))).epsilon(1e-15));

    p.rho = 1e-9;  // starved budget: SIC infeasible, rates still reported
    MinRateResult bad = min_rate(w, ch, p);
    CHECK_FALSE(bad.sic_feasible);
    CHECK(bad.min_rate == 0.0);
    for (double r : bad.per_user) CHECK(r > 0.0);
}

TEST_CASE("mismatched problem parameters are rejected") {
    EffectiveChannel ch = random_channel(4, 4, 3, 5);
    Rng rng(10);
    Beamformer w = random_beam(3, rng);
    ProblemParams p;
    p.M = 4;
    p.N = 4;
    p.V = 2;  // wrong antenna count
    CHECK_THROWS_AS(sinr_high_mobility(w, ch, p, 0), std::invalid_argument);
    p.V = 3;
    p.N = 8;  // wrong grid
    CHECK_THROWS_AS(snr_noma(w, ch, p, 1), std::invalid_argument);
    p.N = 4;
    CHECK_THROWS_AS(snr_noma(w, ch, p, 0), std::out_of_range);
    CHECK_THROWS_AS(snr_noma(w, ch, p, 5), std::out_of_range);
    CHECK_THROWS_AS(sinr_high_mobility(w, ch, p, -1), std::out_of_range);
}
