#include "otfsbf/channel.hpp"

#include <stdexcept>

#include <json.hpp>

namespace otfsbf {

namespace {

nlohmann::json complex_json(const std::complex<double>& z) {
    return nlohmann::json::array({z.real(), z.imag()});
}

nlohmann::json cvec_json(const CVec& v) {
    nlohmann::json a = nlohmann::json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(complex_json(v(i)));
    return a;
}

}  // namespace

void ChannelConfig::validate() const {
    if (num_doppler <= 0 || num_delay <= 0 || num_antennas <= 0)
        throw std::invalid_argument("ChannelConfig: dimensions must be positive");
    if (tap_variance <= 0.0)
        throw std::invalid_argument("ChannelConfig: tap variance must be positive");
    auto check_taps = [&](const std::vector<std::pair<int, int>>& t, bool doppler_free,
                          const char* which) {
        if (t.empty())
            throw std::invalid_argument(std::string("ChannelConfig: no taps for ") + which);
        for (auto [k, l] : t) {
            if (k < 0 || k >= num_doppler || l < 0 || l >= num_delay)
                throw std::invalid_argument(std::string("ChannelConfig: tap outside grid for ") +
                                            which);
            if (doppler_free && k != 0)
                throw std::invalid_argument(
                    std::string("ChannelConfig: stationary tap with nonzero Doppler for ") +
                    which);
        }
    };
    check_taps(mobile_taps, false, "the high-mobility user");
    check_taps(stationary_taps, true, "the stationary users");
}

CVec ChannelTapSet::first_column(int user, int antenna) const {
    CVec col = CVec::Zero(dims.size());
    for (const Tap& t : taps.at(user).at(antenna))
        col(t.doppler * dims.num_delay + t.delay) += t.gain;
    return col;
}

ChannelTapSet sample_taps(const ChannelConfig& cfg, Rng& rng) {
    cfg.validate();
    ChannelTapSet out;
    out.dims = cfg.dims();
    out.num_antennas = cfg.num_antennas;
    const int num_users = cfg.num_delay;  // one quasi-static user per delay bin
    out.taps.resize(num_users + 1);
    for (int u = 0; u <= num_users; ++u) {
        const auto& locs = (u == 0) ? cfg.mobile_taps : cfg.stationary_taps;
        out.taps[u].resize(cfg.num_antennas);
        for (int v = 0; v < cfg.num_antennas; ++v) {
            out.taps[u][v].reserve(locs.size());
            for (auto [k, l] : locs)
                out.taps[u][v].push_back(Tap{k, l, rng.cgaussian(cfg.tap_variance)});
        }
    }
    return out;
}

EffectiveChannel effective_channels(const ChannelTapSet& taps) {
    EffectiveChannel ch;
    ch.dims = taps.dims;
    ch.num_antennas = taps.num_antennas;
    ch.sigma = 0.0;
    const int M = taps.dims.num_delay;
    const int sz = taps.dims.size();
    const int users = taps.num_stationary_users();

    ch.g.assign(sz, CVec::Zero(taps.num_antennas));
    for (int v = 0; v < taps.num_antennas; ++v) {
        BlockCirculant bc{taps.dims, taps.first_column(0, v)};
        CVec eig = bc.tf_eigenvalues();
        for (int idx = 0; idx < sz; ++idx) ch.g[idx](v) = eig(idx);
    }
    ch.g_hat = ch.g;

    ch.h.assign(users, std::vector<CVec>(M, CVec::Zero(taps.num_antennas)));
    for (int u = 1; u <= users; ++u) {
        for (int v = 0; v < taps.num_antennas; ++v) {
            BlockCirculant bc{taps.dims, taps.first_column(u, v)};
            CVec eig = bc.tf_eigenvalues();
            for (int l = 0; l < M; ++l) ch.h[u - 1][l](v) = eig(l);  // Doppler row 0
        }
    }
    return ch;
}

EffectiveChannel apply_csi_error(const EffectiveChannel& ch, double sigma, Rng& rng) {
    if (sigma < 0.0) throw std::invalid_argument("apply_csi_error: negative radius");
    EffectiveChannel out = ch;
    out.sigma = sigma;
    if (sigma == 0.0) return out;
    for (size_t idx = 0; idx < out.g.size(); ++idx)
        out.g_hat[idx] = out.g[idx] - rng.ball(out.num_antennas, sigma);
    return out;
}

std::string tap_set_to_json(const ChannelTapSet& taps) {
    nlohmann::json j;
    j["num_delay"] = taps.dims.num_delay;
    j["num_doppler"] = taps.dims.num_doppler;
    j["num_antennas"] = taps.num_antennas;
    nlohmann::json users = nlohmann::json::array();
    for (const auto& per_user : taps.taps) {
        nlohmann::json antennas = nlohmann::json::array();
        for (const auto& per_antenna : per_user) {
            nlohmann::json tl = nlohmann::json::array();
            for (const Tap& t : per_antenna)
                tl.push_back({{"doppler", t.doppler},
                              {"delay", t.delay},
                              {"gain", complex_json(t.gain)}});
            antennas.push_back(tl);
        }
        users.push_back(antennas);
    }
    j["taps"] = users;
    return j.dump();
}

std::string effective_channel_to_json(const EffectiveChannel& ch) {
    nlohmann::json j;
    j["num_delay"] = ch.dims.num_delay;
    j["num_doppler"] = ch.dims.num_doppler;
    j["num_antennas"] = ch.num_antennas;
    j["sigma"] = ch.sigma;
    nlohmann::json g = nlohmann::json::array(), g_hat = nlohmann::json::array();
    for (const CVec& v : ch.g) g.push_back(cvec_json(v));
    for (const CVec& v : ch.g_hat) g_hat.push_back(cvec_json(v));
    j["g"] = g;
    j["g_hat"] = g_hat;
    nlohmann::json h = nlohmann::json::array();
    for (const auto& per_user : ch.h) {
        nlohmann::json rows = nlohmann::json::array();
        for (const CVec& v : per_user) rows.push_back(cvec_json(v));
        h.push_back(rows);
    }
    j["h"] = h;
    return j.dump();
}

}  // namespace otfsbf
