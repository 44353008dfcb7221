#include "otfsbf/rates.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "otfsbf/errors.hpp"
#include "otfsbf/robust.hpp"

namespace otfsbf {

namespace {

void check_compatible(const Beamformer& w, const EffectiveChannel& ch,
                      const ProblemParams& p) {
    p.validate();
    if (ch.dims.num_delay != p.M || ch.dims.num_doppler != p.N)
        throw std::invalid_argument("channel grid does not match problem parameters");
    if (ch.num_antennas != p.V || w.size() != p.V)
        throw std::invalid_argument("antenna counts do not match problem parameters");
}

}  // namespace

void ProblemParams::validate() const {
    if (M <= 0 || N <= 0 || V <= 0)
        throw std::invalid_argument("problem dimensions must be positive");
    if (!(rho > 0.0)) throw std::invalid_argument("transmit SNR must be positive");
    if (!(R0 > 0.0)) throw std::invalid_argument("target rate must be positive");
    if (sigma < 0.0) throw std::invalid_argument("CSI-error radius must be nonnegative");
}

Thresholds thresholds(const ProblemParams& p) {
    p.validate();
    if (p.R0 >= 1.0)
        throw InfeasibleTarget(
            "target rate must be below 1 bit per channel use: the high-mobility "
            "SINR is structurally below one");
    Thresholds t;
    t.eta = std::exp2(p.R0) - 1.0;
    t.eps1 = p.rho * static_cast<double>(p.M) * (1.0 / t.eta - 1.0);
    t.eps = static_cast<double>(p.N) * t.eps1;  // keeps eps == N * eps1 exact
    return t;
}

Beamformer::Beamformer(CVec coeffs) : w(std::move(coeffs)) {
    if (w.size() == 0) throw std::invalid_argument("beamformer must be non-empty");
    if (w.squaredNorm() > 1.0 + 1e-9)
        throw std::invalid_argument("beamformer exceeds the unit norm ball");
}

double inverse_power_sum(const CVec& w, const std::vector<CVec>& grid) {
    double sum = 0.0;
    for (const CVec& d : grid) {
        const double p = beamformed_power(w, d);
        if (p == 0.0) return std::numeric_limits<double>::infinity();
        sum += 1.0 / p;
    }
    return sum;
}

double sinr_high_mobility(const Beamformer& w, const EffectiveChannel& ch,
                          const ProblemParams& p, int user) {
    check_compatible(w, ch, p);
    if (user < 0 || user > p.M) throw std::out_of_range("user index out of range");
    double mean_inverse;
    if (user == 0) {
        mean_inverse =
            inverse_power_sum(w.w, ch.g) / static_cast<double>(p.N * p.M);
    } else {
        // A stationary user's grid repeats its delay profile across every
        // Doppler bin, so the full-grid average collapses to a delay average.
        mean_inverse =
            inverse_power_sum(w.w, ch.h[user - 1]) / static_cast<double>(p.M);
    }
    if (std::isinf(mean_inverse)) return 0.0;
    return p.rho / (p.rho + mean_inverse);
}

double snr_noma(const Beamformer& w, const EffectiveChannel& ch,
                const ProblemParams& p, int user) {
    check_compatible(w, ch, p);
    if (user < 1 || user > p.M) throw std::out_of_range("user index out of range");
    return p.rho * beamformed_power(w.w, ch.h_at(user, user - 1));
}

MinRateResult min_rate(const Beamformer& w, const EffectiveChannel& ch,
                       const ProblemParams& p) {
    check_compatible(w, ch, p);
    MinRateResult r;
    r.per_user.reserve(p.M);
    double lowest = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= p.M; ++i) {
        const double rate = std::log2(1.0 + snr_noma(w, ch, p, i));
        r.per_user.push_back(rate);
        lowest = std::min(lowest, rate);
    }
    r.sic_feasible =
        check_sic_constraints(w, ch, p, SicMode::true_channel).feasible;
    r.min_rate = r.sic_feasible ? lowest : 0.0;
    return r;
}

}  // namespace otfsbf
