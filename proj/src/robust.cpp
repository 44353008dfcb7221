#include "otfsbf/robust.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "otfsbf/errors.hpp"
#include "otfsbf/rng.hpp"

namespace otfsbf {

namespace {

constexpr double kNullTol = 1e-12;     // absolute tolerance of the nulling test
constexpr double kFeasSlack = 1e-6;    // relative slack of constraint checks

}  // namespace

WorstCaseResult worst_case_power(const Beamformer& w, const CVec& g_hat,
                                 double sigma) {
    if (sigma < 0.0) throw std::invalid_argument("error radius must be nonnegative");
    if (w.size() != g_hat.size())
        throw std::invalid_argument("beamformer and channel sizes differ");
    const double wn2 = w.w.squaredNorm();
    if (wn2 == 0.0) throw ZeroBeamformer("worst-case power needs a nonzero beamformer");

    WorstCaseResult r;
    r.e_star = CVec::Zero(g_hat.size());
    const std::complex<double> c = w.w.dot(g_hat);  // w^H g_hat
    const double cabs = std::abs(c);
    const double wn = std::sqrt(wn2);

    if (sigma == 0.0) {
        // Keep this path expression-identical to the plain constraint
        // evaluation so both agree bit for bit.
        r.psi = beamformed_power(w.w, g_hat);
        r.nulled = cabs <= kNullTol;
        if (r.nulled) r.psi = 0.0;
        return r;
    }

    if (cabs <= sigma * wn + kNullTol) {
        // The ball reaches the nulling error: the worst case is zero power.
        r.nulled = true;
        r.psi = 0.0;
        r.e_star = -(w.w * (c / wn2));
        const double en = r.e_star.norm();
        if (en > sigma) r.e_star *= sigma / en;  // stay inside the ball
        return r;
    }

    // Interior-of-cone case: the minimum sits on the sphere ||e|| = sigma,
    // where the multiplier and minimizer have closed forms.
    const double margin = cabs - sigma * wn;
    r.psi = margin * margin;
    r.lambda = wn * cabs / sigma - wn2;
    r.e_star = -(w.w * (c * (sigma / (wn * cabs))));
    return r;
}

SicReport check_sic_constraints(const Beamformer& w, const EffectiveChannel& ch,
                                const ProblemParams& p, SicMode mode) {
    if (ch.dims.num_delay != p.M || ch.dims.num_doppler != p.N ||
        ch.num_antennas != p.V || w.size() != p.V)
        throw std::invalid_argument("channel does not match problem parameters");
    const Thresholds th = thresholds(p);

    SicReport rep;
    rep.grid_budget = th.eps;
    rep.user_budget = th.eps1;
    rep.beam_norm_sq = w.w.squaredNorm();
    rep.norm_ok = rep.beam_norm_sq <= 1.0 + kFeasSlack;

    const bool robust_mode = mode == SicMode::worst_case;
    const double sigma = robust_mode ? p.sigma : 0.0;
    const std::vector<CVec>& grid = robust_mode ? ch.g_hat : ch.g;

    double sum = 0.0;
    for (const CVec& d : grid) {
        const WorstCaseResult wc = worst_case_power(w, d, sigma);
        if (wc.nulled) rep.any_nulled = true;
        sum += wc.psi == 0.0 ? std::numeric_limits<double>::infinity()
                             : 1.0 / wc.psi;
    }
    rep.grid_sum = sum;
    rep.grid_ok = !rep.any_nulled && sum <= th.eps * (1.0 + kFeasSlack);

    rep.users_ok = true;
    rep.user_sums.reserve(p.M);
    for (int i = 1; i <= p.M; ++i) {
        const double s = inverse_power_sum(w.w, ch.h[i - 1]);
        rep.user_sums.push_back(s);
        if (!(s <= th.eps1 * (1.0 + kFeasSlack))) rep.users_ok = false;
    }

    rep.feasible = rep.grid_ok && rep.users_ok && rep.norm_ok;
    return rep;
}

std::string sic_report_to_json(const SicReport& r) {
    nlohmann::json j;
    j["feasible"] = r.feasible;
    j["any_nulled"] = r.any_nulled;
    j["grid_sum"] = r.grid_sum;
    j["grid_budget"] = r.grid_budget;
    j["grid_ok"] = r.grid_ok;
    j["user_sums"] = r.user_sums;
    j["user_budget"] = r.user_budget;
    j["users_ok"] = r.users_ok;
    j["beam_norm_sq"] = r.beam_norm_sq;
    j["norm_ok"] = r.norm_ok;
    return j.dump();
}

bool lemma1_equivalence_check(const Beamformer& w, const CVec& g_hat,
                              double sigma, int num_samples,
                              unsigned long long seed) {
    const WorstCaseResult wc = worst_case_power(w, g_hat, sigma);
    if (sigma == 0.0) return wc.psi == beamformed_power(w.w, g_hat) || wc.nulled;

    const int V = static_cast<int>(g_hat.size());
    Rng rng(seed);
    double best = std::numeric_limits<double>::infinity();
    CVec best_e = CVec::Zero(V);
    for (int s = 0; s < num_samples; ++s) {
        // The minimum over the ball sits on the sphere unless the gain can be
        // nulled, so boundary samples cover both cases once polished.
        CVec e = rng.cgaussian_vector(V);
        e *= sigma / e.norm();
        const double val = beamformed_power(w.w, g_hat + e);
        if (val < best) {
            best = val;
            best_e = e;
        }
    }
    // Projected-gradient polish with the exact minimizing step of the scalar
    // objective |w^H g_hat + w^H e|^2.
    const double wn2 = w.w.squaredNorm();
    CVec e = best_e;
    for (int it = 0; it < 50; ++it) {
        const std::complex<double> scalar = w.w.dot(g_hat) + w.w.dot(e);
        e -= w.w * (scalar / wn2);
        const double en = e.norm();
        if (en > sigma) e *= sigma / en;
        best = std::min(best, beamformed_power(w.w, g_hat + e));
    }

    if (wc.nulled) return best < 1e-12;  // empirical inverse power beyond 1e12
    const double scale = std::max(wc.psi, 1e-300);
    return std::abs(best - wc.psi) <= 0.01 * scale;
}

}  // namespace otfsbf
