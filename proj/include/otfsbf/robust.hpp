#pragma once
// Worst-case CSI-error analysis for the high-mobility user's link: the
// closed-form minimum beamformed power over a norm-bounded error ball, the
// successive-interference-cancellation feasibility check built from it, and a
// sampling-based cross-check of the closed form.

#include <string>
#include <vector>

#include "otfsbf/rates.hpp"

namespace otfsbf {

struct WorstCaseResult {
    // Minimum of |w^H (g_hat + e)|^2 over ||e|| <= sigma.
    double psi = 0.0;
    // True when the error ball can drive the beamformed gain to zero
    // (|w^H g_hat| <= sigma * ||w||, within an absolute tolerance of 1e-12).
    bool nulled = false;
    // A minimizing error vector; ||e_star|| <= sigma always holds.
    CVec e_star;
    // Multiplier of the sphere constraint at the minimizer (0 when sigma = 0
    // or the gain is nulled).
    double lambda = 0.0;
};

// Closed-form worst case of the beamformed signal power under a spherical
// CSI-error bound. Throws ZeroBeamformer if w is the zero vector and
// std::invalid_argument if sigma < 0.
WorstCaseResult worst_case_power(const Beamformer& w, const CVec& g_hat,
                                 double sigma);

enum class SicMode {
    worst_case,   // evaluate on channel estimates with the error budget sigma
    true_channel  // evaluate on the true channels with sigma = 0
};

struct SicReport {
    bool feasible = false;
    // Any grid point where the error ball can null the beamformed gain makes
    // the worst-case constraint unsatisfiable.
    bool any_nulled = false;
    double grid_sum = 0.0;    // sum over the grid of 1/psi_{k,l}
    double grid_budget = 0.0; // eps
    bool grid_ok = false;
    std::vector<double> user_sums;  // sum_l |w^H h_{i,l}|^-2 for i = 1..M
    double user_budget = 0.0;       // eps1
    bool users_ok = false;
    double beam_norm_sq = 0.0;  // ||w||^2, must stay within the unit ball
    bool norm_ok = false;
};

// Checks every constraint required for all users to decode the high-mobility
// user's frame at its target rate: the grid-level worst-case power budget,
// the per-stationary-user budgets, and the beamformer norm. Constraints are
// accepted up to a relative slack of 1e-6. Throws only if thresholds(p) does.
SicReport check_sic_constraints(const Beamformer& w, const EffectiveChannel& ch,
                                const ProblemParams& p, SicMode mode);

std::string sic_report_to_json(const SicReport& r);

// Sampling + local-polish cross-check that the closed-form worst case equals
// the empirical minimum of |w^H (g_hat + e)|^2 over the error ball. For
// non-nulled instances, agreement within 1% relative is required; for nulled
// instances the empirical minimum must collapse toward zero (inverse power
// beyond 1e12). Test support code.
bool lemma1_equivalence_check(const Beamformer& w, const CVec& g_hat,
                              double sigma, int num_samples = 200000,
                              unsigned long long seed = 12345);

}  // namespace otfsbf
