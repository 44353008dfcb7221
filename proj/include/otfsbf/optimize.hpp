#pragma once
// Beamformer designers: successive convex approximation for the worst-case
// robust problem, semidefinite relaxation with Gaussian randomization for the
// perfect-CSI problem, and the random baseline. The convex subproblems are
// assembled as ConicProblem instances and solved with the bundled solver.

#include <limits>
#include <vector>

#include "otfsbf/conic.hpp"
#include "otfsbf/rates.hpp"
#include "otfsbf/rng.hpp"

namespace otfsbf {

// Gradient of w -> 1/|w^H h|^2 with respect to w. The returned vector folds
// in the conjugate-coordinate pair, so the first-order change along a complex
// direction d is Re{grad^H d}. Throws DegenerateDirection when
// |w^H h| <= deg_tol (the function blows up there).
CVec grad_inv_power(const CVec& w, const CVec& h, double deg_tol = 1e-12);

// Gradient of w -> (|w^H g_hat| - sigma ||w||)^-2, the worst-case inverse
// power under a CSI-error ball of radius sigma. Same directional-derivative
// convention as grad_inv_power, to which it reduces exactly at sigma = 0.
// Throws NulledRegion when |w^H g_hat| <= sigma ||w|| + deg_tol.
CVec grad_robust_power(const CVec& w, const CVec& g_hat, double sigma,
                       double deg_tol = 1e-12);

// Convex subproblem of one SCA step: minimize the epigraph variable t over
// (w, t) subject to the constraints of the robust design linearized at w0 and
// the unit-norm cone. Decision vector layout: [Re w, Im w, t]. Throws
// DegenerateDirection or NulledRegion when w0 sits where a gradient is
// undefined.
ConicProblem build_sca_subproblem(const CVec& w0, const EffectiveChannel& ch,
                                  const ProblemParams& p);

struct ScaOptions {
    int max_iter = 50;        // subproblem iterations per start
    double rel_tol = 1e-5;    // stop when |t_new - t_prev| / t_new drops below
    double accept_slack = 1e-7;  // tolerated ascent before a start is cut off
    int num_starts = 10;
    unsigned long long seed = 1;
    SolverOptions solver;
};

// Record of one multi-start branch.
struct ScaState {
    Beamformer w;                   // iterate selected for this start
    double t = std::numeric_limits<double>::infinity();  // last accepted value
    int iterations = 0;
    std::vector<double> t_history;  // accepted values, non-increasing to 1e-7
    bool subproblem_failed = false; // first subproblem unsolvable at the start
    bool feasible = false;          // start produced a worst-case-feasible w
};

struct ScaResult {
    Beamformer w;
    // max_i 1/|w^H h_{i,i-1}|^2 evaluated at the returned beamformer (the
    // quantity the epigraph variable bounds).
    double objective = std::numeric_limits<double>::infinity();
    int chosen_start = -1;
    std::vector<ScaState> starts;
};

// Multi-start SCA for the robust design. Each start runs the linearize-solve
// loop with monotone acceptance of t, then the final iterate is verified with
// the worst-case constraint check; if it fails, the best passing iterate of
// the start is used instead. Returns the best feasible start by objective.
// Throws AllStartsFailed when no start yields a feasible beamformer and
// InfeasibleTarget/std::invalid_argument on bad parameters.
ScaResult sca_solve(const EffectiveChannel& ch, const ProblemParams& p,
                    const ScaOptions& opts = {});

// Semidefinite relaxation of the perfect-CSI design. Variables: the real
// embedding of the lifted Hermitian matrix W (svec block, PSD), the channel
// powers x_{i,l} and y_{k,l} tied to W by trace equalities, hyperbolic
// auxiliaries for their reciprocals, and (multi-user only) the epigraph t.
// single_user = 0 builds the multi-user min-t problem; i >= 1 replaces the
// objective with maximizing user i's own-bin power and drops the epigraph.
// Requires p.sigma == 0.
ConicProblem build_sdr_problem(const EffectiveChannel& ch,
                               const ProblemParams& p, int single_user = 0);

struct SdrOptions {
    int num_randomizations = 200;
    double rank_tol = 1e-6;  // second-to-first eigenvalue ratio bound
    unsigned long long seed = 2;
    SolverOptions solver;
};

struct SdrResult {
    Beamformer w;
    CMat lifted;             // Hermitian V x V relaxation solution
    double eig_ratio = 1.0;  // lambda_2 / lambda_1 of the lifted matrix
    bool rank_one = false;
    bool randomized = false;
    int feasible_candidates = 0;  // randomization candidates passing the check
    double objective = std::numeric_limits<double>::quiet_NaN();  // relaxation optimum
    int solver_iterations = 0;
};

// Relaxation + recovery for the perfect-CSI multi-user design: solve the
// lifted problem; if the solution is rank one (eig_ratio <= rank_tol) return
// its scaled principal eigenvector, otherwise run Gaussian randomization and
// return the feasible candidate with the best min-rate (ties: first drawn).
// Throws SdpInfeasible, NoFeasibleRandomization, NumericalFailure, or
// std::invalid_argument if p.sigma != 0.
SdrResult sdr_solve(const EffectiveChannel& ch, const ProblemParams& p,
                    const SdrOptions& opts = {});

// Single-user variant maximizing user `user`'s own-bin power under the same
// constraint set. The relaxation returns a rank-one matrix for this special
// case; a non-rank-one outcome raises NumericalFailure.
SdrResult sdr_single_user(const EffectiveChannel& ch, const ProblemParams& p,
                          int user, const SdrOptions& opts = {});

// Benchmark scheme: an isotropically random unit-norm beamformer.
Beamformer random_beamformer(int V, Rng& rng);

}  // namespace otfsbf
