#include "otfsbf/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "otfsbf/errors.hpp"
#include "otfsbf/robust.hpp"

namespace otfsbf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Cd = std::complex<double>;

void check_compatible(const EffectiveChannel& ch, const ProblemParams& p) {
    p.validate();
    if (ch.dims.num_delay != p.M || ch.dims.num_doppler != p.N) {
        throw std::invalid_argument("channel grid does not match problem dims");
    }
    if (ch.num_antennas != p.V) {
        throw std::invalid_argument("channel antenna count does not match V");
    }
    if (ch.num_stationary_users() != p.M) {
        throw std::invalid_argument("channel must carry one stationary user per delay bin");
    }
}

// Largest stationary-user inverse own-bin power: the quantity the SCA
// epigraph variable t upper-bounds, evaluated exactly at w.
double epigraph_objective(const CVec& w, const EffectiveChannel& ch,
                          const ProblemParams& p) {
    double worst = 0.0;
    for (int i = 1; i <= p.M; ++i) {
        const double pw = beamformed_power(w, ch.h_at(i, i - 1));
        if (pw == 0.0) return kInf;
        worst = std::max(worst, 1.0 / pw);
    }
    return worst;
}

// Real-coefficient row for the linear functional w -> Re{grad^H w} in the
// [Re w, Im w, t] coordinates of the SCA subproblem.
void fill_row(Eigen::MatrixXd& a, int row, const CVec& grad) {
    const int V = static_cast<int>(grad.size());
    for (int v = 0; v < V; ++v) {
        a(row, v) = grad(v).real();
        a(row, V + v) = grad(v).imag();
    }
}

}  // namespace

CVec grad_inv_power(const CVec& w, const CVec& h, double deg_tol) {
    if (w.size() == 0 || w.size() != h.size()) {
        throw std::invalid_argument("grad_inv_power: dimension mismatch");
    }
    const Cd u = w.dot(h);  // w^H h
    if (std::abs(u) <= deg_tol) {
        throw DegenerateDirection("beamformed gain |w^H h| below tolerance");
    }
    const double p2 = std::norm(u);
    return (-2.0 / (p2 * p2)) * (h * h.dot(w));
}

CVec grad_robust_power(const CVec& w, const CVec& g_hat, double sigma,
                       double deg_tol) {
    if (sigma < 0.0) {
        throw std::invalid_argument("grad_robust_power: negative sigma");
    }
    if (sigma == 0.0) return grad_inv_power(w, g_hat, deg_tol);
    if (w.size() == 0 || w.size() != g_hat.size()) {
        throw std::invalid_argument("grad_robust_power: dimension mismatch");
    }
    const double a = std::abs(w.dot(g_hat));
    const double b = w.norm();
    const double margin = a - sigma * b;
    if (margin <= deg_tol) {
        throw NulledRegion("error ball reaches the beamformer's null space");
    }
    const CVec inner = g_hat * (g_hat.dot(w) / a) - (sigma / b) * w;
    return (-2.0 / (margin * margin * margin)) * inner;
}

ConicProblem build_sca_subproblem(const CVec& w0, const EffectiveChannel& ch,
                                  const ProblemParams& p) {
    check_compatible(ch, p);
    if (static_cast<int>(w0.size()) != p.V) {
        throw std::invalid_argument("expansion point size does not match V");
    }
    const Thresholds th = thresholds(p);
    const int V = p.V;
    const int M = p.M;
    const int N = p.N;
    const int n = 2 * V + 1;
    const int tcol = 2 * V;

    ConicProblem prob;
    prob.num_vars = n;
    prob.c = Eigen::VectorXd::Zero(n);
    prob.c(tcol) = 1.0;

    const int rows = 2 * M + 1;
    prob.a_ub = Eigen::MatrixXd::Zero(rows, n);
    prob.b_ub = Eigen::VectorXd::Zero(rows);
    int r = 0;

    // Epigraph rows: own-bin inverse power of each stationary user, linearized
    // at w0, stays below t.
    for (int i = 1; i <= M; ++i) {
        const CVec& hv = ch.h_at(i, i - 1);
        const CVec grad = grad_inv_power(w0, hv);
        const double f0 = 1.0 / std::norm(w0.dot(hv));
        fill_row(prob.a_ub, r, grad);
        prob.a_ub(r, tcol) = -1.0;
        prob.b_ub(r) = -f0 + grad.dot(w0).real();
        ++r;
    }

    // Grid budget: worst-case inverse powers of the high-mobility user's
    // estimated channels, linearized and summed over the whole grid.
    {
        CVec gsum = CVec::Zero(V);
        double fsum = 0.0;
        for (int k = 0; k < N; ++k) {
            for (int l = 0; l < M; ++l) {
                const CVec& gv = ch.g_hat_at(k, l);
                gsum += grad_robust_power(w0, gv, p.sigma);
                const double margin =
                    std::abs(w0.dot(gv)) - p.sigma * w0.norm();
                fsum += 1.0 / (margin * margin);
            }
        }
        fill_row(prob.a_ub, r, gsum);
        prob.b_ub(r) = th.eps - fsum + gsum.dot(w0).real();
        ++r;
    }

    // Per-user budgets: each stationary user's summed inverse powers across
    // its delay bins (exact channels).
    for (int i = 1; i <= M; ++i) {
        CVec gsum = CVec::Zero(V);
        double fsum = 0.0;
        for (int l = 0; l < M; ++l) {
            const CVec& hv = ch.h_at(i, l);
            gsum += grad_inv_power(w0, hv);
            fsum += 1.0 / std::norm(w0.dot(hv));
        }
        fill_row(prob.a_ub, r, gsum);
        prob.b_ub(r) = th.eps1 - fsum + gsum.dot(w0).real();
        ++r;
    }

    // Unit-norm ball for the stacked real beamformer coordinates.
    SocConstraint ball;
    ball.F = Eigen::MatrixXd::Zero(2 * V, n);
    ball.F.topLeftCorner(2 * V, 2 * V).setIdentity();
    ball.f = Eigen::VectorXd::Zero(2 * V);
    ball.g = Eigen::VectorXd::Zero(n);
    ball.h = 1.0;
    prob.soc.push_back(std::move(ball));

    prob.validate();
    return prob;
}

ScaResult sca_solve(const EffectiveChannel& ch, const ProblemParams& p,
                    const ScaOptions& opts) {
    check_compatible(ch, p);
    thresholds(p);  // surfaces InfeasibleTarget before any work
    if (opts.num_starts <= 0 || opts.max_iter <= 0) {
        throw std::invalid_argument("sca_solve: starts and iterations must be positive");
    }

    Rng rng(opts.seed);
    ScaResult res;
    double best_obj = kInf;

    for (int s = 0; s < opts.num_starts; ++s) {
        ScaState st;
        std::vector<CVec> iterates;
        iterates.push_back(random_beamformer(p.V, rng).w);
        st.w = Beamformer(iterates.front());

        double t_prev = kInf;
        for (int it = 0; it < opts.max_iter; ++it) {
            bool solved = false;
            SolveStatus sol;
            try {
                const ConicProblem sub = build_sca_subproblem(iterates.back(), ch, p);
                sol = solve_conic(sub, opts.solver);
                solved = sol.status == SolveCode::Optimal;
            } catch (const DegenerateDirection&) {
            } catch (const NulledRegion&) {
            }
            if (!solved) {
                // An unusable very first subproblem wastes the start (the next
                // start redraws); a later failure keeps the progress so far.
                if (it == 0) st.subproblem_failed = true;
                break;
            }

            CVec wn(p.V);
            for (int v = 0; v < p.V; ++v) wn(v) = Cd(sol.x(v), sol.x(p.V + v));
            const double nrm = wn.norm();
            if (nrm > 1.0) wn /= nrm;  // trim solver tolerance outside the ball

            const double t_new = sol.objective;
            if (t_new > t_prev + opts.accept_slack) break;  // lost monotonicity
            iterates.push_back(wn);
            st.t_history.push_back(t_new);
            st.iterations = it + 1;
            st.t = t_new;
            const bool converged =
                std::isfinite(t_prev) &&
                std::abs(t_new - t_prev) <
                    opts.rel_tol * std::max(std::abs(t_new), 1e-300);
            t_prev = t_new;
            if (converged) break;
        }

        if (!st.subproblem_failed) {
            // The linearized constraints under-estimate the true ones, so the
            // solved iterates can be slightly infeasible for the original
            // problem; certify the final iterate and fall back to the best
            // certifiable one if needed.
            const auto feasible_at = [&](const CVec& wv) {
                return check_sic_constraints(Beamformer(wv), ch, p,
                                             SicMode::worst_case)
                    .feasible;
            };
            int chosen = -1;
            if (feasible_at(iterates.back())) {
                chosen = static_cast<int>(iterates.size()) - 1;
            } else {
                double best_here = kInf;
                for (std::size_t j = 0; j < iterates.size(); ++j) {
                    if (!feasible_at(iterates[j])) continue;
                    const double obj = epigraph_objective(iterates[j], ch, p);
                    if (obj < best_here) {
                        best_here = obj;
                        chosen = static_cast<int>(j);
                    }
                }
            }
            if (chosen >= 0) {
                st.feasible = true;
                st.w = Beamformer(iterates[chosen]);
                const double obj = epigraph_objective(iterates[chosen], ch, p);
                if (obj < best_obj) {
                    best_obj = obj;
                    res.w = st.w;
                    res.objective = obj;
                    res.chosen_start = s;
                }
            } else {
                st.w = Beamformer(iterates.back());
            }
        }
        res.starts.push_back(std::move(st));
    }

    if (res.chosen_start < 0) {
        throw AllStartsFailed("no start produced a worst-case-feasible beamformer");
    }
    return res;
}

namespace {

// 2V x 2V real symmetric embedding of a Hermitian matrix: [[Re, -Im], [Im, Re]].
Eigen::MatrixXd real_embedding(const CMat& a) {
    const int V = static_cast<int>(a.rows());
    Eigen::MatrixXd t(2 * V, 2 * V);
    t.topLeftCorner(V, V) = a.real();
    t.bottomRightCorner(V, V) = a.real();
    t.topRightCorner(V, V) = -a.imag();
    t.bottomLeftCorner(V, V) = a.imag();
    return t;
}

// ||(2, a - b)|| <= a + b, the conic form of a*b >= 1 with a, b >= 0.
SocConstraint hyperbolic_cone(int num_vars, int a, int b) {
    SocConstraint s;
    s.F = Eigen::MatrixXd::Zero(2, num_vars);
    s.f = Eigen::VectorXd::Zero(2);
    s.f(0) = 2.0;
    s.F(1, a) = 1.0;
    s.F(1, b) = -1.0;
    s.g = Eigen::VectorXd::Zero(num_vars);
    s.g(a) = 1.0;
    s.g(b) = 1.0;
    s.h = 0.0;
    return s;
}

struct SdrLayout {
    int sdim = 0;   // embedded matrix side, 2V
    int s2 = 0;     // svec block length
    int x0 = 0;     // stationary-user powers x_{i,l}, M*M entries
    int y0 = 0;     // grid powers y_{k,l}, N*M entries
    int u0 = 0;     // reciprocals of y, N*M entries
    int v0 = 0;     // reciprocals of x, M*M entries
    int t = -1;     // epigraph (multi-user objective only)
    int n = 0;

    int x(int i, int l, int m) const { return x0 + (i - 1) * m + l; }
    int y(int k, int l, int m) const { return y0 + k * m + l; }
    int u(int k, int l, int m) const { return u0 + k * m + l; }
    int v(int i, int l, int m) const { return v0 + (i - 1) * m + l; }
};

SdrLayout sdr_layout(const ProblemParams& p, bool multi_user) {
    SdrLayout lo;
    lo.sdim = 2 * p.V;
    lo.s2 = svec_len(lo.sdim);
    lo.x0 = lo.s2;
    lo.y0 = lo.x0 + p.M * p.M;
    lo.u0 = lo.y0 + p.N * p.M;
    lo.v0 = lo.u0 + p.N * p.M;
    lo.n = lo.v0 + p.M * p.M;
    if (multi_user) {
        lo.t = lo.n;
        lo.n += 1;
    }
    return lo;
}

}  // namespace

ConicProblem build_sdr_problem(const EffectiveChannel& ch,
                               const ProblemParams& p, int single_user) {
    check_compatible(ch, p);
    if (p.sigma != 0.0) {
        throw std::invalid_argument(
            "relaxation-based design requires a zero CSI-error radius");
    }
    if (single_user < 0 || single_user > p.M) {
        throw std::invalid_argument("single_user must be 0 or a user index in 1..M");
    }
    const Thresholds th = thresholds(p);
    const bool multi = single_user == 0;
    const SdrLayout lo = sdr_layout(p, multi);
    const int M = p.M;
    const int N = p.N;

    ConicProblem prob;
    prob.num_vars = lo.n;
    prob.c = Eigen::VectorXd::Zero(lo.n);
    if (multi) {
        prob.c(lo.t) = 1.0;
    } else {
        // Maximize the chosen user's own-bin power.
        prob.c(lo.x(single_user, single_user - 1, M)) = -1.0;
    }

    // Trace ties: x and y are the beamformed powers of the lifted matrix.
    // With the real embedding, tr{T(A) T(B)} = 2 tr{A B}, hence the 1/2.
    const int ne = N * M + M * M;
    prob.a_eq = Eigen::MatrixXd::Zero(ne, lo.n);
    prob.b_eq = Eigen::VectorXd::Zero(ne);
    int r = 0;
    for (int k = 0; k < N; ++k) {
        for (int l = 0; l < M; ++l) {
            const CVec& gv = ch.g_hat_at(k, l);
            const CMat outer = gv * gv.adjoint();
            prob.a_eq.row(r).head(lo.s2) =
                (0.5 * svec(real_embedding(outer))).transpose();
            prob.a_eq(r, lo.y(k, l, M)) = -1.0;
            ++r;
        }
    }
    for (int i = 1; i <= M; ++i) {
        for (int l = 0; l < M; ++l) {
            const CVec& hv = ch.h_at(i, l);
            const CMat outer = hv * hv.adjoint();
            prob.a_eq.row(r).head(lo.s2) =
                (0.5 * svec(real_embedding(outer))).transpose();
            prob.a_eq(r, lo.x(i, l, M)) = -1.0;
            ++r;
        }
    }

    // Power budget (trace), grid budget, per-user budgets.
    const int ni = 2 + M;
    prob.a_ub = Eigen::MatrixXd::Zero(ni, lo.n);
    prob.b_ub = Eigen::VectorXd::Zero(ni);
    prob.a_ub.row(0).head(lo.s2) =
        (0.5 * svec(Eigen::MatrixXd::Identity(lo.sdim, lo.sdim))).transpose();
    prob.b_ub(0) = 1.0;
    for (int k = 0; k < N; ++k) {
        for (int l = 0; l < M; ++l) prob.a_ub(1, lo.u(k, l, M)) = 1.0;
    }
    prob.b_ub(1) = th.eps;
    for (int i = 1; i <= M; ++i) {
        for (int l = 0; l < M; ++l) prob.a_ub(1 + i, lo.v(i, l, M)) = 1.0;
        prob.b_ub(1 + i) = th.eps1;
    }

    // Hyperbolic ties u*y >= 1, v*x >= 1, and (multi-user) t*x_{i,i-1} >= 1.
    for (int k = 0; k < N; ++k) {
        for (int l = 0; l < M; ++l) {
            prob.soc.push_back(
                hyperbolic_cone(lo.n, lo.u(k, l, M), lo.y(k, l, M)));
        }
    }
    for (int i = 1; i <= M; ++i) {
        for (int l = 0; l < M; ++l) {
            prob.soc.push_back(
                hyperbolic_cone(lo.n, lo.v(i, l, M), lo.x(i, l, M)));
        }
    }
    if (multi) {
        for (int i = 1; i <= M; ++i) {
            prob.soc.push_back(hyperbolic_cone(lo.n, lo.t, lo.x(i, i - 1, M)));
        }
    }

    prob.psd = PsdBlock{0, lo.sdim};

    // No explicit sign bounds: every scalar variable sits on the positive
    // side of one of the hyperbolic cones above, so nonnegativity is implied,
    // and adding the redundant rows measurably degrades solver conditioning.

    prob.validate();
    return prob;
}

namespace {

// Pull the Hermitian lifted matrix out of the solved svec block. Averaging S
// with J S J^T (J the quarter-turn block rotation) projects onto the image of
// the complex embedding without disturbing the trace ties, whose coefficient
// matrices are themselves embeddings and hence J-invariant.
CMat lifted_from_svec(const Eigen::VectorXd& svec_block, int V) {
    const Eigen::MatrixXd s = smat(svec_block);
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(2 * V, 2 * V);
    j.topRightCorner(V, V) = -Eigen::MatrixXd::Identity(V, V);
    j.bottomLeftCorner(V, V) = Eigen::MatrixXd::Identity(V, V);
    const Eigen::MatrixXd proj = 0.5 * (s + j * s * j.transpose());
    CMat w(V, V);
    for (int a = 0; a < V; ++a) {
        for (int b = 0; b < V; ++b) {
            w(a, b) = Cd(proj(a, b), proj(V + a, b));
        }
    }
    return w;
}

SdrResult run_sdr(const EffectiveChannel& ch, const ProblemParams& p,
                  int single_user, const SdrOptions& opts) {
    const ConicProblem prob = build_sdr_problem(ch, p, single_user);
    const SolveStatus sol = solve_conic(prob, opts.solver);
    if (sol.status == SolveCode::Infeasible) {
        throw SdpInfeasible("the lifted design problem admits no solution");
    }
    if (sol.status != SolveCode::Optimal) {
        throw NumericalFailure("lifted solve did not reach optimality: " + sol.note);
    }

    const bool multi = single_user == 0;
    SdrResult res;
    res.solver_iterations = sol.iterations;
    res.objective = multi ? sol.objective : -sol.objective;

    const int V = p.V;
    res.lifted = lifted_from_svec(sol.x.head(svec_len(2 * V)), V);

    Eigen::SelfAdjointEigenSolver<CMat> es(res.lifted);
    if (es.info() != Eigen::Success) {
        throw NumericalFailure("eigen decomposition of the lifted matrix failed");
    }
    const Eigen::VectorXd evals = es.eigenvalues();  // ascending
    const double lead = evals(V - 1);
    if (!(lead > 0.0)) {
        throw NumericalFailure("lifted matrix has no positive leading eigenvalue");
    }
    const double second = V > 1 ? std::max(evals(V - 2), 0.0) : 0.0;
    res.eig_ratio = second / lead;

    if (res.eig_ratio <= opts.rank_tol) {
        CVec w = std::sqrt(lead) * es.eigenvectors().col(V - 1);
        // Deterministic phase: rotate the largest entry to the positive reals.
        int imax = 0;
        for (int v = 1; v < V; ++v) {
            if (std::abs(w(v)) > std::abs(w(imax))) imax = v;
        }
        if (std::abs(w(imax)) > 0.0) w *= std::conj(w(imax)) / std::abs(w(imax));
        const double nrm = w.norm();
        if (nrm > 1.0) w /= nrm;
        res.w = Beamformer(std::move(w));
        res.rank_one = true;
        return res;
    }

    // Gaussian randomization over the lifted covariance.
    res.randomized = true;
    const Eigen::VectorXd root_vals = evals.cwiseMax(0.0).cwiseSqrt();
    const CMat root = es.eigenvectors() * root_vals.cast<Cd>().asDiagonal() *
                      es.eigenvectors().adjoint();
    Rng rng(opts.seed);
    double best_rate = -kInf;
    CVec best;
    for (int dr = 0; dr < opts.num_randomizations; ++dr) {
        CVec cand = root * rng.cgaussian_vector(V);
        const double nrm = cand.norm();
        if (nrm == 0.0) continue;
        if (nrm > 1.0) cand /= nrm;
        const Beamformer bf(cand);
        if (!check_sic_constraints(bf, ch, p, SicMode::worst_case).feasible) continue;
        ++res.feasible_candidates;
        const double rate = min_rate(bf, ch, p).min_rate;
        if (rate > best_rate) {
            best_rate = rate;
            best = cand;
        }
    }
    if (res.feasible_candidates == 0) {
        throw NoFeasibleRandomization(
            "no randomization candidate satisfied the decoding constraints");
    }
    res.w = Beamformer(std::move(best));
    return res;
}

}  // namespace

SdrResult sdr_solve(const EffectiveChannel& ch, const ProblemParams& p,
                    const SdrOptions& opts) {
    return run_sdr(ch, p, 0, opts);
}

SdrResult sdr_single_user(const EffectiveChannel& ch, const ProblemParams& p,
                          int user, const SdrOptions& opts) {
    if (user < 1 || user > p.M) {
        throw std::invalid_argument("single-user index must lie in 1..M");
    }
    SdrResult res = run_sdr(ch, p, user, opts);
    if (!res.rank_one) {
        throw NumericalFailure(
            "single-user relaxation returned a higher-rank matrix");
    }
    return res;
}

Beamformer random_beamformer(int V, Rng& rng) {
    if (V <= 0) throw std::invalid_argument("random_beamformer: V must be positive");
    return Beamformer(rng.unit_sphere(V));
}

}  // namespace otfsbf
