#pragma once

// Small dense conic solver used by the beamformer designs. Problems at the
// scale of this library (tens to a few hundred variables) do not justify an
// external dependency, so this is a self-contained primal-dual interior point
// method over the nonnegative orthant, second-order cones and one optional
// positive semidefinite block, with Nesterov-Todd scaling, a Mehrotra
// predictor-corrector step and the homogeneous self-dual embedding (which is
// what yields clean infeasibility certificates).

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace otfsbf {

// One second-order cone row: ||F x + f||_2 <= g' x + h.
struct SocConstraint {
    Eigen::MatrixXd F;
    Eigen::VectorXd f;
    Eigen::VectorXd g;
    double h = 0.0;
};

// A contiguous slice of the decision vector interpreted as the scaled vector
// representation (svec) of a dim x dim symmetric matrix constrained to be
// positive semidefinite. svec stacks the lower triangle column by column with
// off-diagonal entries multiplied by sqrt(2), so that dot(svec(A), svec(B))
// equals trace(A B).
struct PsdBlock {
    int offset = 0;
    int dim = 0;
};

// Linear objective over a real decision vector subject to affine inequalities,
// equalities, second-order cone rows, an optional PSD block and simple bounds.
// Complex-valued models are expected to be stacked into real/imaginary parts
// by the caller.
struct ConicProblem {
    int num_vars = 0;
    Eigen::VectorXd c;

    Eigen::MatrixXd a_ub;  // a_ub * x <= b_ub
    Eigen::VectorXd b_ub;
    Eigen::MatrixXd a_eq;  // a_eq * x == b_eq
    Eigen::VectorXd b_eq;

    std::vector<SocConstraint> soc;
    std::optional<PsdBlock> psd;

    // Empty vectors mean unbounded; otherwise size num_vars with +-inf allowed.
    Eigen::VectorXd lb;
    Eigen::VectorXd ub;

    // Throws std::invalid_argument on any dimension inconsistency.
    void validate() const;
};

enum class SolveCode { Optimal, Infeasible, MaxIter, NumericalFailure };

struct SolveStatus {
    SolveCode status = SolveCode::NumericalFailure;
    Eigen::VectorXd x;

    // Dual iterates for the internal standard form; exposed for verification.
    Eigen::VectorXd y_eq;
    Eigen::VectorXd z_cone;

    double objective = std::numeric_limits<double>::quiet_NaN();
    double primal_residual = std::numeric_limits<double>::quiet_NaN();
    double dual_residual = std::numeric_limits<double>::quiet_NaN();
    double duality_gap = std::numeric_limits<double>::quiet_NaN();
    double relative_gap = std::numeric_limits<double>::quiet_NaN();
    int iterations = 0;
    std::string note;
};

struct SolverOptions {
    int max_iter = 100;
    double feastol = 1e-8;
    double abstol = 5e-9;
    double reltol = 1e-8;
    double step_fraction = 0.99;
    bool refine = true;
    bool verbose = false;  // per-iteration diagnostics on stderr
};

// Deterministic: identical inputs produce identical outputs. A status of
// Optimal guarantees relative primal/dual residuals and relative duality gap
// of at most 1e-7 on the original (unscaled) data.
SolveStatus solve_conic(const ConicProblem& problem, const SolverOptions& options = {});

// svec/smat helpers matching the PsdBlock convention above.
int svec_len(int dim);
Eigen::VectorXd svec(const Eigen::MatrixXd& S);
Eigen::MatrixXd smat(const Eigen::VectorXd& v);

// Index of the svec coordinate holding matrix entry (r, c), r >= c.
int svec_index(int dim, int r, int c);

// Serializes the full problem (objective, rows, cones, bounds) to a JSON
// document, e.g. to re-solve it with an independent solver when debugging.
std::string conic_to_json(const ConicProblem& problem);

}  // namespace otfsbf
