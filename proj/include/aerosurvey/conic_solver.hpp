#ifndef AEROSURVEY_CONIC_SOLVER_HPP
#define AEROSURVEY_CONIC_SOLVER_HPP

#include <Eigen/Core>

#include <vector>

namespace aerosurvey::conic
{

/// Cone program in standard form:
///
///   minimize    c'x
///   subject to  A x = b
///               G x + s = h,   s in K
///
/// where K is the product of an LP cone of dimension n_lp followed by
/// second-order cones of the listed dimensions. Rows of G are ordered
/// accordingly.
struct Entry
{
    int row = 0;
    int col = 0;
    double value = 0.0;
};

struct Problem
{
    int n = 0;
    Eigen::VectorXd c;

    std::vector<Entry> A_entries; // p x n
    Eigen::VectorXd b;

    std::vector<Entry> G_entries; // m x n
    Eigen::VectorXd h;

    int n_lp = 0;
    std::vector<int> soc_dims;

    int n_eq() const { return static_cast<int>(b.size()); }
    int n_cone() const { return static_cast<int>(h.size()); }
};

enum class SolveStatus
{
    optimal,
    primal_infeasible,
    dual_infeasible,
    max_iterations,
    numerical_problem
};

const char *to_string(SolveStatus status);

struct Settings
{
    double feastol = 1e-8;
    double abstol = 1e-8;
    double reltol = 1e-8;
    double feastol_inacc = 1e-5;
    double abstol_inacc = 5e-6;
    double reltol_inacc = 5e-6;
    int max_iterations = 60;
    int refine_steps = 3;
    int equil_iters = 3;
    double delta_static = 7e-8;   // static KKT regularization
    double step_damping = 0.99;   // fraction of the step to the cone boundary
    bool verbose = false;
};

struct Solution
{
    SolveStatus status = SolveStatus::numerical_problem;
    bool reduced_accuracy = false;
    Eigen::VectorXd x;
    Eigen::VectorXd y; // equality multipliers
    Eigen::VectorXd z; // cone multipliers
    Eigen::VectorXd s; // cone slacks
    double primal_obj = 0.0;
    double dual_obj = 0.0;
    double gap = 0.0;
    int iterations = 0;
};

/// Dense homogeneous self-dual primal-dual interior-point method with
/// Nesterov-Todd scaling and Mehrotra predictor-corrector steps. The KKT
/// system is condensed onto the (x, y) block and solved with partially
/// pivoted LU, with iterative refinement against the full system.
Solution solve(const Problem &problem, const Settings &settings = Settings());

/// Worst constraint violations of a candidate point, evaluated from the raw
/// problem data (no solver state). Cone violation is how far s = h - Gx sits
/// outside K.
struct ResidualReport
{
    double eq_violation = 0.0;   // max |Ax - b|
    double cone_violation = 0.0; // max distance outside the cone
};

ResidualReport check_residuals(const Problem &problem, const Eigen::VectorXd &x);

} // namespace aerosurvey::conic

#endif
