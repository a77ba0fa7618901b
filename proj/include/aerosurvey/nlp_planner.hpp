#ifndef AEROSURVEY_NLP_PLANNER_HPP
#define AEROSURVEY_NLP_PLANNER_HPP

#include "aerosurvey/camera_survey.hpp"
#include "aerosurvey/common.hpp"
#include "aerosurvey/planner_params.hpp"
#include "aerosurvey/socp_relaxation.hpp"

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <vector>

namespace aerosurvey
{

/// How the thrust-sphere constraint is imposed on the inputs.
enum class InputMode
{
    sphere_equality, // ||u_k|| = u_max via a two-angle parameterization
    ball_inequality  // ||u_k|| <= u_max, Cartesian inputs (relaxed fallback)
};

const char *to_string(InputMode mode);

/// Warm-start vectors do not match the plan/parameter dimensions.
struct InvalidWarmStartError : InvalidParameterError
{
    using InvalidParameterError::InvalidParameterError;
};

/// The equality-constrained solve did not reach a feasible point; the caller
/// should retry with the ball-inequality relaxation and more switching points.
struct FallbackNeededError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

/// Variable-step local solution of the minimum-time program: per-interval
/// durations and inputs plus the node states they generate.
struct NodeSolution
{
    InputMode mode = InputMode::sphere_equality;
    int switching_points = 0;    // S actually used (fallback may raise it)
    std::vector<double> dt;      // K interval durations (s)
    std::vector<Vec3> u;         // K inputs (m/s^2)
    std::vector<Vec3> v;         // M node velocities (m/s)
    std::vector<Vec3> r;         // M node positions (m)
    double total_time = 0.0;     // sum of dt

    bool converged = false;
    double stationarity = kInf;         // inf-norm Lagrangian gradient at exit
    double constraint_violation = kInf; // worst internal constraint value at exit
    int outer_iterations = 0;
    int inner_iterations = 0;
    int fallback_attempts = 0; // extra switching points added; 0 = direct solve
    std::vector<double> accepted_objectives; // monotone non-increasing record

    double warm_dt_star = 0.0;        // fixed-step result the solve started from
    double warm_start_makespan = 0.0; // K * warm_dt_star for the final S
};

/// Worst violation per constraint family, recomputed from the plan and
/// parameters without any solver state.
struct NlpResiduals
{
    double dynamics = 0.0;   // position/velocity recursion defect (inf-norm)
    double waypoint = 0.0;   // node position vs required waypoint (Euclidean)
    double blur = 0.0;       // capture-node speed beyond v_blur
    double sphere = 0.0;     // input-norm violation per the solution's mode
    double axis_box = 0.0;   // per-axis node velocity beyond v_axis_max
    double boundary = 0.0;   // first/last node velocity vs prescribed

    std::vector<double> dynamics_per_interval;

    double max_violation() const;
};

/// Augmented Lagrangian of the minimum-time program in one decision vector.
///
/// Equality mode packs z = [theta_0..K-1 | phi_0..K-1 | s_0..K-1 | interior
/// node velocities], with u_k = u_max*(sin phi cos theta, sin phi sin theta,
/// cos phi) and dt_k = s_k^2. Ball mode packs z = [u (3K) | s (K) | interior
/// node velocities] and adds ||u_k||^2 <= u_max^2 penalty terms. Boundary node
/// velocities are fixed constants, so the inner minimization is unconstrained.
///
/// Exposed so the analytic gradients can be cross-checked against finite
/// differences; the planner drives it through the outer multiplier loop.
class MinTimeLagrangian
{
public:
    MinTimeLagrangian(const SurveyPlan &plan, const PlannerParams &params, InputMode mode);

    int dimension() const { return dim_; }
    int num_intervals() const { return K_; }
    int num_nodes() const { return M_; }
    int num_equalities() const { return static_cast<int>(lambda.size()); }
    int num_inequalities() const { return static_cast<int>(mu.size()); }
    InputMode mode() const { return mode_; }

    // multiplier state, updated by the outer loop
    Eigen::VectorXd lambda; // equalities: 3K dynamics rows + 3(N-1) displacement rows
    Eigen::VectorXd mu;     // inequalities (>= 0)
    double rho = 1.0;       // quadratic penalty weight

    double value_and_gradient(const Eigen::VectorXd &z, Eigen::VectorXd &grad) const;

    /// Plain objective sum(s^2) and raw constraint values at z.
    void constraints(const Eigen::VectorXd &z, Eigen::VectorXd &c_eq,
                     Eigen::VectorXd &g_ineq) const;
    double objective(const Eigen::VectorXd &z) const;

    /// Map a fixed-step relaxation result onto the decision vector.
    Eigen::VectorXd encode_warm_start(const ConicSolution &warm) const;
    /// Decode a decision vector into interval/node arrays.
    NodeSolution decode(const Eigen::VectorXd &z) const;

private:
    // layout offsets
    int theta_off_ = 0, phi_off_ = 0, u_off_ = 0, s_off_ = 0, v_off_ = 0;

    struct Inequality
    {
        enum class Kind
        {
            capture_speed, // ||v_j||^2 - v_blur^2
            box_upper,     // v_{j,a} - v_axis_max
            box_lower,     // -v_{j,a} - v_axis_max
            input_ball,    // ||u_k||^2 - u_max^2 (ball mode)
            input_floor    // u_z_min - u_{k,z}
        };
        Kind kind;
        int index; // node or interval
        int axis;  // for box rows
    };

    Vec3 node_velocity(const Eigen::VectorXd &z, int node) const;
    Vec3 input(const Eigen::VectorXd &z, int interval) const;

    const SurveyPlan *plan_;
    PlannerParams params_;
    InputMode mode_;
    int K_ = 0, M_ = 0, per_seg_ = 0, dim_ = 0;
    std::vector<Inequality> ineqs_;
};

/// Minimum-time solve with inputs pinned to the thrust sphere, warm-started
/// from the fixed-step relaxation. Throws FallbackNeededError when no feasible
/// point is reached within the outer-iteration budget and
/// InvalidWarmStartError when the warm vectors do not match (plan, params).
NodeSolution solve_min_time(const SurveyPlan &plan, const PlannerParams &params,
                            const ConicSolution &warm);

/// Ball-inequality retry ladder: S+1, S+2, ... up to S=5, each with a fresh
/// fixed-step warm start. Throws InfeasibleError when every retry fails.
NodeSolution solve_relaxed_fallback(const SurveyPlan &plan, const PlannerParams &params,
                                    const ConicSolution &warm);

/// Independent constraint audit of a solution against the plan/parameters.
NlpResiduals evaluate_residuals(const NodeSolution &sol, const SurveyPlan &plan,
                                const PlannerParams &params);

/// Full pipeline for one plan: bracket the fixed-step relaxation, bisect for
/// dt*, try the sphere-equality solve, and fall back when it signals failure.
NodeSolution plan_min_time(const SurveyPlan &plan, const PlannerParams &params);

} // namespace aerosurvey

#endif
