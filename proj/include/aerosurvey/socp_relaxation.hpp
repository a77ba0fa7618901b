#ifndef AEROSURVEY_SOCP_RELAXATION_HPP
#define AEROSURVEY_SOCP_RELAXATION_HPP

#include "aerosurvey/camera_survey.hpp"
#include "aerosurvey/common.hpp"
#include "aerosurvey/conic_solver.hpp"
#include "aerosurvey/planner_params.hpp"

#include <vector>

namespace aerosurvey
{

/// Fixed-step convex relaxation of the minimum-time program. Every waypoint
/// segment is split into S+1 intervals of one common duration dt; inputs are
/// cone-bounded (||u_k|| <= sigma_k and ||u_k|| <= u_max) and the objective
/// minimizes the aggregate slack sum(sigma_k).
///
/// Node positions are eliminated: the per-node position recursion
/// r_{k+1} = r_k + v_k dt + u_k dt^2/2 combined with the waypoint pinning
/// r_j = wp_n is encoded as one displacement equality per segment, which is
/// algebraically equivalent and keeps the variable set to velocities, inputs,
/// and slacks: x = [v_0..v_{M-1} | u_0..u_{K-1} | sigma_0..sigma_{K-1}].
struct ConicProblem
{
    int num_waypoints = 0;    // N
    int switching_points = 0; // S interior switching nodes per segment
    int num_nodes = 0;        // M = (S+1)(N-1) + 1
    int num_intervals = 0;    // K = (S+1)(N-1)
    double dt = 0.0;          // common interval duration (s)
    double capture_speed_limit = kInf; // min(v_axis_max, v_blur)

    conic::Problem cone_data;

    // variable offsets into cone_data
    int v_index(int node, int axis) const { return 3 * node + axis; }
    int u_index(int interval, int axis) const
    {
        return 3 * num_nodes + 3 * interval + axis;
    }
    int sigma_index(int interval) const
    {
        return 3 * num_nodes + 3 * num_intervals + interval;
    }

    /// 0-based node index of 1-based waypoint n; 1-based nodes {1, S+2, ...}.
    int waypoint_node(int waypoint) const
    {
        return (switching_points + 1) * (waypoint - 1);
    }
};

enum class SocpStatus
{
    optimal,
    infeasible,
    max_iter
};

const char *to_string(SocpStatus status);

struct ConicSolution
{
    SocpStatus status = SocpStatus::max_iter;
    std::vector<Vec3> u;      // per interval
    std::vector<Vec3> v;      // per node
    std::vector<double> sigma; // per interval
    std::vector<Vec3> r;      // per node, reconstructed from the first waypoint
    double objective = 0.0;   // sum of sigma
    double dt = 0.0;
    int iterations = 0;
    const char *detail = ""; // solver status string for diagnostics
};

/// Worst violations of the relaxation's constraint families, computed from
/// the plan and parameters alone (independent of solver internals).
struct SocpResiduals
{
    double dynamics = 0.0;      // velocity recursion defect
    double waypoint = 0.0;      // reconstructed node position vs waypoint
    double boundary = 0.0;      // first/last node velocity vs prescribed
    double axis_box = 0.0;      // per-axis velocity bound
    double input_cone = 0.0;    // ||u_k|| vs sigma_k
    double input_cap = 0.0;     // ||u_k|| vs u_max
    double capture_speed = 0.0; // waypoint-node speed vs min(v_axis_max, v_blur)

    double max_violation() const;
};

ConicProblem build_socp(const SurveyPlan &plan, const PlannerParams &params, double dt);

ConicSolution solve_socp(const ConicProblem &problem);

SocpResiduals evaluate_socp_residuals(const SurveyPlan &plan, const PlannerParams &params,
                                      const ConicSolution &solution);

/// Smallest feasible common step within tol_dt, found by bisection (the
/// feasible set in dt is an interval unbounded above). Throws InfeasibleError
/// when dt_hi itself is infeasible.
struct LineSearchResult
{
    double dt_star = 0.0;
    ConicSolution solution;
    int bisection_iterations = 0;
    int socp_solves = 0;
};

LineSearchResult line_search_dt(const SurveyPlan &plan, const PlannerParams &params,
                                double dt_lo, double dt_hi, double tol_dt);

} // namespace aerosurvey

#endif
