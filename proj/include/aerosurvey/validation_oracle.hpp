#ifndef AEROSURVEY_VALIDATION_ORACLE_HPP
#define AEROSURVEY_VALIDATION_ORACLE_HPP

#include "aerosurvey/common.hpp"
#include "aerosurvey/camera_survey.hpp"
#include "aerosurvey/planner_params.hpp"
#include "aerosurvey/trajectory_kit.hpp"

#include <functional>
#include <string>
#include <vector>

namespace aerosurvey
{

struct IntegrationState
{
    double t = 0.0;
    Vec3 r = Vec3::Zero();
    Vec3 v = Vec3::Zero();
};

/// RK4 integration of r' = v, v' = u(t) with uniform steps; the final partial
/// step closes exactly on t_end. Error is O(step^4) for smooth u.
std::vector<IntegrationState> forward_integrate(const std::function<Vec3(double)> &u,
                                                const IntegrationState &x0, double t_end,
                                                double step_s);

/// Breakpoint-aligned RK4 of a piecewise constant-acceleration trajectory
/// starting from its own initial state; exact to roundoff because each step
/// sees a constant input.
std::vector<IntegrationState> forward_integrate(const PiecewiseTrajectory &traj,
                                                double step_s = 1e-3);

/// Closed-form rest-to-rest minimum time on one axis: symmetric triangle
/// 2*sqrt(d/u) unless the peak speed sqrt(d*u) exceeds v_cap, in which case a
/// cruise at the cap is inserted.
double analytic_min_time_1d(double d, double u_max, double v_cap);

struct BruteForceResult
{
    double total_time = 0.0;
    /// Time scale of one search cell (velocity cell corrected at full thrust
    /// plus the bisection tolerance); comparisons against smarter planners
    /// should allow this slack.
    double resolution_s = 0.0;
    long candidates = 0;
};

/// Exhaustive grid search for tiny instances (N <= 3, one interior switch per
/// segment): interior waypoint velocities on a per-axis grid over [-v, v],
/// switch fractions on a uniform grid, each candidate resolved by a two-point
/// boundary-value feasibility bisection in the segment duration. Throws
/// InfeasibleError when no grid candidate admits a feasible profile.
BruteForceResult brute_force_min_time(const SurveyPlan &plan, const PlannerParams &params,
                                      int velocity_points = 21, int fraction_points = 21);

enum class ToleranceProfile
{
    standard, // 1e-6 absolute on every family
    strict    // 1e-8
};

double profile_tolerance(ToleranceProfile profile);

/// Constraint audit recomputed from the raw trajectory alone: no solver
/// internals are consulted.
struct AuditReport
{
    double total_time = 0.0;

    std::vector<double> waypoint_error_m;  // position miss per waypoint
    std::vector<double> waypoint_speed;    // speed at each capture point
    double max_waypoint_error = 0.0;
    double max_blur_excess = 0.0;    // waypoint speed beyond v_blur
    double max_axis_speed_excess = 0.0;
    double max_input_excess = 0.0;   // acceleration norm beyond the allowance
    double max_continuity_gap = 0.0; // state mismatch across interval joints
    double reintegration_gap = 0.0;  // RK4 replay vs closed form

    bool has_baseline = false;
    double baseline_time = 0.0;
    double delta_time = 0.0; // total_time - baseline_time; negative = faster

    bool passed = false;
    std::vector<std::string> failures;
};

struct AuditOptions
{
    ToleranceProfile profile = ToleranceProfile::standard;
    /// Multiplier on u_max before the input bound counts as violated; the
    /// smoothed trajectory is audited with a relaxed allowance because the
    /// quartic fit does not preserve the input magnitude.
    double input_allowance = 1.0;
    int dense_samples = 2000;
};

AuditReport audit(const PiecewiseTrajectory &traj, const SurveyPlan &plan,
                  const PlannerParams &params,
                  const PiecewiseTrajectory *baseline = nullptr,
                  const AuditOptions &options = {});

/// Audit of the smoothed spline: same families except the continuity and
/// re-integration checks (the quartic is smooth by construction), with the
/// relaxed input allowance applied.
AuditReport audit_smoothed(const QuarticSpline &spline,
                           const std::vector<double> &waypoint_times,
                           const SurveyPlan &plan, const PlannerParams &params,
                           const AuditOptions &options = {});

} // namespace aerosurvey

#endif
