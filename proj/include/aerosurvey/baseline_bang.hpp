#ifndef AEROSURVEY_BASELINE_BANG_HPP
#define AEROSURVEY_BASELINE_BANG_HPP

#include "aerosurvey/common.hpp"
#include "aerosurvey/planner_params.hpp"
#include "aerosurvey/camera_survey.hpp"
#include "aerosurvey/trajectory_kit.hpp"

#include <array>
#include <vector>

namespace aerosurvey
{

/// A single-axis min-time bound is violated by the requested boundary
/// velocities (outside the cap, or unreachable under the effort bound).
struct InfeasibleAxisError : InfeasibleError
{
    using InfeasibleError::InfeasibleError;
};

/// One axis of a bang-singular-bang profile: signed full-effort arcs separated
/// by an optional constant-velocity singular arc.
struct AxisSchedule
{
    struct Phase
    {
        int sign = 0;          // -1, 0, +1 multiplier on the axis effort
        double duration = 0.0; // seconds, >= 0
    };

    std::vector<Phase> phases;
    double u_mag = 0.0; // axis effort magnitude (m/s^2)

    double total_time() const
    {
        double t = 0.0;
        for (const Phase &p : phases)
            t += p.duration;
        return t;
    }
};

/// Per-axis schedules synchronized to a shared segment duration.
struct BangSchedule
{
    std::array<AxisSchedule, 3> axes;
    double total_time = 0.0;
    bool dwell_inserted = false; // a zero-input dwell padded a slack axis
};

/// Classic 1-D double-integrator minimum time between boundary velocities:
/// full-effort arc to min(peak, v_cap), optional cruise, full-effort arc out.
/// Signed displacement and velocities are supported; throws
/// InfeasibleAxisError when |v0| or |vf| exceeds v_cap.
AxisSchedule plan_axis_min_time(double d, double v0, double vf, double u_axis,
                                double v_cap);

/// Reconstruct the same boundary-value motion in a fixed duration T >= the
/// axis minimum, keeping full effort and lowering the cruise speed (rest-to-
/// rest closed form). Used to synchronize slack axes to the slowest one.
AxisSchedule plan_axis_fixed_time(double d, double u_axis, double v_cap, double total);

/// Rest-to-rest segment between two waypoints: per-axis minima at effort
/// u_max/sqrt(3) (hypercube inscribed in the thrust sphere), slack axes
/// re-solved at the slowest axis's duration.
BangSchedule plan_segment(const Vec3 &w_a, const Vec3 &w_b, const Vec3 &v_a,
                          const Vec3 &v_b, const PlannerParams &params);

/// Whole-plan baseline: one rest-to-rest BangSchedule per waypoint pair.
struct BaselinePlan
{
    std::vector<BangSchedule> segments;
    double total_time = 0.0;
    bool dwell_inserted = false;
};

BaselinePlan plan_baseline(const SurveyPlan &plan, const PlannerParams &params);

/// Piecewise constant-acceleration trajectory over the merged per-axis switch
/// instants, in the shared export format.
PiecewiseTrajectory baseline_trajectory(const BaselinePlan &baseline,
                                        const SurveyPlan &plan);

} // namespace aerosurvey

#endif
