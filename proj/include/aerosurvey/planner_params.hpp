#ifndef AEROSURVEY_PLANNER_PARAMS_HPP
#define AEROSURVEY_PLANNER_PARAMS_HPP

#include "aerosurvey/common.hpp"

namespace aerosurvey
{

/// Vehicle limits and solver tolerances shared by the convex warm start and
/// the minimum-time program.
struct PlannerParams
{
    double u_max = 1.0;        // specific thrust bound (m/s^2), sphere radius
    double v_axis_max = kInf;  // per-axis velocity bound (m/s)
    double v_blur = kInf;      // capture-point speed bound (m/s)
    int switching_points = 1;  // interior switching points per waypoint segment
    double u_z_min = -kInf;    // optional lower bound on vertical input
    Vec3 v_start = Vec3::Zero();
    Vec3 v_end = Vec3::Zero();
    double eps_feas = 1e-6;
    double eps_opt = 1e-6;
    double eps_time = 1e-9;
    double gravity = 9.81;     // recorded only; inputs are net accelerations

    int intervals_per_segment() const { return switching_points + 1; }

    /// Blur bound is redundant once it exceeds the norm of the velocity box
    /// corner.
    bool blur_redundant() const
    {
        return v_blur > std::sqrt(3.0) * v_axis_max;
    }

    void validate() const
    {
        if (u_max <= 0.0)
            throw InvalidParameterError("u_max must be positive");
        if (v_axis_max <= 0.0)
            throw InvalidParameterError("v_axis_max must be positive");
        if (v_blur <= 0.0)
            throw InvalidParameterError("v_blur must be positive");
        if (switching_points < 1)
            throw InvalidParameterError("switching_points must be >= 1");
        if (u_z_min > u_max)
            throw InvalidParameterError("u_z_min exceeds the thrust sphere");
    }
};

} // namespace aerosurvey

#endif
