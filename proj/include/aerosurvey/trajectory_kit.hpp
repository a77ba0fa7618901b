#ifndef AEROSURVEY_TRAJECTORY_KIT_HPP
#define AEROSURVEY_TRAJECTORY_KIT_HPP

#include "aerosurvey/common.hpp"
#include "aerosurvey/nlp_planner.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <stdexcept>
#include <vector>

namespace aerosurvey
{

/// A solution whose residuals exceed the feasibility tolerance; interpolation
/// refuses to dress it up as a trajectory.
struct StaleSolutionError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct SampleState
{
    Vec3 r = Vec3::Zero();
    Vec3 v = Vec3::Zero();
    Vec3 a = Vec3::Zero();
};

/// Piecewise constant-acceleration trajectory: closed-form integration of a
/// node solution. Sampling owns time with half-open intervals (t_start, t_end]
/// so the left interval's acceleration is returned at switch instants; t = 0
/// falls to the first interval and t = duration to the last.
struct PiecewiseTrajectory
{
    struct Interval
    {
        double t_start = 0.0;
        double t_end = 0.0;
        Vec3 r_start = Vec3::Zero();
        Vec3 v_start = Vec3::Zero();
        Vec3 u = Vec3::Zero();
    };

    std::vector<Interval> intervals;
    std::vector<double> waypoint_times; // passage time per plan waypoint

    double duration() const
    {
        return intervals.empty() ? 0.0 : intervals.back().t_end;
    }
};

/// Quartic polynomials per waypoint segment in segment-relative time,
/// matching endpoint position/velocity and the unsmoothed midpoint position.
struct QuarticSpline
{
    struct Segment
    {
        double t_start = 0.0;
        double duration = 0.0;
        // columns are coefficient orders 0..4; rows are axes
        Eigen::Matrix<double, 3, 5> coeffs = Eigen::Matrix<double, 3, 5>::Zero();
    };

    std::vector<Segment> segments;

    double duration() const
    {
        return segments.empty() ? 0.0 : segments.back().t_start + segments.back().duration;
    }
};

/// Closed-form trajectory from a node solution. Throws StaleSolutionError when
/// the solution's recomputed residuals exceed eps_feas for (plan, params).
PiecewiseTrajectory interpolate(const NodeSolution &sol, const SurveyPlan &plan,
                                const PlannerParams &params);

/// State at time t in [0, duration]; throws std::out_of_range beyond a 1e-9
/// slack.
SampleState sample(const PiecewiseTrajectory &traj, double t);
SampleState sample(const QuarticSpline &spline, double t);

/// Fit one quartic per waypoint segment: endpoint positions/velocities plus
/// the unsmoothed trajectory's midpoint position (five conditions per axis).
/// Segments shorter than eps_time are copied through as linear polynomials.
QuarticSpline smooth(const PiecewiseTrajectory &traj, const NodeSolution &sol,
                     double eps_time = 1e-9);

/// Largest position deviation between the two representations over a uniform
/// scan (diagnostic; the quartic cannot reproduce piecewise-quadratic arcs).
double max_position_deviation(const PiecewiseTrajectory &traj, const QuarticSpline &spline,
                              int samples = 1000);

/// Delimited export, header `t,x,y,z,vx,vy,vz,ax,ay,az`, 9 significant digits,
/// rows at k/rate_hz plus the exact final instant.
template <typename Trajectory>
void write_csv(std::ostream &out, const Trajectory &traj, double rate_hz);

/// Structured (JSON) listing of {t_start, duration, u} per interval.
void write_segment_table(std::ostream &out, const PiecewiseTrajectory &traj);

} // namespace aerosurvey

#endif
